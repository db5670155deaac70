#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "diffuscope/measures.hpp"

// Heat-kernel geometry on R^d: Gaussian kernel, diffusion distance, diffusion
// Frechet function V_{alpha,t} and its gradient, grid evaluation, and the
// gradient flow whose attractors are the local minima of V.
namespace diffuscope::euclid {

/// Diffusion time t > 0.
class Scale {
 public:
  explicit Scale(double t);
  double value() const noexcept { return t_; }

 private:
  double t_;
};

/// C_d(t) = (4 pi t)^{d/2}.
double heat_normalizer(std::size_t dim, double t);

/// G_t(x, y) = exp(-|x - y|^2 / 4t) / C_d(t).
double heat_kernel(std::span<const double> x, std::span<const double> y, Scale t);

/// d_t^2(x, y) = 2 (1/C_d(2t) - G_{2t}(x, y)). Bounded by 2/C_d(2t).
double diffusion_distance_sq(std::span<const double> x, std::span<const double> y, Scale t);

/// Supremum of d_t^2, 2/C_d(2t); V_{alpha,t} levels off to this far from the support.
double frechet_plateau(std::size_t dim, Scale t);

double frechet_function(const EmpiricalMeasure& alpha, std::span<const double> x, Scale t);

/// Gaussian density estimate sum_i w_i G_t(x, p_i).
double gaussian_kde(const EmpiricalMeasure& alpha, std::span<const double> x, Scale t);

/// Analytic gradient (1/2t) sum_i w_i (x - p_i) G_{2t}(p_i, x).
std::vector<double> frechet_gradient(const EmpiricalMeasure& alpha, std::span<const double> x,
                                     Scale t);

/// Regular axis-aligned grid. Axis 0 varies slowest in the flat index.
struct GridSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> resolution;

  std::size_t dim() const noexcept { return lower.size(); }
  std::size_t size() const;
  std::vector<double> point(std::size_t flat_index) const;
  std::vector<std::size_t> unravel(std::size_t flat_index) const;
};

/// Bounding box of the given supports widened by 4 sqrt(2t) per side;
/// 256 cells per axis for d <= 2 and 64 for d = 3. Higher dimensions need an
/// explicit grid.
GridSpec default_grid(std::span<const EmpiricalMeasure* const> supports, Scale t);
GridSpec default_grid(const EmpiricalMeasure& alpha, Scale t);

struct FrechetField {
  GridSpec grid;
  std::vector<double> values;
  Scale scale;

  std::size_t dim() const noexcept { return grid.dim(); }
};

FrechetField evaluate_field(const EmpiricalMeasure& alpha, const GridSpec& grid, Scale t);

/// V at an explicit list of points (row-major, alpha.dim() columns).
std::vector<double> evaluate_points(const EmpiricalMeasure& alpha, std::span<const double> coords,
                                    Scale t);

/// Flat indices whose value is strictly below every existing axis neighbour.
std::vector<std::size_t> local_minima(const FrechetField& field);

struct FlowOptions {
  std::optional<double> step;   // default 0.9 t C_d(2t)
  std::optional<double> tol;    // default 1e-6 sqrt(t)
  std::size_t max_iters = 10000;
  std::size_t record_every = 1;  // snapshot cadence in iterations
};

struct FlowResult {
  std::vector<std::vector<double>> snapshots;  // row-major point sets
  std::vector<std::size_t> snapshot_iterations;
  std::size_t iterations = 0;
  bool converged = false;
  double step = 0.0;
  double tol = 0.0;
  std::size_t backtracks = 0;
  std::size_t descent_violations = 0;
};

double default_flow_step(std::size_t dim, Scale t);
double default_flow_tol(Scale t);

/// Explicit Euler descent x <- x - h grad V(x), independently per point, with
/// step halving (up to 30 times) whenever V would increase. Stops when the
/// largest per-point displacement drops below tol.
FlowResult gradient_flow(std::span<const double> coords, const EmpiricalMeasure& alpha, Scale t,
                         const FlowOptions& options = {});

}  // namespace diffuscope::euclid
