#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "diffuscope/euclid_diffusion.hpp"
#include "diffuscope/graph_diffusion.hpp"
#include "diffuscope/measures.hpp"

// Numerical certification of the Wasserstein stability inequalities and the
// two kernel lemmas they rest on. Every check returns a BoundReport; a report
// with satisfied == false is a counterexample, never an accepted outcome.
namespace diffuscope::stability {

struct BoundReport {
  std::string family;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  std::string instance_digest;
  bool satisfied = true;

  /// slack / rhs; 1 when both sides vanish. Smaller means tighter.
  double slack_ratio() const;
};

/// slack >= -1e-9 max(1, |rhs|).
BoundReport make_report(std::string family, double lhs, double rhs, std::string digest);

BoundReport check_lemma_gauss_a(std::span<const double> y1, std::span<const double> y2, double t);
BoundReport check_lemma_gauss_b(std::span<const double> y1, std::span<const double> y2, double t);

/// sup_x |V_a - V_b| over a grid (default: union support box) plus both
/// supports, against W_1(a, b) / (C_d(2t) sqrt(t e)).
BoundReport check_frechet_stability(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double t,
                                    const std::optional<euclid::GridSpec>& grid = std::nullopt);

enum class GradientConstant {
  stated,   // (e + 2) / (e C_d(2t))
  derived,  // (e + 2) / (2t e C_d(2t)), keeps the 1/(2t) of the kernel derivative
};

double gradient_stability_constant(std::size_t dim, double t, GradientConstant which);

BoundReport check_gradient_stability(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double t,
                                     const std::optional<euclid::GridSpec>& grid = std::nullopt,
                                     GradientConstant which = GradientConstant::stated);

/// |d_t^2(i,l) - d_t^2(j,l)| <= 4 sqrt(Tr e^{-2t Delta} - 1) d_t(i,j).
BoundReport check_lemma_commute(const graph::SpectralDecomposition& spec, std::size_t i,
                                std::size_t j, std::size_t l, double t);

/// Worst case of check_lemma_commute over all node triples at one scale.
BoundReport check_lemma_commute_all(const graph::SpectralDecomposition& spec, double t);

/// ||F_xi - F_zeta||_inf <= 4 sqrt((Tr e^{-2t Delta} - 1) / (2 e t)) W_1(xi, zeta).
BoundReport check_dfv_stability(const graph::SpectralDecomposition& spec,
                                const VertexDistribution& xi, const VertexDistribution& zeta,
                                double t);

/// splitmix64 of (seed, stream, index); gives each instance its own stream
/// so batches reproduce regardless of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Seeded generator for random test instances.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed) : engine_(seed) {}

  std::mt19937_64& engine() noexcept { return engine_; }
  double uniform(double lo, double hi);
  double log_uniform(double lo, double hi);
  std::size_t integer(std::size_t lo, std::size_t hi);  // inclusive
  double normal();

  /// Symmetric Dirichlet(1) probability vector.
  std::vector<double> dirichlet(std::size_t n);

  /// n standard-normal points scaled by s ~ U[0.1, 10], Dirichlet weights.
  EmpiricalMeasure measure(std::size_t n, std::size_t dim);

  /// Edge probability 0.5, weights U(0, 1], resampled until connected.
  graph::WeightedNetwork connected_network(std::size_t n);

  VertexDistribution distribution(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// Families: gauss_a, gauss_b, frechet, gradient, gradient_derived, commute, dfv.
const std::vector<std::string>& family_names();

std::vector<BoundReport> run_family(const std::string& family, std::size_t count, std::uint64_t seed);

struct FamilySummary {
  std::string family;
  std::size_t count = 0;
  std::size_t violations = 0;
  double min_slack_ratio = 1.0;
  bool all_satisfied = true;
};

FamilySummary summarize(const std::string& family, std::span<const BoundReport> reports);

}  // namespace diffuscope::stability
