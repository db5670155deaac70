#include "diffuscope/euclid_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "diffuscope/error.hpp"
#include "diffuscope/parallel.hpp"

namespace diffuscope::euclid {

namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::DimensionMismatch, "points of dimension " + std::to_string(x.size()) +
                                             " and " + std::to_string(y.size()));
  }
  double r2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    r2 += d * d;
  }
  return r2;
}

void require_dim(const EmpiricalMeasure& alpha, std::span<const double> x) {
  if (x.size() != alpha.dim()) {
    throw Error(Errc::DimensionMismatch, "query point has dimension " + std::to_string(x.size()) +
                                             ", measure has " + std::to_string(alpha.dim()));
  }
}

// Fused pass returning V(x) and optionally filling grad V(x).
double frechet_value_and_gradient(const EmpiricalMeasure& alpha, std::span<const double> x,
                                  double t, double* grad) {
  const std::size_t dim = alpha.dim();
  const double plateau = 2.0 / heat_normalizer(dim, 2.0 * t);
  const double inv8t = 1.0 / (8.0 * t);
  double value = 0.0;
  if (grad) std::fill(grad, grad + dim, 0.0);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const auto p = alpha.point(i);
    double r2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = x[k] - p[k];
      r2 += d * d;
    }
    const double w = alpha.weight(i);
    value += w * (-plateau * std::expm1(-r2 * inv8t));
    if (grad) {
      // (1/2t) w (x - p) G_{2t}, with G_{2t} = (plateau/2) exp(-r2/8t)
      const double coef = w * 0.5 * plateau * std::exp(-r2 * inv8t) / (2.0 * t);
      for (std::size_t k = 0; k < dim; ++k) grad[k] += coef * (x[k] - p[k]);
    }
  }
  return value;
}

}  // namespace

Scale::Scale(double t) : t_(t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(Errc::InvalidScale, "scale t must be positive and finite, got " + std::to_string(t));
  }
}

double heat_normalizer(std::size_t dim, double t) {
  return std::pow(4.0 * std::numbers::pi * t, 0.5 * static_cast<double>(dim));
}

double heat_kernel(std::span<const double> x, std::span<const double> y, Scale t) {
  const double r2 = squared_distance(x, y);
  return std::exp(-r2 / (4.0 * t.value())) / heat_normalizer(x.size(), t.value());
}

double diffusion_distance_sq(std::span<const double> x, std::span<const double> y, Scale t) {
  const double r2 = squared_distance(x, y);
  const double plateau = 2.0 / heat_normalizer(x.size(), 2.0 * t.value());
  return -plateau * std::expm1(-r2 / (8.0 * t.value()));
}

double frechet_plateau(std::size_t dim, Scale t) {
  return 2.0 / heat_normalizer(dim, 2.0 * t.value());
}

double frechet_function(const EmpiricalMeasure& alpha, std::span<const double> x, Scale t) {
  require_dim(alpha, x);
  return frechet_value_and_gradient(alpha, x, t.value(), nullptr);
}

double gaussian_kde(const EmpiricalMeasure& alpha, std::span<const double> x, Scale t) {
  require_dim(alpha, x);
  const double norm = heat_normalizer(alpha.dim(), t.value());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const auto p = alpha.point(i);
    double r2 = 0.0;
    for (std::size_t k = 0; k < alpha.dim(); ++k) {
      const double d = x[k] - p[k];
      r2 += d * d;
    }
    total += alpha.weight(i) * std::exp(-r2 / (4.0 * t.value()));
  }
  return total / norm;
}

std::vector<double> frechet_gradient(const EmpiricalMeasure& alpha, std::span<const double> x,
                                     Scale t) {
  require_dim(alpha, x);
  std::vector<double> grad(alpha.dim());
  frechet_value_and_gradient(alpha, x, t.value(), grad.data());
  return grad;
}

std::size_t GridSpec::size() const {
  std::size_t total = 1;
  for (std::size_t r : resolution) total *= r;
  return total;
}

std::vector<std::size_t> GridSpec::unravel(std::size_t flat_index) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t a = dim(); a-- > 0;) {
    idx[a] = flat_index % resolution[a];
    flat_index /= resolution[a];
  }
  return idx;
}

std::vector<double> GridSpec::point(std::size_t flat_index) const {
  const auto idx = unravel(flat_index);
  std::vector<double> x(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    if (resolution[a] == 1) {
      x[a] = 0.5 * (lower[a] + upper[a]);
    } else {
      const double frac = static_cast<double>(idx[a]) / static_cast<double>(resolution[a] - 1);
      x[a] = lower[a] + frac * (upper[a] - lower[a]);
    }
  }
  return x;
}

namespace {

void validate_grid(const GridSpec& grid) {
  const std::size_t d = grid.lower.size();
  if (d == 0 || grid.upper.size() != d || grid.resolution.size() != d) {
    throw Error(Errc::DimensionMismatch, "grid bounds and resolution must share one dimension");
  }
  for (std::size_t a = 0; a < d; ++a) {
    if (!std::isfinite(grid.lower[a]) || !std::isfinite(grid.upper[a])) {
      throw Error(Errc::NonFinite, "grid bounds must be finite");
    }
    if (grid.resolution[a] == 0) throw Error(Errc::InvalidArgument, "grid resolution must be >= 1");
    if (grid.upper[a] < grid.lower[a]) throw Error(Errc::DegenerateBox, "grid upper < lower");
    if (grid.resolution[a] > 1 && !(grid.upper[a] > grid.lower[a])) {
      throw Error(Errc::DegenerateBox, "zero-extent axis " + std::to_string(a) +
                                           " with resolution > 1");
    }
  }
}

}  // namespace

GridSpec default_grid(std::span<const EmpiricalMeasure* const> supports, Scale t) {
  if (supports.empty()) throw Error(Errc::EmptySupport, "no measures");
  const std::size_t d = supports.front()->dim();
  if (d > 3) throw Error(Errc::InvalidArgument, "d > 3 requires explicit evaluation points");
  GridSpec grid;
  grid.lower.assign(d, std::numeric_limits<double>::infinity());
  grid.upper.assign(d, -std::numeric_limits<double>::infinity());
  for (const EmpiricalMeasure* m : supports) {
    if (m->dim() != d) throw Error(Errc::DimensionMismatch, "measures of different dimension");
    for (std::size_t i = 0; i < m->size(); ++i) {
      const auto p = m->point(i);
      for (std::size_t a = 0; a < d; ++a) {
        grid.lower[a] = std::min(grid.lower[a], p[a]);
        grid.upper[a] = std::max(grid.upper[a], p[a]);
      }
    }
  }
  const double pad = 4.0 * std::sqrt(2.0 * t.value());
  for (std::size_t a = 0; a < d; ++a) {
    grid.lower[a] -= pad;
    grid.upper[a] += pad;
  }
  grid.resolution.assign(d, d <= 2 ? 256 : 64);
  return grid;
}

GridSpec default_grid(const EmpiricalMeasure& alpha, Scale t) {
  const EmpiricalMeasure* one[] = {&alpha};
  return default_grid(std::span<const EmpiricalMeasure* const>(one), t);
}

FrechetField evaluate_field(const EmpiricalMeasure& alpha, const GridSpec& grid, Scale t) {
  validate_grid(grid);
  if (grid.dim() != alpha.dim()) throw Error(Errc::DimensionMismatch, "grid vs measure dimension");
  FrechetField field{grid, std::vector<double>(grid.size()), t};
  parallel_for(field.values.size(), [&](std::size_t k) {
    const auto x = grid.point(k);
    field.values[k] = frechet_value_and_gradient(alpha, x, t.value(), nullptr);
  });
  return field;
}

std::vector<double> evaluate_points(const EmpiricalMeasure& alpha, std::span<const double> coords,
                                    Scale t) {
  const std::size_t d = alpha.dim();
  if (coords.size() % d != 0) throw Error(Errc::DimensionMismatch, "coordinates not a multiple of dim");
  std::vector<double> values(coords.size() / d);
  parallel_for(values.size(), [&](std::size_t k) {
    values[k] = frechet_value_and_gradient(alpha, coords.subspan(k * d, d), t.value(), nullptr);
  });
  return values;
}

std::vector<std::size_t> local_minima(const FrechetField& field) {
  const GridSpec& grid = field.grid;
  const std::size_t d = grid.dim();
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t a = d; a-- > 1;) stride[a - 1] = stride[a] * grid.resolution[a];
  std::vector<std::size_t> minima;
  for (std::size_t k = 0; k < field.values.size(); ++k) {
    const auto idx = grid.unravel(k);
    const double v = field.values[k];
    bool is_min = true;
    bool has_neighbor = false;
    for (std::size_t a = 0; a < d && is_min; ++a) {
      if (idx[a] > 0) {
        has_neighbor = true;
        if (!(v < field.values[k - stride[a]])) is_min = false;
      }
      if (idx[a] + 1 < grid.resolution[a]) {
        has_neighbor = true;
        if (!(v < field.values[k + stride[a]])) is_min = false;
      }
    }
    // a single-cell grid is its own minimum
    if (is_min && (has_neighbor || field.values.size() == 1)) minima.push_back(k);
  }
  return minima;
}

double default_flow_step(std::size_t dim, Scale t) {
  return 0.9 * t.value() * heat_normalizer(dim, 2.0 * t.value());
}

double default_flow_tol(Scale t) { return 1e-6 * std::sqrt(t.value()); }

FlowResult gradient_flow(std::span<const double> coords, const EmpiricalMeasure& alpha, Scale t,
                         const FlowOptions& options) {
  const std::size_t d = alpha.dim();
  if (coords.empty() || coords.size() % d != 0) {
    throw Error(Errc::DimensionMismatch, "initial points must be a nonempty multiple of dim");
  }
  FlowResult result;
  result.step = options.step.value_or(default_flow_step(d, t));
  result.tol = options.tol.value_or(default_flow_tol(t));
  if (!(result.step > 0.0) || !std::isfinite(result.step)) {
    throw Error(Errc::InvalidArgument, "flow step must be positive");
  }
  if (!(result.tol > 0.0) || !std::isfinite(result.tol)) {
    throw Error(Errc::InvalidArgument, "flow tol must be positive");
  }
  const std::size_t record_every = std::max<std::size_t>(1, options.record_every);
  const std::size_t n = coords.size() / d;

  std::vector<double> current(coords.begin(), coords.end());
  std::vector<double> value(n);
  parallel_for(n, [&](std::size_t i) {
    value[i] = frechet_value_and_gradient(alpha, std::span<const double>(current).subspan(i * d, d),
                                          t.value(), nullptr);
  });
  result.snapshots.push_back(current);
  result.snapshot_iterations.push_back(0);

  std::vector<double> displacement(n);
  std::vector<std::size_t> halvings(n);
  std::vector<unsigned char> violated(n);
  std::vector<unsigned char> nonfinite(n);

  for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
    parallel_for(n, [&](std::size_t i) {
      double* x = current.data() + i * d;
      std::vector<double> grad(d), trial(d);
      frechet_value_and_gradient(alpha, std::span<const double>(x, d), t.value(), grad.data());
      double h = result.step;
      std::size_t halved = 0;
      double trial_value = 0.0;
      bool accepted = false;
      for (;;) {
        for (std::size_t k = 0; k < d; ++k) trial[k] = x[k] - h * grad[k];
        trial_value = frechet_value_and_gradient(alpha, trial, t.value(), nullptr);
        if (!std::isfinite(trial_value)) {
          nonfinite[i] = 1;
          return;
        }
        if (trial_value <= value[i]) {
          accepted = true;
          break;
        }
        if (halved == 30) break;
        h *= 0.5;
        ++halved;
      }
      halvings[i] = halved;
      if (!accepted) {
        displacement[i] = 0.0;
        return;
      }
      double moved = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double delta = trial[k] - x[k];
        moved += delta * delta;
        x[k] = trial[k];
      }
      if (trial_value > value[i]) violated[i] = 1;
      value[i] = trial_value;
      displacement[i] = std::sqrt(moved);
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (nonfinite[i]) {
        throw Error(Errc::NonFiniteIterate, "non-finite iterate at iteration " +
                                                std::to_string(iter) + "; reduce the step");
      }
      result.backtracks += halvings[i];
      result.descent_violations += violated[i];
      violated[i] = 0;
    }
    result.iterations = iter;
    const double max_move = *std::max_element(displacement.begin(), displacement.end());
    result.converged = max_move < result.tol;
    if (result.converged || iter % record_every == 0 || iter == options.max_iters) {
      if (result.snapshot_iterations.back() != iter) {
        result.snapshots.push_back(current);
        result.snapshot_iterations.push_back(iter);
      }
    }
    if (result.converged) break;
  }
  return result;
}

}  // namespace diffuscope::euclid
