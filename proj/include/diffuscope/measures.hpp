#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace diffuscope {

/// Finite weighted point set in R^d. Coordinates are stored row-major, one
/// row per support point. Duplicate points are kept as separate atoms.
class EmpiricalMeasure {
 public:
  /// Validates and, when the weights sum to within 1e-9 of one, renormalizes
  /// them so the sum is one to machine precision.
  EmpiricalMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const { return weights_[i]; }

  std::span<const double> coords() const noexcept { return coords_; }
  std::span<const double> weights() const noexcept { return weights_; }

  EmpiricalMeasure translated(std::span<const double> shift) const;
  EmpiricalMeasure scaled(double factor) const;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

EmpiricalMeasure uniform_empirical(const std::vector<std::vector<double>>& points);
EmpiricalMeasure weighted_empirical(const std::vector<std::vector<double>>& points,
                                    std::vector<double> weights);

/// Probability vector on the nodes of a network, in node order.
class VertexDistribution {
 public:
  explicit VertexDistribution(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
};

VertexDistribution point_mass(std::size_t index, std::size_t n);
VertexDistribution uniform_distribution(std::size_t n);

/// Normalized counts. Counts must be finite and nonnegative with a positive total.
VertexDistribution frequency_distribution(std::span<const double> counts);

namespace detail {
// Applies the shared probability-vector rule: nonnegative finite entries,
// total within 1e-9 of one, then renormalized.
void normalize_probabilities(std::vector<double>& probs, const char* what);
}  // namespace detail

}  // namespace diffuscope
