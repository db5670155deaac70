#include "diffuscope/measures.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "diffuscope/error.hpp"

namespace diffuscope {

namespace detail {

void normalize_probabilities(std::vector<double>& probs, const char* what) {
  if (probs.empty()) throw Error(Errc::EmptySupport, std::string(what) + " is empty");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p)) throw Error(Errc::NonFinite, std::string(what) + " has a non-finite entry");
    if (p < 0.0) throw Error(Errc::NegativeCount, std::string(what) + " has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(Errc::NotNormalized,
                std::string(what) + " sums to " + std::to_string(total) + ", expected 1");
  }
  for (double& p : probs) p /= total;
}

}  // namespace detail

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> coords,
                                   std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) throw Error(Errc::DimensionMismatch, "dimension must be positive");
  if (weights_.empty()) throw Error(Errc::EmptySupport, "measure needs at least one point");
  if (coords_.size() != dim_ * weights_.size()) {
    throw Error(Errc::DimensionMismatch, "coordinate count does not match dim * weights");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) throw Error(Errc::NonFinite, "non-finite coordinate");
  }
  detail::normalize_probabilities(weights_, "weights");
}

EmpiricalMeasure EmpiricalMeasure::translated(std::span<const double> shift) const {
  if (shift.size() != dim_) throw Error(Errc::DimensionMismatch, "shift dimension");
  std::vector<double> moved = coords_;
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += shift[i % dim_];
  return EmpiricalMeasure(dim_, std::move(moved), weights_);
}

EmpiricalMeasure EmpiricalMeasure::scaled(double factor) const {
  std::vector<double> moved = coords_;
  for (double& c : moved) c *= factor;
  return EmpiricalMeasure(dim_, std::move(moved), weights_);
}

EmpiricalMeasure weighted_empirical(const std::vector<std::vector<double>>& points,
                                    std::vector<double> weights) {
  if (points.empty()) throw Error(Errc::EmptySupport, "no points");
  if (points.size() != weights.size()) throw Error(Errc::LengthMismatch, "one weight per point");
  const std::size_t dim = points.front().size();
  std::vector<double> coords;
  coords.reserve(points.size() * dim);
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(Errc::DimensionMismatch, "points have mixed dimensions");
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return EmpiricalMeasure(dim, std::move(coords), std::move(weights));
}

EmpiricalMeasure uniform_empirical(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw Error(Errc::EmptySupport, "no points");
  return weighted_empirical(points,
                            std::vector<double>(points.size(), 1.0 / static_cast<double>(points.size())));
}

VertexDistribution::VertexDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  detail::normalize_probabilities(probs_, "distribution");
}

VertexDistribution point_mass(std::size_t index, std::size_t n) {
  if (index >= n) {
    throw Error(Errc::IndexOutOfRange,
                "node " + std::to_string(index) + " out of range for " + std::to_string(n) + " nodes");
  }
  std::vector<double> probs(n, 0.0);
  probs[index] = 1.0;
  return VertexDistribution(std::move(probs));
}

VertexDistribution uniform_distribution(std::size_t n) {
  if (n == 0) throw Error(Errc::EmptySupport, "no nodes");
  return VertexDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

VertexDistribution frequency_distribution(std::span<const double> counts) {
  if (counts.empty()) throw Error(Errc::EmptySupport, "no counts");
  double total = 0.0;
  for (double c : counts) {
    if (!std::isfinite(c)) throw Error(Errc::NonFinite, "non-finite count");
    if (c < 0.0) throw Error(Errc::NegativeCount, "negative count");
    total += c;
  }
  if (total <= 0.0) throw Error(Errc::ZeroTotal, "counts sum to zero");
  std::vector<double> probs(counts.begin(), counts.end());
  for (double& p : probs) p /= total;
  return VertexDistribution(std::move(probs));
}

}  // namespace diffuscope
