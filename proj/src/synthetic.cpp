#include "diffuscope/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "diffuscope/error.hpp"
#include "diffuscope/stability.hpp"

namespace diffuscope::synthetic {

std::vector<double> gaussian_blobs(const std::vector<double>& centers, std::size_t dim,
                                   std::size_t per_blob, double sigma, std::uint64_t seed) {
  if (dim == 0 || centers.empty() || centers.size() % dim != 0) {
    throw Error(Errc::DimensionMismatch, "centers must be a nonempty multiple of dim");
  }
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> coords;
  coords.reserve(centers.size() * per_blob);
  for (std::size_t b = 0; b < centers.size() / dim; ++b)
    for (std::size_t i = 0; i < per_blob; ++i)
      for (std::size_t k = 0; k < dim; ++k) coords.push_back(centers[b * dim + k] + normal(engine));
  return coords;
}

PlantedBenchmark::PlantedBenchmark(PlantedConfig config, std::uint64_t seed)
    : config_(config), seed_(seed) {
  if (config_.communities < 2 || config_.community_size < 1) {
    throw Error(Errc::InvalidArgument, "planted benchmark needs >= 2 communities");
  }
}

std::vector<double> PlantedBenchmark::sample(int label) {
  std::mt19937_64 engine(stability::derive_seed(seed_, 0x51a7ed, counter_++));
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t c_count = config_.communities, size = config_.community_size;
  std::vector<double> totals(c_count);
  double z = 0.0;
  for (std::size_t c = 0; c < c_count; ++c) {
    double logit = config_.community_noise * normal(engine);
    if (label == 1) {
      if (c == 0) logit += config_.shift;
      if (c == 1) logit -= config_.shift;
    }
    totals[c] = std::exp(logit);
    z += totals[c];
  }
  std::vector<double> counts(c_count * size);
  for (std::size_t c = 0; c < c_count; ++c) {
    std::vector<double> share(size);
    double s = 0.0;
    for (double& v : share) {
      v = std::exp(config_.within_noise * normal(engine));
      s += v;
    }
    for (std::size_t i = 0; i < size; ++i) {
      counts[c * size + i] = std::round(config_.depth * totals[c] / z * share[i] / s);
    }
  }
  return counts;
}

namespace {

std::vector<std::string> taxon_labels(std::size_t communities, std::size_t size) {
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < communities; ++c)
    for (std::size_t i = 0; i < size; ++i)
      labels.push_back("c" + std::to_string(c) + "_t" + std::to_string(i));
  return labels;
}

}  // namespace

cooccurrence::AbundanceTable PlantedBenchmark::reference(std::size_t samples) {
  Eigen::MatrixXd counts(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(taxa()));
  for (std::size_t r = 0; r < samples; ++r) {
    const auto row = sample(0);
    for (std::size_t k = 0; k < row.size(); ++k) counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k];
  }
  return {taxon_labels(config_.communities, config_.community_size), std::move(counts)};
}

PlantedDraw PlantedBenchmark::draw(std::size_t per_class) {
  Eigen::MatrixXd counts(static_cast<Eigen::Index>(2 * per_class), static_cast<Eigen::Index>(taxa()));
  std::vector<int> labels;
  for (std::size_t r = 0; r < 2 * per_class; ++r) {
    const int label = r < per_class ? 0 : 1;
    const auto row = sample(label);
    for (std::size_t k = 0; k < row.size(); ++k) counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k];
    labels.push_back(label);
  }
  return {cooccurrence::AbundanceTable(taxon_labels(config_.communities, config_.community_size),
                                       std::move(counts)),
          std::move(labels)};
}

}  // namespace diffuscope::synthetic
