#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "diffuscope/cooccurrence.hpp"

// Seeded synthetic datasets used by the CLI demos and the acceptance suite.
namespace diffuscope::synthetic {

/// Isotropic Gaussian blobs; `centers` is row-major with `dim` columns.
/// Returns row-major coordinates, blob by blob.
std::vector<double> gaussian_blobs(const std::vector<double>& centers, std::size_t dim,
                                   std::size_t per_blob, double sigma, std::uint64_t seed);

struct PlantedConfig {
  std::size_t communities = 4;
  std::size_t community_size = 6;
  double community_noise = 0.8;  // sd of community log-abundance
  double within_noise = 0.5;     // sd of within-community log-share
  double shift = 1.0;            // class-1 log-abundance shift, +/- on two communities
  double depth = 10000.0;        // reads per sample
  // Diffusion time that damps the within-community modes of the estimated
  // network (eigenvalues above ~1) while keeping the community modes.
  double planted_scale = 4.0;
};

struct PlantedDraw {
  cooccurrence::AbundanceTable table;
  std::vector<int> labels;
};

/// Two-class abundance data whose class difference lives in community
/// totals (low graph frequencies) while within-community shares carry
/// class-independent noise.
class PlantedBenchmark {
 public:
  PlantedBenchmark(PlantedConfig config, std::uint64_t seed);

  const PlantedConfig& config() const noexcept { return config_; }
  std::size_t taxa() const noexcept { return config_.communities * config_.community_size; }

  /// Healthy-only samples for estimating the co-occurrence network.
  cooccurrence::AbundanceTable reference(std::size_t samples);
  PlantedDraw draw(std::size_t per_class);

 private:
  std::vector<double> sample(int label);

  PlantedConfig config_;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace diffuscope::synthetic
