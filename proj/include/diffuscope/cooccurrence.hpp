#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diffuscope/graph_diffusion.hpp"

namespace diffuscope::cooccurrence {

/// Samples x taxa count matrix with taxon labels.
class AbundanceTable {
 public:
  /// Requires m >= 3 samples, finite nonnegative counts and no taxon that is
  /// zero in every sample.
  AbundanceTable(std::vector<std::string> taxa, Eigen::MatrixXd counts);

  const std::vector<std::string>& taxa() const noexcept { return taxa_; }
  const Eigen::MatrixXd& counts() const noexcept { return counts_; }
  std::size_t samples() const noexcept { return static_cast<std::size_t>(counts_.rows()); }
  std::size_t taxon_count() const noexcept { return taxa_.size(); }

  /// Table restricted to the given sample rows.
  AbundanceTable select_rows(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<std::string> taxa_;
  Eigen::MatrixXd counts_;
};

/// w_ij = |Pearson correlation of columns i and j| on raw counts.
graph::WeightedNetwork correlation_network(const AbundanceTable& table);

struct LansOptions {
  double alpha = 0.1;
  /// Drop the k = i term (and use n - 1 as the denominator) in F_ij.
  bool exclude_self = false;
};

struct LansDecision {
  Eigen::MatrixXd fractions;  // F_ij
  double alpha = 0.0;
  /// Edges kept by the rule itself, before connectivity repair.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> kept;
  /// Edges added back to reconnect the network.
  std::vector<graph::Edge> repaired;
};

/// F_ij = (1/n) sum_k 1{w_ik <= w_ij}, summing over every k including i and j.
Eigen::MatrixXd lans_fractions(const graph::WeightedNetwork& net, bool exclude_self = false);

/// Keeps edge (i, j) when 1 - F_ij < alpha or 1 - F_ji < alpha, then adds the
/// heaviest edges joining distinct components until the kept graph has the
/// same connectivity as the input.
std::pair<graph::WeightedNetwork, LansDecision> lans_sparsify(const graph::WeightedNetwork& net,
                                                              const LansOptions& options);

graph::WeightedNetwork build_pipeline(const AbundanceTable& table, const LansOptions& options);

}  // namespace diffuscope::cooccurrence
