#include "diffuscope/cooccurrence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "diffuscope/error.hpp"
#include "diffuscope/parallel.hpp"

namespace diffuscope::cooccurrence {

AbundanceTable::AbundanceTable(std::vector<std::string> taxa, Eigen::MatrixXd counts)
    : taxa_(std::move(taxa)), counts_(std::move(counts)) {
  if (taxa_.empty()) throw Error(Errc::InvalidTable, "table has no taxa");
  if (counts_.cols() != static_cast<Eigen::Index>(taxa_.size())) {
    throw Error(Errc::InvalidTable, "one count column per taxon required");
  }
  if (counts_.rows() < 3) throw Error(Errc::InvalidTable, "at least 3 samples required");
  if (!counts_.allFinite()) throw Error(Errc::NonFinite, "non-finite count");
  if ((counts_.array() < 0.0).any()) throw Error(Errc::NegativeCount, "negative count");
  for (Eigen::Index j = 0; j < counts_.cols(); ++j) {
    if (counts_.col(j).sum() <= 0.0) {
      throw Error(Errc::InvalidTable, "taxon '" + taxa_[static_cast<std::size_t>(j)] +
                                          "' is absent from every sample");
    }
  }
}

AbundanceTable AbundanceTable::select_rows(const std::vector<std::size_t>& rows) const {
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), counts_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= samples()) throw Error(Errc::IndexOutOfRange, "sample row out of range");
    sub.row(static_cast<Eigen::Index>(r)) = counts_.row(static_cast<Eigen::Index>(rows[r]));
  }
  return AbundanceTable(taxa_, std::move(sub));
}

graph::WeightedNetwork correlation_network(const AbundanceTable& table) {
  const Eigen::MatrixXd& x = table.counts();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::VectorXd scale = centered.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale(j) > 0.0)) {
      throw Error(Errc::ZeroVarianceColumn,
                  "taxon '" + table.taxa()[static_cast<std::size_t>(j)] + "' has zero variance");
    }
  }
  const Eigen::MatrixXd normalized = centered * scale.cwiseInverse().asDiagonal();
  Eigen::MatrixXd w = (normalized.transpose() * normalized).cwiseAbs();
  w = w.cwiseMin(1.0);
  w.diagonal().setZero();
  w = 0.5 * (w + w.transpose()).eval();
  return graph::WeightedNetwork(table.taxa(), std::move(w));
}

Eigen::MatrixXd lans_fractions(const graph::WeightedNetwork& net, bool exclude_self) {
  const std::size_t n = net.size();
  const Eigen::MatrixXd& w = net.weights();
  Eigen::MatrixXd fractions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double denom = exclude_self ? static_cast<double>(n - 1) : static_cast<double>(n);
  parallel_for(n, [&](std::size_t i) {
    const auto I = static_cast<Eigen::Index>(i);
    std::vector<double> row;
    row.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (exclude_self && k == i) continue;
      row.push_back(w(I, static_cast<Eigen::Index>(k)));
    }
    std::sort(row.begin(), row.end());
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = w(I, static_cast<Eigen::Index>(j));
      const auto at_most = std::upper_bound(row.begin(), row.end(), wij) - row.begin();
      fractions(I, static_cast<Eigen::Index>(j)) = denom > 0.0 ? static_cast<double>(at_most) / denom : 0.0;
    }
  });
  return fractions;
}

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

std::pair<graph::WeightedNetwork, LansDecision> lans_sparsify(const graph::WeightedNetwork& net,
                                                              const LansOptions& options) {
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) {
    throw Error(Errc::InvalidArgument, "LANS alpha must lie in [0, 1], got " + std::to_string(options.alpha));
  }
  const std::size_t n = net.size();
  const auto N = static_cast<Eigen::Index>(n);
  LansDecision decision;
  decision.alpha = options.alpha;
  decision.fractions = lans_fractions(net, options.exclude_self);
  decision.kept.setConstant(N, N, false);

  const Eigen::MatrixXd& w = net.weights();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
  DisjointSets components(n);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      if (!(w(i, j) > 0.0)) continue;
      const bool keep = 1.0 - decision.fractions(i, j) < options.alpha ||
                        1.0 - decision.fractions(j, i) < options.alpha;
      if (!keep) continue;
      decision.kept(i, j) = decision.kept(j, i) = true;
      out(i, j) = out(j, i) = w(i, j);
      components.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }

  // Maximum-weight spanning forest over the remaining edges.
  std::vector<graph::Edge> candidates;
  for (const graph::Edge& e : net.edges()) {
    if (!decision.kept(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j))) {
      candidates.push_back(e);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const graph::Edge& a, const graph::Edge& b) { return a.w > b.w; });
  for (const graph::Edge& e : candidates) {
    if (components.unite(e.i, e.j)) {
      decision.repaired.push_back(e);
      out(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.w;
      out(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.w;
    }
  }
  return {graph::WeightedNetwork(net.labels(), std::move(out)), std::move(decision)};
}

graph::WeightedNetwork build_pipeline(const AbundanceTable& table, const LansOptions& options) {
  return lans_sparsify(correlation_network(table), options).first;
}

}  // namespace diffuscope::cooccurrence
