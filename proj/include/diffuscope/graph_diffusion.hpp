#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diffuscope/measures.hpp"

namespace diffuscope::graph {

struct Edge {
  std::size_t i;
  std::size_t j;
  double w;
};

/// Undirected weighted network: symmetric, nonnegative, zero diagonal.
class WeightedNetwork {
 public:
  WeightedNetwork(std::vector<std::string> labels, Eigen::MatrixXd weights);

  /// Builds from an edge list; rejects self-loops, repeated pairs and
  /// nonpositive or non-finite weights.
  static WeightedNetwork from_edges(std::vector<std::string> labels, const std::vector<Edge>& edges);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }

  /// Positive-weight edges with i < j in row-major order.
  std::vector<Edge> edges() const;

  /// True when every node is reachable through positive-weight edges.
  bool is_connected() const;

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd weights_;
};

/// Delta = D - W.
Eigen::MatrixXd laplacian(const WeightedNetwork& net);

/// Eigenpairs of the Laplacian in nondecreasing order. Eigenvalues below
/// 1e-10 max(1, lambda_n) are snapped to zero; with a single zero eigenvalue
/// its eigenvector is replaced by the exact constant vector 1/sqrt(n).
class SpectralDecomposition {
 public:
  SpectralDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
                        std::size_t zero_count);

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  /// Column k is phi_k.
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  std::size_t zero_count() const noexcept { return zero_count_; }
  bool connected() const noexcept { return zero_count_ == 1; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  std::size_t zero_count_;
};

SpectralDecomposition spectrum(const WeightedNetwork& net);

/// e^{-t Delta} = sum_k e^{-lambda_k t} phi_k phi_k^T.
Eigen::MatrixXd heat_kernel_matrix(const SpectralDecomposition& spec, double t);

/// Tr e^{-t Delta} = sum_k e^{-lambda_k t}.
double heat_trace(const SpectralDecomposition& spec, double t);

/// d_t^2(i, j) = sum_k e^{-2 lambda_k t} (phi_k(i) - phi_k(j))^2.
double diffusion_distance_sq(const SpectralDecomposition& spec, std::size_t i, std::size_t j,
                             double t);
double diffusion_distance(const SpectralDecomposition& spec, std::size_t i, std::size_t j, double t);

/// All pairwise d_t^2 values.
Eigen::MatrixXd diffusion_distance_sq_table(const SpectralDecomposition& spec, double t);

struct DiffusionFrechetVector {
  std::vector<double> values;
  double t;
};

/// F_{xi,t}(i) = sum_j d_t^2(i, j) xi_j.
DiffusionFrechetVector dfv(const SpectralDecomposition& spec, const VertexDistribution& xi, double t);
DiffusionFrechetVector dfv(const Eigen::MatrixXd& distance_sq_table, const VertexDistribution& xi,
                           double t);

/// Commute-time distance; requires a connected network.
double commute_time_distance(const SpectralDecomposition& spec, std::size_t i, std::size_t j);
Eigen::MatrixXd commute_time_table(const SpectralDecomposition& spec);

}  // namespace diffuscope::graph
