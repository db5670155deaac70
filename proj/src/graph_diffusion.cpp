#include "diffuscope/graph_diffusion.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "diffuscope/error.hpp"

namespace diffuscope::graph {

namespace {

void require_node(const SpectralDecomposition& spec, std::size_t i) {
  if (i >= spec.size()) {
    throw Error(Errc::IndexOutOfRange, "node " + std::to_string(i) + " out of range for " +
                                           std::to_string(spec.size()) + " nodes");
  }
}

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(Errc::InvalidScale, "t must be positive and finite, got " + std::to_string(t));
  }
}

// Pairwise squared distances between the rows of an embedding.
Eigen::MatrixXd pairwise_sq(const Eigen::MatrixXd& embedding) {
  const Eigen::Index n = embedding.rows();
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(n, n);
  if (n <= 512) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = (embedding.row(i) - embedding.row(j)).squaredNorm();
        table(i, j) = v;
        table(j, i) = v;
      }
    }
    return table;
  }
  const Eigen::MatrixXd gram = embedding * embedding.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::max(0.0, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
      table(i, j) = v;
      table(j, i) = v;
    }
  }
  return table;
}

}  // namespace

WeightedNetwork::WeightedNetwork(std::vector<std::string> labels, Eigen::MatrixXd weights)
    : labels_(std::move(labels)), weights_(std::move(weights)) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (n == 0) throw Error(Errc::InvalidNetwork, "network needs at least one node");
  if (weights_.rows() != n || weights_.cols() != n) {
    throw Error(Errc::InvalidNetwork, "weight matrix must be n x n with one label per node");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights_(i, i) != 0.0) throw Error(Errc::InvalidNetwork, "diagonal weights must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(Errc::InvalidNetwork, "weights must be finite and nonnegative");
      }
      if (std::abs(w - weights_(j, i)) > 1e-12) {
        throw Error(Errc::InvalidNetwork, "weight matrix is not symmetric");
      }
    }
  }
  // exact symmetry from here on
  weights_ = 0.5 * (weights_ + weights_.transpose()).eval();
}

WeightedNetwork WeightedNetwork::from_edges(std::vector<std::string> labels,
                                            const std::vector<Edge>& edges) {
  const std::size_t n = labels.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Edge& e : edges) {
    if (e.i >= n || e.j >= n) throw Error(Errc::InvalidNetwork, "edge endpoint out of range");
    if (e.i == e.j) throw Error(Errc::InvalidNetwork, "self-loop at node " + std::to_string(e.i));
    if (!std::isfinite(e.w) || !(e.w > 0.0)) {
      throw Error(Errc::InvalidNetwork, "edge weights must be positive and finite");
    }
    const auto key = std::minmax(e.i, e.j);
    if (!seen.insert(key).second) {
      throw Error(Errc::InvalidNetwork, "duplicate edge " + std::to_string(key.first) + "-" +
                                            std::to_string(key.second));
    }
    w(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.w;
    w(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.w;
  }
  return WeightedNetwork(std::move(labels), std::move(w));
}

std::vector<Edge> WeightedNetwork::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      const double w = weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w > 0.0) out.push_back({i, j, w});
    }
  }
  return out;
}

bool WeightedNetwork::is_connected() const {
  const std::size_t n = size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      if (!seen[v] && weights_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0.0) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

Eigen::MatrixXd laplacian(const WeightedNetwork& net) {
  const Eigen::MatrixXd& w = net.weights();
  Eigen::MatrixXd delta = -w;
  delta.diagonal() = w.rowwise().sum();
  return delta;
}

SpectralDecomposition::SpectralDecomposition(Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors, std::size_t zero_count)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      zero_count_(zero_count) {}

SpectralDecomposition spectrum(const WeightedNetwork& net) {
  const Eigen::MatrixXd delta = laplacian(net);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(delta);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::EigenSolverFailure, "symmetric eigensolver did not converge");
  }
  Eigen::VectorXd values = solver.eigenvalues();
  Eigen::MatrixXd vectors = solver.eigenvectors();
  const Eigen::Index n = values.size();
  const double cutoff = 1e-10 * std::max(1.0, values(n - 1));
  std::size_t zeros = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (values(k) < cutoff) {
      values(k) = 0.0;
      ++zeros;
    }
  }
  if (zeros == 1) {
    vectors.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  }
  return SpectralDecomposition(std::move(values), std::move(vectors), zeros);
}

Eigen::MatrixXd heat_kernel_matrix(const SpectralDecomposition& spec, double t) {
  require_time(t);
  const Eigen::VectorXd decay = (-t * spec.eigenvalues().array()).exp().matrix();
  const Eigen::MatrixXd& phi = spec.eigenvectors();
  return phi * decay.asDiagonal() * phi.transpose();
}

double heat_trace(const SpectralDecomposition& spec, double t) {
  require_time(t);
  return (-t * spec.eigenvalues().array()).exp().sum();
}

double diffusion_distance_sq(const SpectralDecomposition& spec, std::size_t i, std::size_t j,
                             double t) {
  require_node(spec, i);
  require_node(spec, j);
  require_time(t);
  if (i == j) return 0.0;
  const Eigen::MatrixXd& phi = spec.eigenvectors();
  double total = 0.0;
  for (Eigen::Index k = 0; k < phi.cols(); ++k) {
    const double diff = phi(static_cast<Eigen::Index>(i), k) - phi(static_cast<Eigen::Index>(j), k);
    total += std::exp(-2.0 * spec.eigenvalues()(k) * t) * diff * diff;
  }
  return total;
}

double diffusion_distance(const SpectralDecomposition& spec, std::size_t i, std::size_t j, double t) {
  return std::sqrt(diffusion_distance_sq(spec, i, j, t));
}

Eigen::MatrixXd diffusion_distance_sq_table(const SpectralDecomposition& spec, double t) {
  require_time(t);
  const Eigen::VectorXd decay = (-t * spec.eigenvalues().array()).exp().matrix();
  return pairwise_sq(spec.eigenvectors() * decay.asDiagonal());
}

DiffusionFrechetVector dfv(const Eigen::MatrixXd& distance_sq_table, const VertexDistribution& xi,
                           double t) {
  if (static_cast<Eigen::Index>(xi.size()) != distance_sq_table.rows()) {
    throw Error(Errc::LengthMismatch, "distribution has " + std::to_string(xi.size()) +
                                          " entries, network has " +
                                          std::to_string(distance_sq_table.rows()) + " nodes");
  }
  const Eigen::Map<const Eigen::VectorXd> probs(xi.probs().data(),
                                                static_cast<Eigen::Index>(xi.size()));
  const Eigen::VectorXd values = distance_sq_table * probs;
  return {std::vector<double>(values.data(), values.data() + values.size()), t};
}

DiffusionFrechetVector dfv(const SpectralDecomposition& spec, const VertexDistribution& xi, double t) {
  if (xi.size() != spec.size()) {
    throw Error(Errc::LengthMismatch, "distribution has " + std::to_string(xi.size()) +
                                          " entries, network has " + std::to_string(spec.size()) +
                                          " nodes");
  }
  return dfv(diffusion_distance_sq_table(spec, t), xi, t);
}

double commute_time_distance(const SpectralDecomposition& spec, std::size_t i, std::size_t j) {
  require_node(spec, i);
  require_node(spec, j);
  if (!spec.connected()) {
    throw Error(Errc::DisconnectedNetwork, "commute-time distance needs a connected network");
  }
  if (i == j) return 0.0;
  const Eigen::MatrixXd& phi = spec.eigenvectors();
  double total = 0.0;
  for (Eigen::Index k = 1; k < phi.cols(); ++k) {
    const double diff = phi(static_cast<Eigen::Index>(i), k) - phi(static_cast<Eigen::Index>(j), k);
    total += diff * diff / spec.eigenvalues()(k);
  }
  return std::sqrt(total);
}

Eigen::MatrixXd commute_time_table(const SpectralDecomposition& spec) {
  if (!spec.connected()) {
    throw Error(Errc::DisconnectedNetwork, "commute-time distance needs a connected network");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(spec.size());
  Eigen::MatrixXd embedding = spec.eigenvectors().rightCols(n - 1);
  for (Eigen::Index k = 0; k < n - 1; ++k) {
    embedding.col(k) /= std::sqrt(spec.eigenvalues()(k + 1));
  }
  return pairwise_sq(embedding).cwiseSqrt();
}

}  // namespace diffuscope::graph
