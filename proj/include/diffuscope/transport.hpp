#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "diffuscope/graph_diffusion.hpp"
#include "diffuscope/measures.hpp"

namespace diffuscope::transport {

/// Joint distribution on a product of two finite supports.
struct Coupling {
  Eigen::MatrixXd matrix;
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;

  /// Largest absolute deviation of the row/column sums from the marginals.
  double marginal_error() const;
};

struct TransportResult {
  double cost = 0.0;        // W_p
  double p = 1.0;
  Coupling plan;
  double primal_value = 0.0;  // sum mu_ij c_ij, i.e. W_p^p
  double dual_value = 0.0;    // certified lower bound from a feasible dual
  std::size_t pivots = 0;

  double duality_gap() const { return primal_value - dual_value; }
};

/// Solves min sum mu_ij cost_ij over couplings of (supply, demand) with the
/// transportation simplex. Both marginals must be probability vectors of
/// matching total mass. Returns the raw linear-program optimum in
/// primal_value; cost is filled with primal_value^{1/p}.
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const Eigen::MatrixXd& cost, double p = 1.0);

/// W_p between two finite measures under a ground distance matrix.
TransportResult wasserstein(std::span<const double> a, std::span<const double> b,
                            const Eigen::MatrixXd& distance, double p);

TransportResult wasserstein_euclidean(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p);

/// W_p on a connected network with the commute-time base metric.
TransportResult wasserstein_network(const graph::SpectralDecomposition& spec,
                                    const VertexDistribution& xi, const VertexDistribution& zeta,
                                    double p);

Eigen::MatrixXd euclidean_distance_matrix(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

}  // namespace diffuscope::transport
