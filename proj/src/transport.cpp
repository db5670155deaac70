#include "diffuscope/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "diffuscope/error.hpp"

namespace diffuscope::transport {

namespace {

constexpr std::size_t kDegenerateStreakForBland = 20;
constexpr std::size_t kMaxPivots = 50'000'000;

// Transportation simplex on a spanning-tree basis. Nodes 0..m-1 are sources,
// m..m+n-1 are sinks; each basic cell is a tree edge.
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   const Eigen::MatrixXd& cost)
      : m_(supply.size()),
        n_(demand.size()),
        supply_(supply),
        demand_(demand),
        cost_(cost),
        adjacency_(m_ + n_),
        basic_(m_ * n_, 0),
        u_(m_),
        v_(n_),
        known_(m_ + n_) {
    double cmax = 0.0;
    for (Eigen::Index i = 0; i < cost.rows(); ++i)
      for (Eigen::Index j = 0; j < cost.cols(); ++j) cmax = std::max(cmax, std::abs(cost(i, j)));
    eps_ = 1e-12 * std::max(1.0, cmax);
    block_rows_ = std::max<std::size_t>(1, (m_ + 7) / 8);
  }

  void solve() {
    northwest_corner();
    compute_potentials();
    std::size_t degenerate_streak = 0;
    for (;;) {
      const bool bland = degenerate_streak >= kDegenerateStreakForBland;
      std::size_t ei = 0, ej = 0;
      if (!find_entering(bland, ei, ej)) break;
      const bool degenerate = pivot(ei, ej);
      degenerate_streak = degenerate ? degenerate_streak + 1 : 0;
      compute_potentials();
      if (++pivots_ > kMaxPivots) throw Error(Errc::SolverFailure, "pivot limit exceeded");
    }
  }

  TransportResult result(double p) const {
    TransportResult r;
    r.p = p;
    r.pivots = pivots_;
    r.plan.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
    r.plan.row_marginal.assign(supply_.begin(), supply_.end());
    r.plan.col_marginal.assign(demand_.begin(), demand_.end());
    double primal = 0.0;
    for (const Cell& c : cells_) {
      r.plan.matrix(static_cast<Eigen::Index>(c.i), static_cast<Eigen::Index>(c.j)) += c.x;
      primal += c.x * cost(c.i, c.j);
    }
    // Shift sink potentials to the tightest feasible values so the dual
    // objective is a genuine lower bound.
    double dual = 0.0;
    for (std::size_t i = 0; i < m_; ++i) dual += supply_[i] * u_[i];
    for (std::size_t j = 0; j < n_; ++j) {
      double vj = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) vj = std::min(vj, cost(i, j) - u_[i]);
      dual += demand_[j] * vj;
    }
    r.primal_value = std::max(0.0, primal);
    r.dual_value = dual;
    r.cost = std::pow(r.primal_value, 1.0 / p);
    return r;
  }

 private:
  struct Cell {
    std::size_t i;
    std::size_t j;
    double x;
  };

  double cost(std::size_t i, std::size_t j) const {
    return cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  void add_cell(std::size_t i, std::size_t j, double x) {
    const int slot = static_cast<int>(cells_.size());
    cells_.push_back({i, j, x});
    adjacency_[i].push_back(slot);
    adjacency_[m_ + j].push_back(slot);
    basic_[i * n_ + j] = 1;
  }

  void northwest_corner() {
    std::size_t i = 0, j = 0;
    double ra = supply_[0], rb = demand_[0];
    for (;;) {
      const double q = std::min(ra, rb);
      add_cell(i, j, std::max(0.0, q));
      ra -= q;
      rb -= q;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        rb = demand_[++j];
      } else if (j == n_ - 1) {
        ra = supply_[++i];
      } else if (ra <= rb) {
        ra = supply_[++i];
      } else {
        rb = demand_[++j];
      }
    }
  }

  void compute_potentials() {
    std::fill(known_.begin(), known_.end(), 0);
    stack_.clear();
    u_[0] = 0.0;
    known_[0] = 1;
    stack_.push_back(0);
    while (!stack_.empty()) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      for (int slot : adjacency_[node]) {
        const Cell& c = cells_[static_cast<std::size_t>(slot)];
        if (node < m_) {
          if (!known_[m_ + c.j]) {
            v_[c.j] = cost(c.i, c.j) - u_[c.i];
            known_[m_ + c.j] = 1;
            stack_.push_back(m_ + c.j);
          }
        } else if (!known_[c.i]) {
          u_[c.i] = cost(c.i, c.j) - v_[c.j];
          known_[c.i] = 1;
          stack_.push_back(c.i);
        }
      }
    }
  }

  double reduced(std::size_t i, std::size_t j) const { return cost(i, j) - u_[i] - v_[j]; }

  bool find_entering(bool bland, std::size_t& ei, std::size_t& ej) {
    if (bland) {
      for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          if (!basic_[i * n_ + j] && reduced(i, j) < -eps_) {
            ei = i;
            ej = j;
            return true;
          }
      return false;
    }
    // Partial pricing: most negative reduced cost in the first row block
    // (round-robin) that has one.
    const std::size_t blocks = (m_ + block_rows_ - 1) / block_rows_;
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t block = (next_block_ + b) % blocks;
      const std::size_t lo = block * block_rows_;
      const std::size_t hi = std::min(m_, lo + block_rows_);
      double best = -eps_;
      bool found = false;
      for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          if (basic_[i * n_ + j]) continue;
          const double r = reduced(i, j);
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
            found = true;
          }
        }
      if (found) {
        next_block_ = (block + 1) % blocks;
        return true;
      }
    }
    return false;
  }

  // Returns true when the pivot moved zero mass.
  bool pivot(std::size_t ei, std::size_t ej) {
    // Tree path from source ei to sink ej.
    const std::size_t target = m_ + ej;
    parent_slot_.assign(m_ + n_, -1);
    std::fill(known_.begin(), known_.end(), 0);
    stack_.clear();
    stack_.push_back(ei);
    known_[ei] = 1;
    while (!stack_.empty() && !known_[target]) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      for (int slot : adjacency_[node]) {
        const Cell& c = cells_[static_cast<std::size_t>(slot)];
        const std::size_t other = node < m_ ? m_ + c.j : c.i;
        if (!known_[other]) {
          known_[other] = 1;
          parent_slot_[other] = slot;
          stack_.push_back(other);
        }
      }
    }
    if (!known_[target]) throw Error(Errc::SolverFailure, "basis is not a spanning tree");

    // Walk back from the sink; the first edge loses mass, then alternate.
    path_.clear();
    std::size_t node = target;
    while (node != ei) {
      const int slot = parent_slot_[node];
      path_.push_back(slot);
      const Cell& c = cells_[static_cast<std::size_t>(slot)];
      node = node < m_ ? m_ + c.j : c.i;
    }
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path_.size(); k += 2) {
      theta = std::min(theta, cells_[static_cast<std::size_t>(path_[k])].x);
    }
    int leaving = -1;
    std::size_t leaving_index = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < path_.size(); k += 2) {
      const Cell& c = cells_[static_cast<std::size_t>(path_[k])];
      const std::size_t index = c.i * n_ + c.j;
      if (c.x == theta && index < leaving_index) {
        leaving = path_[k];
        leaving_index = index;
      }
    }
    for (std::size_t k = 0; k < path_.size(); ++k) {
      Cell& c = cells_[static_cast<std::size_t>(path_[k])];
      c.x = (k % 2 == 0) ? std::max(0.0, c.x - theta) : c.x + theta;
    }

    Cell& out = cells_[static_cast<std::size_t>(leaving)];
    auto detach = [&](std::size_t nd) {
      auto& list = adjacency_[nd];
      list.erase(std::find(list.begin(), list.end(), leaving));
    };
    detach(out.i);
    detach(m_ + out.j);
    basic_[out.i * n_ + out.j] = 0;
    out = {ei, ej, theta};
    adjacency_[ei].push_back(leaving);
    adjacency_[m_ + ej].push_back(leaving);
    basic_[ei * n_ + ej] = 1;
    return theta <= 0.0;
  }

  std::size_t m_, n_;
  std::span<const double> supply_, demand_;
  const Eigen::MatrixXd& cost_;
  std::vector<Cell> cells_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<char> basic_;
  std::vector<double> u_, v_;
  std::vector<char> known_;
  std::vector<std::size_t> stack_;
  std::vector<int> parent_slot_;
  std::vector<int> path_;
  double eps_ = 0.0;
  std::size_t block_rows_ = 1;
  std::size_t next_block_ = 0;
  std::size_t pivots_ = 0;
};

void check_marginal(std::span<const double> w, const char* what) {
  if (w.empty()) throw Error(Errc::EmptySupport, std::string(what) + " is empty");
  double total = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(Errc::InvalidArgument, std::string(what) + " must be finite and nonnegative");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(Errc::NotNormalized, std::string(what) + " does not sum to one");
  }
}

void check_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(Errc::InvalidOrder, "Wasserstein order p must be >= 1, got " + std::to_string(p));
  }
}

}  // namespace

double Coupling::marginal_error() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    worst = std::max(worst, std::abs(matrix.row(i).sum() - row_marginal[static_cast<std::size_t>(i)]));
  }
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    worst = std::max(worst, std::abs(matrix.col(j).sum() - col_marginal[static_cast<std::size_t>(j)]));
  }
  return worst;
}

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const Eigen::MatrixXd& cost, double p) {
  check_marginal(supply, "source marginal");
  check_marginal(demand, "target marginal");
  check_order(p);
  if (cost.rows() != static_cast<Eigen::Index>(supply.size()) ||
      cost.cols() != static_cast<Eigen::Index>(demand.size())) {
    throw Error(Errc::LengthMismatch, "cost matrix shape does not match the marginals");
  }
  if (!cost.allFinite()) throw Error(Errc::NonFinite, "cost matrix has non-finite entries");
  TransportSimplex simplex(supply, demand, cost);
  simplex.solve();
  return simplex.result(p);
}

TransportResult wasserstein(std::span<const double> a, std::span<const double> b,
                            const Eigen::MatrixXd& distance, double p) {
  check_order(p);
  const Eigen::MatrixXd cost = p == 1.0 ? distance : distance.array().pow(p).matrix();
  return solve_transport(a, b, cost, p);
}

Eigen::MatrixXd euclidean_distance_matrix(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.dim() != b.dim()) throw Error(Errc::DimensionMismatch, "measures of different dimension");
  Eigen::MatrixXd dist(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a.point(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto y = b.point(j);
      double r2 = 0.0;
      for (std::size_t k = 0; k < a.dim(); ++k) r2 += (x[k] - y[k]) * (x[k] - y[k]);
      dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::sqrt(r2);
    }
  }
  return dist;
}

TransportResult wasserstein_euclidean(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  check_order(p);
  return wasserstein(a.weights(), b.weights(), euclidean_distance_matrix(a, b), p);
}

TransportResult wasserstein_network(const graph::SpectralDecomposition& spec,
                                    const VertexDistribution& xi, const VertexDistribution& zeta,
                                    double p) {
  check_order(p);
  if (xi.size() != spec.size() || zeta.size() != spec.size()) {
    throw Error(Errc::LengthMismatch, "distributions must have one entry per node");
  }
  return wasserstein(xi.probs(), zeta.probs(), graph::commute_time_table(spec), p);
}

}  // namespace diffuscope::transport
