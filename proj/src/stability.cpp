#include "diffuscope/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "diffuscope/error.hpp"
#include "diffuscope/parallel.hpp"
#include "diffuscope/transport.hpp"

namespace diffuscope::stability {

namespace {

constexpr double kE = std::numbers::e;

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double norm_sq(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// K_t(y) = G_t(0, y)
double centered_kernel(std::span<const double> y, double t) {
  return std::exp(-norm_sq(y) / (4.0 * t)) / euclid::heat_normalizer(y.size(), t);
}

void require_same_dim(std::span<const double> y1, std::span<const double> y2) {
  if (y1.size() != y2.size() || y1.empty()) {
    throw Error(Errc::DimensionMismatch, "lemma points must share a positive dimension");
  }
}

// Evaluation set for sup-norms: the grid plus every support point.
std::vector<double> sup_points(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double t,
                               const std::optional<euclid::GridSpec>& grid) {
  const EmpiricalMeasure* both[] = {&a, &b};
  const euclid::GridSpec g =
      grid ? *grid : euclid::default_grid(std::span<const EmpiricalMeasure* const>(both), euclid::Scale(t));
  if (g.dim() != a.dim()) throw Error(Errc::DimensionMismatch, "grid dimension");
  std::vector<double> coords;
  coords.reserve((g.size() + a.size() + b.size()) * a.dim());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.point(k);
    coords.insert(coords.end(), x.begin(), x.end());
  }
  coords.insert(coords.end(), a.coords().begin(), a.coords().end());
  coords.insert(coords.end(), b.coords().begin(), b.coords().end());
  return coords;
}

std::string measure_digest(const char* family, const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                           double t, double w1) {
  return format("%s d=%zu na=%zu nb=%zu t=%.6g W1=%.6g", family, a.dim(), a.size(), b.size(), t, w1);
}

}  // namespace

double BoundReport::slack_ratio() const {
  if (rhs > 0.0) return slack / rhs;
  return lhs <= 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
}

BoundReport make_report(std::string family, double lhs, double rhs, std::string digest) {
  BoundReport r;
  r.family = std::move(family);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.instance_digest = std::move(digest);
  r.satisfied = r.slack >= -1e-9 * std::max(1.0, std::abs(rhs));
  return r;
}

BoundReport check_lemma_gauss_a(std::span<const double> y1, std::span<const double> y2, double t) {
  require_same_dim(y1, y2);
  euclid::Scale scale(t);
  const double lhs = std::abs(centered_kernel(y1, t) - centered_kernel(y2, t));
  const double gap = distance(y1, y2);
  const double rhs = gap / (euclid::heat_normalizer(y1.size(), t) * std::sqrt(2.0 * t * kE));
  return make_report("gauss_a", lhs, rhs, format("gauss_a d=%zu t=%.6g |y1-y2|=%.6g", y1.size(), t, gap));
}

BoundReport check_lemma_gauss_b(std::span<const double> y1, std::span<const double> y2, double t) {
  require_same_dim(y1, y2);
  euclid::Scale scale(t);
  const double k1 = centered_kernel(y1, t);
  const double k2 = centered_kernel(y2, t);
  double diff_sq = 0.0;
  for (std::size_t k = 0; k < y1.size(); ++k) {
    const double d = y1[k] * k1 - y2[k] * k2;
    diff_sq += d * d;
  }
  const double gap = distance(y1, y2);
  const double rhs = (kE + 2.0) / (kE * euclid::heat_normalizer(y1.size(), t)) * gap;
  return make_report("gauss_b", std::sqrt(diff_sq), rhs,
                     format("gauss_b d=%zu t=%.6g |y1-y2|=%.6g", y1.size(), t, gap));
}

BoundReport check_frechet_stability(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double t,
                                    const std::optional<euclid::GridSpec>& grid) {
  if (a.dim() != b.dim()) throw Error(Errc::DimensionMismatch, "measures of different dimension");
  const euclid::Scale scale(t);
  const auto coords = sup_points(a, b, t, grid);
  const auto va = euclid::evaluate_points(a, coords, scale);
  const auto vb = euclid::evaluate_points(b, coords, scale);
  double lhs = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k) lhs = std::max(lhs, std::abs(va[k] - vb[k]));
  const double w1 = transport::wasserstein_euclidean(a, b, 1.0).cost;
  const double rhs = w1 / (euclid::heat_normalizer(a.dim(), 2.0 * t) * std::sqrt(t * kE));
  return make_report("frechet", lhs, rhs, measure_digest("frechet", a, b, t, w1));
}

double gradient_stability_constant(std::size_t dim, double t, GradientConstant which) {
  const double stated = (kE + 2.0) / (kE * euclid::heat_normalizer(dim, 2.0 * t));
  return which == GradientConstant::stated ? stated : stated / (2.0 * t);
}

BoundReport check_gradient_stability(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double t,
                                     const std::optional<euclid::GridSpec>& grid,
                                     GradientConstant which) {
  if (a.dim() != b.dim()) throw Error(Errc::DimensionMismatch, "measures of different dimension");
  const euclid::Scale scale(t);
  const std::size_t d = a.dim();
  const auto coords = sup_points(a, b, t, grid);
  const std::size_t count = coords.size() / d;
  std::vector<double> gap(count);
  parallel_for(count, [&](std::size_t k) {
    const std::span<const double> x(coords.data() + k * d, d);
    const auto ga = euclid::frechet_gradient(a, x, scale);
    const auto gb = euclid::frechet_gradient(b, x, scale);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += (ga[c] - gb[c]) * (ga[c] - gb[c]);
    gap[k] = std::sqrt(s);
  });
  const double lhs = *std::max_element(gap.begin(), gap.end());
  const double w1 = transport::wasserstein_euclidean(a, b, 1.0).cost;
  const double rhs = gradient_stability_constant(d, t, which) * w1;
  const char* family = which == GradientConstant::stated ? "gradient" : "gradient_derived";
  return make_report(family, lhs, rhs, measure_digest(family, a, b, t, w1));
}

namespace {

BoundReport commute_from_table(const Eigen::MatrixXd& d2, double trace_term, std::size_t i,
                               std::size_t j, std::size_t l, double t) {
  const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j),
             L = static_cast<Eigen::Index>(l);
  const double lhs = std::abs(d2(I, L) - d2(J, L));
  const double rhs = 4.0 * std::sqrt(trace_term) * std::sqrt(d2(I, J));
  return make_report("commute", lhs, rhs,
                     format("commute n=%td i=%zu j=%zu l=%zu t=%.6g", d2.rows(), i, j, l, t));
}

// Tr e^{-2t Delta} - 1 summed over the nonzero modes; subtracting 1 from the
// full trace cancels to nothing at large t.
double trace_minus_one(const graph::SpectralDecomposition& spec, double t) {
  const Eigen::VectorXd& lambda = spec.eigenvalues();
  double total = static_cast<double>(spec.zero_count()) - 1.0;
  for (Eigen::Index k = static_cast<Eigen::Index>(spec.zero_count()); k < lambda.size(); ++k) {
    total += std::exp(-2.0 * t * lambda(k));
  }
  return std::max(0.0, total);
}

bool worse(const BoundReport& candidate, const BoundReport& current) {
  if (candidate.satisfied != current.satisfied) return !candidate.satisfied;
  return candidate.slack_ratio() < current.slack_ratio();
}

}  // namespace

BoundReport check_lemma_commute(const graph::SpectralDecomposition& spec, std::size_t i,
                                std::size_t j, std::size_t l, double t) {
  if (!spec.connected()) throw Error(Errc::DisconnectedNetwork, "lemma needs a connected network");
  const std::size_t n = spec.size();
  if (i >= n || j >= n || l >= n) throw Error(Errc::IndexOutOfRange, "node index out of range");
  const Eigen::MatrixXd d2 = graph::diffusion_distance_sq_table(spec, t);
  return commute_from_table(d2, trace_minus_one(spec, t), i, j, l, t);
}

BoundReport check_lemma_commute_all(const graph::SpectralDecomposition& spec, double t) {
  if (!spec.connected()) throw Error(Errc::DisconnectedNetwork, "lemma needs a connected network");
  const Eigen::MatrixXd d2 = graph::diffusion_distance_sq_table(spec, t);
  const double tr = trace_minus_one(spec, t);
  const std::size_t n = spec.size();
  BoundReport worst = commute_from_table(d2, tr, 0, 0, 0, t);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l) {
        BoundReport r = commute_from_table(d2, tr, i, j, l, t);
        if (worse(r, worst)) worst = std::move(r);
      }
  return worst;
}

BoundReport check_dfv_stability(const graph::SpectralDecomposition& spec,
                                const VertexDistribution& xi, const VertexDistribution& zeta,
                                double t) {
  if (!spec.connected()) throw Error(Errc::DisconnectedNetwork, "DFV stability needs a connected network");
  const Eigen::MatrixXd d2 = graph::diffusion_distance_sq_table(spec, t);
  const auto fx = graph::dfv(d2, xi, t);
  const auto fz = graph::dfv(d2, zeta, t);
  double lhs = 0.0;
  for (std::size_t k = 0; k < fx.values.size(); ++k) {
    lhs = std::max(lhs, std::abs(fx.values[k] - fz.values[k]));
  }
  const double w1 = transport::wasserstein_network(spec, xi, zeta, 1.0).cost;
  const double rhs = 4.0 * std::sqrt(trace_minus_one(spec, t) / (2.0 * kE * t)) * w1;
  return make_report("dfv", lhs, rhs, format("dfv n=%zu t=%.6g W1=%.6g", spec.size(), t, w1));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

double InstanceGenerator::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double InstanceGenerator::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

std::size_t InstanceGenerator::integer(std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
}

double InstanceGenerator::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

std::vector<double> InstanceGenerator::dirichlet(std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) {
    x = std::exponential_distribution<double>(1.0)(engine_) + 1e-300;
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

EmpiricalMeasure InstanceGenerator::measure(std::size_t n, std::size_t dim) {
  const double s = uniform(0.1, 10.0);
  std::vector<double> coords(n * dim);
  for (double& c : coords) c = s * normal();
  return EmpiricalMeasure(dim, std::move(coords), dirichlet(n));
}

graph::WeightedNetwork InstanceGenerator::connected_network(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = "v" + std::to_string(i);
  for (;;) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (uniform(0.0, 1.0) < 0.5) {
          // U(0, 1]
          const double x = 1.0 - uniform(0.0, 1.0);
          w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
          w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x;
        }
    graph::WeightedNetwork net(labels, std::move(w));
    if (net.is_connected()) return net;
  }
}

VertexDistribution InstanceGenerator::distribution(std::size_t n) {
  if (uniform(0.0, 1.0) < 0.25) return point_mass(integer(0, n - 1), n);
  return VertexDistribution(dirichlet(n));
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {"gauss_a",          "gauss_b", "frechet", "gradient",
                                                 "gradient_derived", "commute", "dfv"};
  return names;
}

namespace {

std::uint64_t family_stream(const std::string& family) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : family) h = (h ^ c) * 1099511628211ULL;
  return h;
}

// b is either an independent measure or a jittered copy of a; the copies
// probe the small-W_1 regime where the constants are tightest.
std::pair<EmpiricalMeasure, EmpiricalMeasure> measure_pair(InstanceGenerator& gen, std::size_t index) {
  const std::size_t d = gen.integer(1, 3);
  EmpiricalMeasure a = gen.measure(gen.integer(1, 50), d);
  if (index % 2 == 0) return {a, gen.measure(gen.integer(1, 50), d)};
  const double jitter = gen.log_uniform(1e-3, 1.0);
  double spread = 0.0;
  for (double c : a.coords()) spread = std::max(spread, std::abs(c));
  std::vector<double> coords(a.coords().begin(), a.coords().end());
  for (double& c : coords) c += jitter * std::max(spread, 1e-3) * gen.normal() * 0.1;
  std::vector<double> weights(a.weights().begin(), a.weights().end());
  return {a, EmpiricalMeasure(d, std::move(coords), std::move(weights))};
}

}  // namespace

std::vector<BoundReport> run_family(const std::string& family, std::size_t count, std::uint64_t seed) {
  const auto& names = family_names();
  if (std::find(names.begin(), names.end(), family) == names.end()) {
    throw Error(Errc::InvalidArgument, "unknown stability family '" + family + "'");
  }
  const std::uint64_t stream = family_stream(family);
  const auto t_euclid = log_grid(0.01, 10.0, 16);
  const auto t_network = log_grid(1e-3, 1e2, 26);
  std::vector<BoundReport> reports;
  reports.reserve(count);
  for (std::size_t index = 0; index < count; ++index) {
    InstanceGenerator gen(derive_seed(seed, stream, index));
    BoundReport r;
    if (family == "gauss_a" || family == "gauss_b") {
      const std::size_t d = gen.integer(1, 3);
      const double t = gen.log_uniform(1e-3, 1e2);
      const double s = gen.log_uniform(0.1, 10.0) * std::sqrt(2.0 * t);
      std::vector<double> y1(d), y2(d);
      for (double& v : y1) v = s * gen.normal();
      for (double& v : y2) v = s * gen.normal();
      r = family == "gauss_a" ? check_lemma_gauss_a(y1, y2, t) : check_lemma_gauss_b(y1, y2, t);
    } else if (family == "frechet" || family == "gradient" || family == "gradient_derived") {
      auto [a, b] = measure_pair(gen, index);
      const double t = t_euclid[gen.integer(0, t_euclid.size() - 1)];
      if (family == "frechet") {
        r = check_frechet_stability(a, b, t);
      } else {
        r = check_gradient_stability(a, b, t, std::nullopt,
                                     family == "gradient" ? GradientConstant::stated
                                                          : GradientConstant::derived);
      }
    } else if (family == "commute") {
      const auto spec = graph::spectrum(gen.connected_network(gen.integer(3, 12)));
      bool first = true;
      for (double t : t_network) {
        BoundReport candidate = check_lemma_commute_all(spec, t);
        if (first || worse(candidate, r)) r = std::move(candidate);
        first = false;
      }
    } else {
      const std::size_t n = gen.integer(2, 15);
      const auto spec = graph::spectrum(gen.connected_network(n));
      const auto xi = gen.distribution(n);
      const auto zeta = gen.distribution(n);
      const double t = t_network[gen.integer(0, t_network.size() - 1)];
      r = check_dfv_stability(spec, xi, zeta, t);
    }
    r.instance_digest = format("#%zu ", index) + r.instance_digest;
    reports.push_back(std::move(r));
  }
  return reports;
}

FamilySummary summarize(const std::string& family, std::span<const BoundReport> reports) {
  FamilySummary s;
  s.family = family;
  s.count = reports.size();
  for (const BoundReport& r : reports) {
    if (!r.satisfied) ++s.violations;
    s.min_slack_ratio = std::min(s.min_slack_ratio, r.slack_ratio());
  }
  s.all_satisfied = s.violations == 0;
  return s;
}

}  // namespace diffuscope::stability
