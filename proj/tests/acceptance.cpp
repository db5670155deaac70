// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "diffuscope/biomarker.hpp"
#include "diffuscope/cooccurrence.hpp"
#include "diffuscope/euclid_diffusion.hpp"
#include "diffuscope/graph_diffusion.hpp"
#include "diffuscope/stability.hpp"
#include "diffuscope/synthetic.hpp"
#include "diffuscope/transport.hpp"
#include "oracles.hpp"

using namespace diffuscope;
using namespace diffuscope::euclid;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Rand {
  std::mt19937_64 rng;
  explicit Rand(std::uint64_t s) : rng(s) {}
  double u(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double log_u(double lo, double hi) { return std::exp(u(std::log(lo), std::log(hi))); }
  double normal() { return std::normal_distribution<double>()(rng); }
  std::size_t integer(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }
  std::vector<double> simplex(std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& x : w) s += (x = -std::log(1.0 - u()));
    for (auto& x : w) x /= s;
    return w;
  }
  EmpiricalMeasure measure(std::size_t n, std::size_t d, double scale, bool uniform = false) {
    std::vector<double> c(n * d);
    for (auto& x : c) x = scale * normal();
    return EmpiricalMeasure(d, c, uniform ? std::vector<double>(n, 1.0 / static_cast<double>(n)) : simplex(n));
  }
  std::vector<double> point(std::size_t d, double scale) {
    std::vector<double> x(d);
    for (auto& v : x) v = scale * normal();
    return x;
  }
  // edge probability p, weights in (0, 1]
  Eigen::MatrixXd weights(std::size_t n, double p) {
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i + 1; j < m; ++j)
        if (u() < p) w(i, j) = w(j, i) = 1.0 - u();
    return w;
  }
};

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("v" + std::to_string(i));
  return out;
}

graph::WeightedNetwork connected(Rand& r, std::size_t n, double p = 0.5) {
  for (;;) {
    graph::WeightedNetwork net(names(n), r.weights(n, p));
    if (net.is_connected()) return net;
  }
}

std::size_t components(const Eigen::MatrixXd& w) {
  const auto n = static_cast<std::size_t>(w.rows());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  std::size_t count = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[a] = b, --count;
      }
  return count;
}

double sq(double x) { return x * x; }

Outcome kde_identity() {
  Rand r(101);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = r.integer(1, 3);
    const double t = r.log_u(0.01, 10.0);
    const auto alpha = r.measure(r.integer(1, 200), d, r.log_u(0.1, 10.0));
    const auto x = r.point(d, 2.0);
    const double c = heat_normalizer(d, t);
    const double lhs = frechet_function(alpha, x, Scale(t / 2)) + 2.0 * gaussian_kde(alpha, x, Scale(t));
    worst = std::max(worst, std::abs(lhs - 2.0 / c) / (2.0 / c));
  }
  return {worst <= 1e-12, fmt("max rel err %.2e", worst)};
}

Outcome gradient_check() {
  Rand r(102);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = r.integer(1, 3);
    const double t = r.log_u(0.01, 10.0);
    const double s = std::sqrt(t);
    const auto alpha = r.measure(r.integer(1, 50), d, s);
    const auto x = r.point(d, 1.5 * s);
    const auto g = frechet_gradient(alpha, x, Scale(t));
    const double h = 1e-4 * s;
    double gnorm = 0.0, err = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (frechet_function(alpha, xp, Scale(t)) - frechet_function(alpha, xm, Scale(t))) / (2 * h);
      gnorm += sq(g[k]);
      err += sq(g[k] - fd);
    }
    // gradients that vanish by symmetry are compared against the field's own scale
    const double floor = 1e-6 / (t * std::pow(4 * kPi * t, d / 2.0));
    worst = std::max(worst, std::sqrt(err) / std::max(std::sqrt(gnorm), floor));
  }
  return {worst <= 1e-5, fmt("max rel err %.2e", worst)};
}

Outcome family(const std::string& name, std::size_t count) {
  const auto reports = stability::run_family(name, count, 7);
  const auto s = stability::summarize(name, reports);
  std::string detail = fmt("%zu/%zu violations, min slack ratio %.3g", s.violations, s.count, s.min_slack_ratio);
  if (s.violations > 0) {
    double worst = 0.0;
    for (const auto& rep : reports) worst = std::max(worst, rep.lhs / rep.rhs);
    detail += fmt(", worst lhs/rhs %.3g", worst);
  }
  return {s.violations == 0, detail};
}

Outcome gradient_stability() {
  Outcome out = family("gradient", 200);
  const auto derived = stability::summarize("gradient_derived", stability::run_family("gradient_derived", 200, 7));
  out.detail += fmt("; with the 1/(2t) constant: %zu violations", derived.violations);
  return out;
}

Outcome gauss_lemmas() {
  const auto a = stability::summarize("gauss_a", stability::run_family("gauss_a", 10000, 7));
  const auto b = stability::summarize("gauss_b", stability::run_family("gauss_b", 10000, 7));
  return {a.violations == 0 && b.violations == 0,
          fmt("violations a %zu, b %zu; min slack a %.3g, b %.3g", a.violations, b.violations, a.min_slack_ratio,
              b.min_slack_ratio)};
}

Outcome network_spectral() {
  Rand r(106);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = r.integer(2, 20);
    const graph::WeightedNetwork net(names(n), r.weights(n, r.u(0.2, 0.8)));
    const auto spec = graph::spectrum(net);
    const Eigen::MatrixXd l = oracle::laplacian(net.weights());
    for (double t : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double ref = oracle::embedding_distance(l, static_cast<int>(i), static_cast<int>(j), t);
          worst = std::max(worst, std::abs(graph::diffusion_distance(spec, i, j, t) - ref));
        }
    }
  }
  double closed = 0.0;
  const auto k3 = graph::spectrum(graph::WeightedNetwork::from_edges(names(3), {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}));
  for (double t : stability::log_grid(1e-3, 1e2, 26)) {
    const double w = r.u(0.1, 3.0);
    const auto s2 = graph::spectrum(graph::WeightedNetwork::from_edges(names(2), {{0, 1, w}}));
    closed = std::max(closed, std::abs(graph::diffusion_distance(s2, 0, 1, t) - std::sqrt(2.0) * std::exp(-2 * w * t)));
    closed = std::max(closed, std::abs(graph::diffusion_distance_sq(k3, 0, 1, t) - 2.0 * std::exp(-6 * t)));
  }
  return {worst <= 1e-9 && closed <= 1e-12, fmt("max |spectral - expm| %.2e, closed forms %.2e", worst, closed)};
}

Outcome commute_identity() {
  Rand r(107);
  double worst = 0.0, termwise = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = r.integer(2, 12);
    const auto net = connected(r, n);
    const auto spec = graph::spectrum(net);
    const Eigen::MatrixXd l = oracle::laplacian(net.weights());
    // integrate until every pairwise d_t^2 is below 1e-13 of its start
    double upper = 1.0;
    while (oracle::expm_distance_sq(l, upper).maxCoeff() > 2e-13) upper *= 2.0;
    Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (double lo = 0.0, hi = 1.0 / 64; lo < upper; lo = hi, hi *= 2.0)
      integral += oracle::adaptive_simpson_matrix([&](double t) { return oracle::expm_distance_sq(l, t); }, lo,
                                                  std::min(hi, upper), 1e-12);
    const Eigen::MatrixXd ct = graph::commute_time_table(spec);
    for (Eigen::Index i = 0; i < ct.rows(); ++i)
      for (Eigen::Index j = 0; j < ct.cols(); ++j) {
        if (i == j) continue;
        const double d2 = sq(ct(i, j));
        worst = std::max(worst, std::abs(2.0 * integral(i, j) - d2) / d2);
        // 2 int_0^inf e^{-2 lambda t} dt = 1 / lambda, summed term by term
        double terms = 0.0;
        const auto& lam = spec.eigenvalues();
        const auto& phi = spec.eigenvectors();
        for (Eigen::Index k = 1; k < lam.size(); ++k) terms += sq(phi(i, k) - phi(j, k)) / lam(k);
        const double pinv = oracle::commute_time_sq(l, static_cast<int>(i), static_cast<int>(j));
        termwise = std::max(termwise, std::abs(terms - pinv) / pinv);
      }
  }
  return {worst <= 1e-6 && termwise <= 1e-9, fmt("quadrature rel err %.2e, termwise %.2e", worst, termwise)};
}

Outcome dfv_stability() {
  Outcome out = family("dfv", 200);
  const auto s2 = graph::spectrum(graph::WeightedNetwork::from_edges(names(2), {{0, 1, 1.0}}));
  std::size_t closed_bad = 0;
  for (double t : stability::log_grid(1e-3, 1e2, 20)) {
    const auto rep = stability::check_dfv_stability(s2, point_mass(0, 2), point_mass(1, 2), t);
    const double lhs = 2.0 * std::exp(-4 * t);
    const double rhs = 4.0 * std::sqrt(std::exp(-4 * t) / (2 * kE * t));
    if (!rep.satisfied || std::abs(rep.lhs - lhs) > 1e-12 * std::max(lhs, 1e-300) ||
        std::abs(rep.rhs - rhs) > 1e-12 * rhs)
      ++closed_bad;
  }
  out.pass = out.pass && closed_bad == 0;
  out.detail += fmt("; 2-node closed form %zu/20 off", closed_bad);
  return out;
}

Outcome wasserstein_exact() {
  Rand r(110);
  double perm_err = 0.0, quant_err = 0.0;
  std::size_t mono_bad = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t k = r.integer(1, 7);
    const double p = rep % 2 ? 1.0 : 2.0;
    const auto a = r.measure(k, r.integer(1, 3), 1.0, true);
    const auto b = r.measure(k, a.dim(), 1.0, true);
    const Eigen::MatrixXd cost = transport::euclidean_distance_matrix(a, b).array().pow(p);
    perm_err = std::max(perm_err, std::abs(transport::wasserstein_euclidean(a, b, p).primal_value -
                                           oracle::min_permutation_cost(cost)));

    // uniform on k of k + 1 nodes, disjoint in one node each
    const auto spec = graph::spectrum(connected(r, k + 1));
    std::vector<double> xi(k + 1, 1.0 / static_cast<double>(k)), zeta = xi;
    xi[k] = 0.0;
    zeta[0] = 0.0;
    const Eigen::MatrixXd sub = graph::commute_time_table(spec)
                                    .block(0, 1, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))
                                    .array()
                                    .pow(p);
    perm_err = std::max(perm_err, std::abs(transport::wasserstein_network(spec, VertexDistribution(xi),
                                                                          VertexDistribution(zeta), p)
                                                   .primal_value -
                                               oracle::min_permutation_cost(sub)));
  }
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = r.measure(r.integer(1, 25), 1, 1.0);
    const auto b = r.measure(r.integer(1, 25), 1, 1.0);
    const double p = rep % 2 ? 1.0 : 2.0;
    std::vector<std::pair<double, double>> qa, qb;
    for (std::size_t i = 0; i < a.size(); ++i) qa.emplace_back(a.point(i)[0], a.weight(i));
    for (std::size_t i = 0; i < b.size(); ++i) qb.emplace_back(b.point(i)[0], b.weight(i));
    quant_err = std::max(quant_err,
                         std::abs(transport::wasserstein_euclidean(a, b, p).cost - oracle::quantile_wasserstein(qa, qb, p)));
  }
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = r.integer(1, 3);
    const auto a = r.measure(r.integer(1, 15), d, 1.0);
    const auto b = r.measure(r.integer(1, 15), d, 1.0);
    const double p = r.u(1.0, 4.0), q = r.u(1.0, p);
    if (transport::wasserstein_euclidean(a, b, q).cost > transport::wasserstein_euclidean(a, b, p).cost + 1e-10)
      ++mono_bad;
  }
  return {perm_err <= 1e-10 && quant_err <= 1e-10 && mono_bad == 0,
          fmt("permutation %.2e, quantile %.2e, monotonicity failures %zu", perm_err, quant_err, mono_bad)};
}

Outcome two_cluster_field() {
  const auto coords = synthetic::gaussian_blobs({-2.0, 2.0}, 1, 200, 0.3, 11);
  const EmpiricalMeasure alpha(1, coords, std::vector<double>(400, 1.0 / 400));
  const auto minima = [&](double t) {
    return local_minima(evaluate_field(alpha, default_grid(alpha, Scale(t)), Scale(t))).size();
  };
  const std::size_t fine = minima(0.1), coarse = minima(20.0);
  double plateau_err = 0.0;
  for (double t : {0.1, 20.0}) {
    GridSpec grid = default_grid(alpha, Scale(t));
    const double pad = 40.0 * std::sqrt(t);
    grid.lower[0] -= pad;
    grid.upper[0] += pad;
    grid.resolution[0] += 200;
    const auto field = evaluate_field(alpha, grid, Scale(t));
    const double top = *std::max_element(field.values.begin(), field.values.end());
    plateau_err = std::max(plateau_err, std::abs(top - 2.0 / heat_normalizer(1, 2 * t)));
  }
  return {fine == 2 && coarse == 1 && plateau_err <= 1e-6,
          fmt("minima %zu at t=0.1, %zu at t=20; plateau err %.2e", fine, coarse, plateau_err)};
}

Outcome three_blob_flow() {
  const auto coords = synthetic::gaussian_blobs({-1.5, 0.0, 1.5, 0.0, 0.0, 2.0}, 2, 60, 0.1, 12);
  const std::size_t n = coords.size() / 2;
  const EmpiricalMeasure alpha(2, coords, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  const auto res = gradient_flow(coords, alpha, Scale(0.2));
  const auto& last = res.snapshots.back();
  const double radius = 5.0 * res.tol;
  Eigen::MatrixXd link = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::hypot(last[2 * i] - last[2 * j], last[2 * i + 1] - last[2 * j + 1]) <= radius)
        link(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  const std::size_t groups = components(link);
  return {res.converged && groups == 3 && res.descent_violations == 0,
          fmt("%zu groups, %zu iterations, converged %d, descent violations %zu", groups, res.iterations,
              static_cast<int>(res.converged), res.descent_violations)};
}

Outcome lans_properties() {
  Rand r(113);
  std::size_t bad = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = r.integer(3, 30);
    const graph::WeightedNetwork net(names(n), r.weights(n, r.u(0.2, 0.8)));
    const bool ex = rep % 2 == 1;
    const double a1 = r.u(0.0, 0.3), a2 = a1 + r.u(0.0, 0.3);
    const auto [o1, d1] = cooccurrence::lans_sparsify(net, {a1, ex});
    const auto [o2, d2] = cooccurrence::lans_sparsify(net, {a2, ex});
    bool ok = d1.fractions == oracle::lans_fractions(net.weights(), ex);
    for (Eigen::Index i = 0; i < d1.kept.rows(); ++i)
      for (Eigen::Index j = 0; j < d1.kept.cols(); ++j)
        if (d1.kept(i, j) && !d2.kept(i, j)) ok = false;
    const graph::WeightedNetwork scaled(net.labels(), net.weights() * r.log_u(0.01, 100.0));
    const auto [os, ds] = cooccurrence::lans_sparsify(scaled, {a1, ex});
    ok = ok && ds.kept == d1.kept;
    ok = ok && components(o1.weights()) == components(net.weights()) &&
         components(o2.weights()) == components(net.weights());
    if (!ok) ++bad;
  }
  return {bad == 0, fmt("%zu/100 networks failed", bad)};
}

double held_out_auc(const synthetic::PlantedDraw& train, const synthetic::PlantedDraw& test, biomarker::FeatureKind kind,
                    const graph::SpectralDecomposition* spec, double t) {
  const auto [c0, c1] = biomarker::split_by_label(biomarker::feature_matrix(train.table, kind, spec, t), train.labels);
  const auto model = biomarker::fit_lda(c0, c1);
  const auto [e0, e1] = biomarker::split_by_label(biomarker::feature_matrix(test.table, kind, spec, t), test.labels);
  return biomarker::roc(biomarker::scores(model, e0), biomarker::scores(model, e1)).auc;
}

Outcome biomarker_pipeline() {
  int wins = 0;
  double mean_beta = 0.0, mean_gamma = 0.0;
  for (int s = 0; s < 50; ++s) {
    synthetic::PlantedBenchmark bench({}, 1000 + static_cast<std::uint64_t>(s));
    const auto spec = graph::spectrum(cooccurrence::build_pipeline(bench.reference(100), {0.1, false}));
    const auto train = bench.draw(10);
    const auto test = bench.draw(200);
    const double beta = held_out_auc(train, test, biomarker::FeatureKind::raw_frequency, nullptr, 0.0);
    const double gamma = held_out_auc(train, test, biomarker::FeatureKind::dfv, &spec, bench.config().planted_scale);
    wins += gamma >= beta;
    mean_beta += beta / 50;
    mean_gamma += gamma / 50;
  }

  synthetic::PlantedBenchmark bench({}, 2024);
  biomarker::SelectionOptions opts;
  opts.reference = bench.reference(100);
  const auto train = bench.draw(10);
  const auto validation = bench.draw(200);
  opts.validation = validation.table;
  opts.validation_labels = validation.labels;
  const auto grid = stability::log_grid(0.01, 1000.0, 21);
  const auto sel = biomarker::select_parameters(train.table, train.labels, biomarker::default_alpha_grid(), grid, opts);
  const bool interior = sel.t > grid.front() && sel.t < grid.back();
  return {wins >= 45 && interior, fmt("gamma >= beta on %d/50 (mean auc %.3f vs %.3f); selected alpha %g, t %g, auc %.3f",
                                      wins, mean_gamma, mean_beta, sel.alpha, sel.t, sel.auc)};
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "diffuscope_acceptance";
  fs::create_directories(dir);
  std::string outputs[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = dir / ("stability_" + std::to_string(k) + ".json");
    fs::remove(out);
    const std::string cmd = std::string("\"") + DIFFUSCOPE_CLI + "\" stability --family all --count 200 --seed 7 --out \"" +
                            out.string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "cli exited nonzero"};
    std::ifstream in(out, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    outputs[k] = ss.str();
  }
  fs::remove_all(dir);
  return {!outputs[0].empty() && outputs[0] == outputs[1], fmt("%zu bytes, identical %d", outputs[0].size(),
                                                                static_cast<int>(outputs[0] == outputs[1]))};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"kde identity", 5, kde_identity},
      {"gradient vs finite differences", 5, gradient_check},
      {"frechet stability", 120, [] { return family("frechet", 200); }},
      {"gradient field stability", 120, gradient_stability},
      {"gauss lemmas", 2, gauss_lemmas},
      {"network spectral distances", 10, network_spectral},
      {"commute-time integral", 30, commute_identity},
      {"commute lemma", 30, [] { return family("commute", 50); }},
      {"dfv stability", 120, dfv_stability},
      {"wasserstein exactness", 60, wasserstein_exact},
      {"two-cluster field", 5, two_cluster_field},
      {"three-blob flow", 30, three_blob_flow},
      {"lans properties", 10, lans_properties},
      {"biomarker pipeline", 120, biomarker_pipeline},
      {"stability determinism", 600, cli_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= criteria[k].budget;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2zu %-32s %7.2fs/%gs  %s%s\n", pass ? "PASS" : "FAIL", k + 1, criteria[k].name, secs,
                criteria[k].budget, o.detail.c_str(), in_time ? "" : " (over time budget)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
