#include "diffuscope/biomarker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "diffuscope/error.hpp"
#include "diffuscope/parallel.hpp"

namespace diffuscope::biomarker {

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::raw_frequency ? "beta" : "gamma";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "beta") return FeatureKind::raw_frequency;
  if (name == "gamma") return FeatureKind::dfv;
  throw Error(Errc::InvalidArgument, "feature kind must be 'beta' or 'gamma', got '" + name + "'");
}

std::vector<double> features_beta(std::span<const double> counts) {
  const auto xi = frequency_distribution(counts);
  return {xi.probs().begin(), xi.probs().end()};
}

std::vector<double> features_gamma(std::span<const double> counts,
                                   const graph::SpectralDecomposition& spec, double t) {
  return graph::dfv(spec, frequency_distribution(counts), t).values;
}

Eigen::MatrixXd feature_matrix(const cooccurrence::AbundanceTable& table, FeatureKind kind,
                               const graph::SpectralDecomposition* spec, double t) {
  const Eigen::MatrixXd& counts = table.counts();
  const Eigen::Index m = counts.rows(), n = counts.cols();
  Eigen::MatrixXd out(m, n);
  Eigen::MatrixXd table_d2;
  if (kind == FeatureKind::dfv) {
    if (!spec) throw Error(Errc::InvalidArgument, "gamma features need a network");
    if (static_cast<Eigen::Index>(spec->size()) != n) {
      throw Error(Errc::LengthMismatch, "network node count differs from taxon count");
    }
    table_d2 = graph::diffusion_distance_sq_table(*spec, t);
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::VectorXd row = counts.row(r).transpose();
    const auto xi = frequency_distribution(std::span<const double>(row.data(), static_cast<std::size_t>(n)));
    if (kind == FeatureKind::raw_frequency) {
      for (Eigen::Index c = 0; c < n; ++c) out(r, c) = xi[static_cast<std::size_t>(c)];
    } else {
      const auto f = graph::dfv(table_d2, xi, t);
      for (Eigen::Index c = 0; c < n; ++c) out(r, c) = f.values[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

namespace {

Eigen::MatrixXd scatter(const Eigen::MatrixXd& rows, const Eigen::VectorXd& mean) {
  const Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
  return centered.transpose() * centered;
}

}  // namespace

LdaModel fit_lda(const Eigen::MatrixXd& class0, const Eigen::MatrixXd& class1) {
  if (class0.rows() < 2 || class1.rows() < 2) {
    throw Error(Errc::EmptyClass, "LDA needs at least two samples per class");
  }
  if (class0.cols() != class1.cols() || class0.cols() == 0) {
    throw Error(Errc::DimensionMismatch, "classes must share a positive feature dimension");
  }
  const Eigen::Index dim = class0.cols();
  LdaModel model;
  model.mean0 = class0.colwise().mean().transpose();
  model.mean1 = class1.colwise().mean().transpose();
  const Eigen::VectorXd delta = model.mean1 - model.mean0;
  // relative, so features that all decay with t are not mistaken for ties
  const double scale = std::max({1e-300, model.mean0.norm(), model.mean1.norm()});
  if (delta.norm() <= 1e-12 * scale) {
    throw Error(Errc::DegenerateSeparation, "class means coincide; no discriminant axis");
  }
  const Eigen::MatrixXd within = scatter(class0, model.mean0) + scatter(class1, model.mean1);
  const double trace = within.trace();
  model.regularization = trace > 0.0 ? 1e-6 * trace / static_cast<double>(dim) : 1.0;
  Eigen::MatrixXd ridged = within;
  ridged.diagonal().array() += model.regularization;
  Eigen::LDLT<Eigen::MatrixXd> solver(ridged);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::DegenerateSeparation, "within-class scatter factorization failed");
  }
  Eigen::VectorXd direction = solver.solve(delta);
  const double norm = direction.norm();
  if (!std::isfinite(norm) || norm <= 0.0) {
    throw Error(Errc::DegenerateSeparation, "discriminant direction vanished");
  }
  direction /= norm;
  if (direction.dot(delta) < 0.0) direction = -direction;
  model.direction = std::move(direction);
  return model;
}

double score(const LdaModel& model, std::span<const double> feature) {
  if (static_cast<Eigen::Index>(feature.size()) != model.direction.size()) {
    throw Error(Errc::DimensionMismatch, "feature has " + std::to_string(feature.size()) +
                                             " entries, model expects " +
                                             std::to_string(model.direction.size()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < feature.size(); ++k) s += feature[k] * model.direction(static_cast<Eigen::Index>(k));
  return s;
}

std::vector<double> scores(const LdaModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.direction.size()) {
    throw Error(Errc::DimensionMismatch, "feature matrix width differs from model dimension");
  }
  const Eigen::VectorXd s = features * model.direction;
  return {s.data(), s.data() + s.size()};
}

bool predict(const LdaModel& model, double score_value) {
  if (!model.threshold) throw Error(Errc::InvalidArgument, "model has no threshold");
  return score_value >= *model.threshold;
}

RocCurve roc(std::span<const double> scores0, std::span<const double> scores1) {
  if (scores0.empty() || scores1.empty()) throw Error(Errc::EmptyClass, "ROC needs both classes");
  std::vector<double> neg(scores0.begin(), scores0.end());
  std::vector<double> pos(scores1.begin(), scores1.end());
  for (double s : neg)
    if (std::isnan(s)) throw Error(Errc::NonFinite, "NaN score");
  for (double s : pos)
    if (std::isnan(s)) throw Error(Errc::NonFinite, "NaN score");
  std::sort(neg.begin(), neg.end(), std::greater<>());
  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::vector<double> distinct(neg);
  distinct.insert(distinct.end(), pos.begin(), pos.end());
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  RocCurve curve;
  const double inf = std::numeric_limits<double>::infinity();
  const double n0 = static_cast<double>(neg.size()), n1 = static_cast<double>(pos.size());
  curve.thresholds.push_back(inf);
  curve.tpr.push_back(0.0);
  curve.fpr.push_back(0.0);
  std::size_t ip = 0, in = 0;
  for (double tau : distinct) {
    while (ip < pos.size() && pos[ip] >= tau) ++ip;
    while (in < neg.size() && neg[in] >= tau) ++in;
    curve.thresholds.push_back(tau);
    curve.tpr.push_back(static_cast<double>(ip) / n1);
    curve.fpr.push_back(static_cast<double>(in) / n0);
  }
  curve.thresholds.push_back(-inf);
  curve.tpr.push_back(1.0);
  curve.fpr.push_back(1.0);
  for (std::size_t k = 1; k < curve.tpr.size(); ++k) {
    curve.auc += 0.5 * (curve.fpr[k] - curve.fpr[k - 1]) * (curve.tpr[k] + curve.tpr[k - 1]);
  }
  return curve;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_by_label(const Eigen::MatrixXd& features,
                                                           const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw Error(Errc::LengthMismatch, "one label per sample required");
  }
  std::vector<Eigen::Index> rows0, rows1;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] == 0) rows0.push_back(static_cast<Eigen::Index>(r));
    else if (labels[r] == 1) rows1.push_back(static_cast<Eigen::Index>(r));
    else throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
  }
  Eigen::MatrixXd c0(static_cast<Eigen::Index>(rows0.size()), features.cols());
  Eigen::MatrixXd c1(static_cast<Eigen::Index>(rows1.size()), features.cols());
  for (std::size_t k = 0; k < rows0.size(); ++k) c0.row(static_cast<Eigen::Index>(k)) = features.row(rows0[k]);
  for (std::size_t k = 0; k < rows1.size(); ++k) c1.row(static_cast<Eigen::Index>(k)) = features.row(rows1[k]);
  return {std::move(c0), std::move(c1)};
}

namespace {

double evaluate_auc(const LdaModel& model, const Eigen::MatrixXd& features, const std::vector<int>& labels) {
  const auto [c0, c1] = split_by_label(features, labels);
  return roc(scores(model, c0), scores(model, c1)).auc;
}

}  // namespace

ParameterSelection select_parameters(const cooccurrence::AbundanceTable& table,
                                     const std::vector<int>& labels, std::vector<double> alpha_grid,
                                     std::vector<double> t_grid, const SelectionOptions& options) {
  if (alpha_grid.empty() || t_grid.empty()) throw Error(Errc::InvalidArgument, "empty parameter grid");
  if (labels.size() != table.samples()) throw Error(Errc::LengthMismatch, "one label per sample required");
  std::sort(alpha_grid.begin(), alpha_grid.end());
  std::sort(t_grid.begin(), t_grid.end());

  std::optional<cooccurrence::AbundanceTable> reference = options.reference;
  if (!reference) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < labels.size(); ++r)
      if (labels[r] == 0) rows.push_back(r);
    reference = table.select_rows(rows);
  }
  const cooccurrence::AbundanceTable& eval_table = options.validation ? *options.validation : table;
  const std::vector<int>& eval_labels = options.validation ? options.validation_labels : labels;

  ParameterSelection sel;
  sel.alpha_grid = alpha_grid;
  sel.t_grid = t_grid;
  sel.surface.resize(static_cast<Eigen::Index>(alpha_grid.size()), static_cast<Eigen::Index>(t_grid.size()));
  const auto correlations = cooccurrence::correlation_network(*reference);

  for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
    const auto net = cooccurrence::lans_sparsify(
                         correlations, {alpha_grid[a], options.lans_exclude_self})
                         .first;
    const auto spec = graph::spectrum(net);
    std::vector<double> row(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t k) {
      const Eigen::MatrixXd train = feature_matrix(table, FeatureKind::dfv, &spec, t_grid[k]);
      const auto [c0, c1] = split_by_label(train, labels);
      try {
        const LdaModel model = fit_lda(c0, c1);
        const Eigen::MatrixXd eval = options.validation
                                         ? feature_matrix(eval_table, FeatureKind::dfv, &spec, t_grid[k])
                                         : train;
        row[k] = evaluate_auc(model, eval, eval_labels);
      } catch (const Error& e) {
        if (e.code() != Errc::DegenerateSeparation) throw;
        row[k] = 0.5;
      }
    });
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      sel.surface(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  sel.auc = -1.0;
  for (std::size_t a = 0; a < alpha_grid.size(); ++a)
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      const double v = sel.surface(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k));
      if (v > sel.auc) {
        sel.auc = v;
        sel.alpha = alpha_grid[a];
        sel.t = t_grid[k];
      }
    }
  return sel;
}

std::vector<double> default_alpha_grid() {
  return {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5};
}

std::vector<double> default_t_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 40; ++k) grid.push_back(0.25 * k);
  return grid;
}

std::span<const ReferenceLoading> reference_loadings() {
  static const ReferenceLoading table[] = {
      {"Firmicutes", -0.412, -0.079},    {"Proteobacteria", -0.644, 0.059},
      {"Bacteroidetes", 0.517, -0.623},  {"Actinobacteria", 0.267, -0.340},
      {"Unclassified", 0.275, -0.443},   {"Fusobacteria", -0.010, -0.119},
      {"Verrucomicrobia", 0.006, -0.525},
  };
  return table;
}

std::span<const ReferenceOperatingPoint> reference_operating_points() {
  static const ReferenceOperatingPoint table[] = {
      {"gamma", -1.128, 0.83, 0.20},
      {"gamma", -1.108, 0.91, 0.25},
  };
  return table;
}

}  // namespace diffuscope::biomarker
