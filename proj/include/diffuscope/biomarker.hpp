#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diffuscope/cooccurrence.hpp"
#include "diffuscope/graph_diffusion.hpp"

// Scalar LDA biomarkers over per-sample taxon frequencies (beta) or their
// diffusion Frechet vectors at scale t (gamma_t), with ROC evaluation.
namespace diffuscope::biomarker {

enum class FeatureKind { raw_frequency, dfv };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

std::vector<double> features_beta(std::span<const double> counts);
std::vector<double> features_gamma(std::span<const double> counts,
                                   const graph::SpectralDecomposition& spec, double t);

/// One feature row per sample of the table. spec is required for dfv features.
Eigen::MatrixXd feature_matrix(const cooccurrence::AbundanceTable& table, FeatureKind kind,
                               const graph::SpectralDecomposition* spec = nullptr, double t = 0.0);

struct LdaModel {
  Eigen::VectorXd direction;  // unit norm; class-1 mean scores above class-0
  std::optional<double> threshold;
  Eigen::VectorXd mean0;
  Eigen::VectorXd mean1;
  FeatureKind kind = FeatureKind::raw_frequency;
  double t = 0.0;
  std::vector<std::string> taxa;
  double regularization = 0.0;
};

/// Two-class Fisher LDA on feature rows. The pooled within-class scatter is
/// ridged by 1e-6 trace(S_W)/dim before solving for the direction.
LdaModel fit_lda(const Eigen::MatrixXd& class0, const Eigen::MatrixXd& class1);

double score(const LdaModel& model, std::span<const double> feature);
std::vector<double> scores(const LdaModel& model, const Eigen::MatrixXd& features);

/// Positive prediction when score >= threshold.
bool predict(const LdaModel& model, double score_value);

struct RocCurve {
  std::vector<double> thresholds;  // +inf, distinct scores descending, -inf
  std::vector<double> tpr;
  std::vector<double> fpr;
  double auc = 0.0;
};

/// Class 1 is the positive class.
RocCurve roc(std::span<const double> scores0, std::span<const double> scores1);

struct ParameterSelection {
  double alpha = 0.0;
  double t = 0.0;
  double auc = 0.0;
  std::vector<double> alpha_grid;
  std::vector<double> t_grid;
  Eigen::MatrixXd surface;  // auc per (alpha, t)
};

struct SelectionOptions {
  bool lans_exclude_self = false;
  /// Table the co-occurrence network is estimated from; defaults to the
  /// class-0 rows of the training table.
  std::optional<cooccurrence::AbundanceTable> reference;
  /// Held-out set the AUC is measured on; defaults to the training table.
  std::optional<cooccurrence::AbundanceTable> validation;
  std::vector<int> validation_labels;
};

/// Exhaustive (alpha, t) search maximizing AUC of gamma_t. Ties go to the
/// smaller alpha, then the smaller t.
ParameterSelection select_parameters(const cooccurrence::AbundanceTable& table,
                                     const std::vector<int>& labels, std::vector<double> alpha_grid,
                                     std::vector<double> t_grid, const SelectionOptions& options = {});

std::vector<double> default_alpha_grid();
std::vector<double> default_t_grid();

/// Splits table rows by a 0/1 label vector.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_by_label(const Eigen::MatrixXd& features,
                                                           const std::vector<int>& labels);

/// Reference loadings and operating points for the seven-phylum CDI model,
/// kept for comparison when compatible clinical data is supplied.
struct ReferenceLoading {
  const char* taxon;
  double beta;
  double gamma;
};
std::span<const ReferenceLoading> reference_loadings();

struct ReferenceOperatingPoint {
  const char* biomarker;
  double threshold;
  double tpr;
  double fpr;
};
std::span<const ReferenceOperatingPoint> reference_operating_points();
constexpr double kReferenceAlpha = 0.1;
constexpr double kReferenceT = 7.75;

}  // namespace diffuscope::biomarker
