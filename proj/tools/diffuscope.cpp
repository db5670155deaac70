#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffuscope/biomarker.hpp"
#include "diffuscope/cooccurrence.hpp"
#include "diffuscope/error.hpp"
#include "diffuscope/euclid_diffusion.hpp"
#include "diffuscope/graph_diffusion.hpp"
#include "diffuscope/io.hpp"
#include "diffuscope/parallel.hpp"
#include "diffuscope/stability.hpp"
#include "diffuscope/synthetic.hpp"
#include "diffuscope/transport.hpp"

namespace fs = std::filesystem;
using namespace diffuscope;
using io::json;

namespace {

struct Outputs {
  std::vector<std::pair<fs::path, std::string>> files;
  void add(fs::path path, std::string content) { files.emplace_back(std::move(path), std::move(content)); }
  void commit() const {
    for (const auto& [path, content] : files) io::write_atomic(path, content);
  }
};

std::string t_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

const CLI::Validator kParentExists(
    [](std::string& value) -> std::string {
      const fs::path parent = fs::path(value).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) return "directory " + parent.string() + " does not exist";
      return {};
    },
    "PATH", "parent directory exists");

// gamma features index nodes by taxon; the network must use the table's order
void require_matching_taxa(const graph::WeightedNetwork& net, const cooccurrence::AbundanceTable& table) {
  if (net.labels() != table.taxa()) {
    throw Error(Errc::InvalidArgument, "--net labels must match the table header in order");
  }
}

Eigen::MatrixXd features_for(const cooccurrence::AbundanceTable& table, biomarker::FeatureKind kind,
                             const std::optional<graph::WeightedNetwork>& net, double t) {
  if (kind == biomarker::FeatureKind::raw_frequency) return biomarker::feature_matrix(table, kind);
  if (!net) throw Error(Errc::InvalidArgument, "--net is required for gamma features");
  require_matching_taxa(*net, table);
  const auto spec = graph::spectrum(*net);
  return biomarker::feature_matrix(table, kind, &spec, t);
}

std::vector<double> column(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion Frechet functions and vectors, stability checks and biomarker pipelines"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<unsigned> threads;
  app.add_option("--threads", threads, "Worker thread cap (default: DIFFUSCOPE_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  Outputs out;
  std::function<void()> run;

  // dff
  struct {
    std::string in, out_dir;
    std::vector<double> t;
    std::optional<std::size_t> resolution;
  } dff;
  auto* cmd_dff = app.add_subcommand("dff", "Evaluate the diffusion Frechet function on a grid, one CSV per scale");
  cmd_dff->add_option("--in", dff.in, "Point CSV")->required()->check(CLI::ExistingFile);
  cmd_dff->add_option("--t", dff.t, "Diffusion time, repeatable")->required()->check(CLI::PositiveNumber);
  cmd_dff->add_option("--out-dir", dff.out_dir, "Output directory")->required()->check(CLI::ExistingDirectory);
  cmd_dff->add_option("--resolution", dff.resolution, "Grid cells per axis")->check(CLI::PositiveNumber);
  cmd_dff->callback([&] {
    run = [&] {
      const auto alpha = io::read_point_csv(dff.in);
      for (double t : dff.t) {
        const euclid::Scale scale(t);
        auto grid = euclid::default_grid(alpha, scale);
        if (dff.resolution) grid.resolution.assign(grid.dim(), *dff.resolution);
        const auto field = euclid::evaluate_field(alpha, grid, scale);
        out.add(fs::path(dff.out_dir) / ("dff_t" + t_tag(t) + ".csv"), io::field_csv(field));
      }
    };
  });

  // flow
  struct {
    std::string in, out_dir;
    double t = 0.0;
    std::size_t snapshots = 6;
    std::optional<double> step, tol;
    std::size_t max_iters = 10000;
  } flow;
  auto* cmd_flow = app.add_subcommand("flow", "Gradient flow of the diffusion Frechet function");
  cmd_flow->add_option("--in", flow.in, "Point CSV; the points are also the flowing particles")
      ->required()->check(CLI::ExistingFile);
  cmd_flow->add_option("--t", flow.t, "Diffusion time")->required()->check(CLI::PositiveNumber);
  cmd_flow->add_option("--snapshots", flow.snapshots, "Number of snapshots written, first and last included")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  cmd_flow->add_option("--out-dir", flow.out_dir, "Output directory")->required()->check(CLI::ExistingDirectory);
  cmd_flow->add_option("--step", flow.step, "Euler step (default 0.9 t C_d(2t))")->check(CLI::PositiveNumber);
  cmd_flow->add_option("--tol", flow.tol, "Stop when no point moves farther than this (default 1e-6 sqrt(t))")
      ->check(CLI::PositiveNumber);
  cmd_flow->add_option("--max-iters", flow.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  cmd_flow->callback([&] {
    run = [&] {
      const auto alpha = io::read_point_csv(flow.in);
      const euclid::Scale scale(flow.t);
      euclid::FlowOptions options;
      options.step = flow.step;
      options.tol = flow.tol;
      options.max_iters = flow.max_iters;
      const auto result = euclid::gradient_flow(alpha.coords(), alpha, scale, options);
      const std::size_t recorded = result.snapshots.size();
      const std::size_t count = std::min(flow.snapshots, recorded);
      json names = json::array();
      json iterations = json::array();
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t pick = count == 1 ? recorded - 1 : k * (recorded - 1) / (count - 1);
        char name[48];
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
        out.add(fs::path(flow.out_dir) / name,
                io::point_csv(result.snapshots[pick], alpha.dim(), std::span<const double>{}));
        names.push_back(name);
        iterations.push_back(result.snapshot_iterations[pick]);
      }
      json manifest = {{"t", flow.t},
                       {"step", result.step},
                       {"tol", result.tol},
                       {"snapshots", names},
                       {"iterations", iterations},
                       {"converged", result.converged},
                       {"descent_violations", result.descent_violations}};
      out.add(fs::path(flow.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    };
  });

  // dfv
  struct {
    std::string net, dist, out;
    std::vector<double> t;
  } dfvc;
  auto* cmd_dfv = app.add_subcommand("dfv", "Diffusion Frechet vectors of a vertex distribution");
  cmd_dfv->add_option("--net", dfvc.net, "Network JSON")->required()->check(CLI::ExistingFile);
  cmd_dfv->add_option("--dist", dfvc.dist, "Distribution JSON (default uniform)")->check(CLI::ExistingFile);
  cmd_dfv->add_option("--t", dfvc.t, "Diffusion time, repeatable")->required()->check(CLI::PositiveNumber);
  cmd_dfv->add_option("--out", dfvc.out, "Output CSV")->required()->check(kParentExists);
  cmd_dfv->callback([&] {
    run = [&] {
      const auto net = io::read_network_json(dfvc.net);
      const auto xi = dfvc.dist.empty() ? uniform_distribution(net.size()) : io::read_distribution_json(dfvc.dist);
      if (xi.size() != net.size()) throw Error(Errc::LengthMismatch, "--dist length differs from the network size");
      const auto spec = graph::spectrum(net);
      std::vector<graph::DiffusionFrechetVector> vectors;
      for (double t : dfvc.t) vectors.push_back(graph::dfv(spec, xi, t));
      out.add(dfvc.out, io::dfv_csv(net.labels(), vectors));
    };
  });

  // wasserstein
  struct {
    std::string a, b, net, xi, zeta, out;
    double p = 1.0;
  } was;
  auto* cmd_w = app.add_subcommand("wasserstein", "Exact p-Wasserstein distance and optimal plan");
  auto* opt_a = cmd_w->add_option("--a", was.a, "First point CSV")->check(CLI::ExistingFile);
  auto* opt_b = cmd_w->add_option("--b", was.b, "Second point CSV")->check(CLI::ExistingFile);
  auto* opt_net = cmd_w->add_option("--net", was.net, "Network JSON (commute-time base metric)")
                      ->check(CLI::ExistingFile);
  auto* opt_xi = cmd_w->add_option("--xi", was.xi, "First distribution JSON")->check(CLI::ExistingFile);
  auto* opt_zeta = cmd_w->add_option("--zeta", was.zeta, "Second distribution JSON")->check(CLI::ExistingFile);
  opt_a->needs(opt_b);
  opt_b->needs(opt_a);
  opt_net->needs(opt_xi, opt_zeta);
  opt_xi->needs(opt_net);
  opt_zeta->needs(opt_net);
  opt_a->excludes(opt_net);
  cmd_w->add_option("--p", was.p, "Order p >= 1")->check(CLI::Range(1.0, 1e300));
  cmd_w->add_option("--out", was.out, "Output JSON")->required()->check(kParentExists);
  cmd_w->callback([&] {
    if (was.a.empty() && was.net.empty()) throw CLI::ValidationError("--a/--b or --net/--xi/--zeta", "required");
    run = [&] {
      transport::TransportResult result;
      if (!was.a.empty()) {
        result = transport::wasserstein_euclidean(io::read_point_csv(was.a), io::read_point_csv(was.b), was.p);
      } else {
        const auto net = io::read_network_json(was.net);
        result = transport::wasserstein_network(graph::spectrum(net), io::read_distribution_json(was.xi),
                                                io::read_distribution_json(was.zeta), was.p);
      }
      out.add(was.out, io::transport_json(result).dump() + "\n");
    };
  });

  // stability
  struct {
    std::string mode, family = "all", out;
    std::size_t count = 200;
    std::uint64_t seed = 7;
  } stab;
  auto* cmd_stab = app.add_subcommand("stability", "Check the stability inequalities on seeded random instances");
  cmd_stab->add_option("mode", stab.mode, "Optional 'report'")->check(CLI::IsMember({"report"}));
  std::vector<std::string> families = stability::family_names();
  families.insert(families.begin(), "all");
  cmd_stab->add_option("--family", stab.family, "Inequality family or 'all'")->check(CLI::IsMember(families));
  cmd_stab->add_option("--count", stab.count, "Instances per family")->check(CLI::PositiveNumber);
  cmd_stab->add_option("--seed", stab.seed, "64-bit seed");
  cmd_stab->add_option("--out", stab.out, "Output JSON")->required()->check(kParentExists);
  cmd_stab->callback([&] {
    run = [&] {
      std::vector<std::string> chosen;
      if (stab.family == "all") chosen = stability::family_names();
      else chosen.push_back(stab.family);
      json reports = json::array();
      json summary = json::array();
      for (const auto& family : chosen) {
        const auto r = stability::run_family(family, stab.count, stab.seed);
        for (const auto& report : r) reports.push_back(io::report_json(report));
        summary.push_back(io::summary_json(stability::summarize(family, r)));
      }
      json doc = {{"seed", stab.seed}, {"count", stab.count}, {"reports", reports}, {"summary", summary}};
      out.add(stab.out, doc.dump(1) + "\n");
    };
  });

  // cooccur build
  struct {
    std::string in, out;
    double alpha = 0.1;
    bool exclude_self = false;
  } cooc;
  auto* cmd_cooc = app.add_subcommand("cooccur", "Co-occurrence networks");
  cmd_cooc->require_subcommand(1);
  auto* cmd_build = cmd_cooc->add_subcommand("build", "Correlation network sparsified with LANS");
  cmd_build->add_option("--in", cooc.in, "Abundance CSV")->required()->check(CLI::ExistingFile);
  cmd_build->add_option("--out", cooc.out, "Network JSON")->required()->check(kParentExists);
  cmd_build->add_option("--alpha", cooc.alpha, "LANS significance level in (0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  cmd_build->add_flag("--lans-exclude-self", cooc.exclude_self, "Leave the node itself out of F_ij");
  cmd_build->callback([&] {
    if (cooc.alpha <= 0.0) throw CLI::ValidationError("--alpha", "must be positive");
    run = [&] {
      const auto table = io::read_abundance_csv(cooc.in);
      const auto net = cooccurrence::build_pipeline(table, {cooc.alpha, cooc.exclude_self});
      out.add(cooc.out, io::network_json(net));
    };
  });

  // biomarker
  auto* cmd_bio = app.add_subcommand("biomarker", "LDA biomarkers on frequencies (beta) or DFVs (gamma)");
  cmd_bio->require_subcommand(1);

  struct {
    std::string features = "gamma", net, table, labels, out, model, reference;
    double t = biomarker::kReferenceT;
    std::optional<double> threshold;
    std::vector<double> alphas, ts;
    bool exclude_self = false;
  } bio;

  auto* cmd_train = cmd_bio->add_subcommand("train", "Fit an LDA model");
  cmd_train->add_option("--features", bio.features, "beta or gamma")->check(CLI::IsMember({"beta", "gamma"}));
  cmd_train->add_option("--t", bio.t, "Diffusion time for gamma")->check(CLI::PositiveNumber);
  cmd_train->add_option("--net", bio.net, "Network JSON (gamma)")->check(CLI::ExistingFile);
  cmd_train->add_option("--table", bio.table, "Abundance CSV")->required()->check(CLI::ExistingFile);
  cmd_train->add_option("--labels", bio.labels, "Label CSV, 0 healthy / 1 case")->required()->check(CLI::ExistingFile);
  cmd_train->add_option("--threshold", bio.threshold, "Decision threshold stored in the model");
  cmd_train->add_option("--out", bio.out, "Model JSON")->required()->check(kParentExists);
  cmd_train->callback([&] {
    run = [&] {
      const auto table = io::read_abundance_csv(bio.table);
      const auto labels = io::read_labels_csv(bio.labels);
      const auto kind = biomarker::feature_kind_from_string(bio.features);
      std::optional<graph::WeightedNetwork> net;
      if (!bio.net.empty()) net = io::read_network_json(bio.net);
      const auto x = features_for(table, kind, net, bio.t);
      if (labels.size() != table.samples()) throw Error(Errc::LengthMismatch, "--labels needs one label per sample");
      const auto [c0, c1] = biomarker::split_by_label(x, labels);
      auto model = biomarker::fit_lda(c0, c1);
      model.kind = kind;
      model.t = kind == biomarker::FeatureKind::dfv ? bio.t : 0.0;
      model.taxa = table.taxa();
      model.threshold = bio.threshold;
      out.add(bio.out, io::model_json(model).dump(2) + "\n");
    };
  });

  auto load_model_features = [&](const biomarker::LdaModel& model, const cooccurrence::AbundanceTable& table) {
    if (model.taxa != table.taxa()) throw Error(Errc::InvalidArgument, "--table header differs from the model taxa");
    std::optional<graph::WeightedNetwork> net;
    if (!bio.net.empty()) net = io::read_network_json(bio.net);
    return features_for(table, model.kind, net, model.t);
  };

  auto* cmd_score = cmd_bio->add_subcommand("score", "Score samples with a fitted model");
  cmd_score->add_option("--model", bio.model, "Model JSON")->required()->check(CLI::ExistingFile);
  cmd_score->add_option("--net", bio.net, "Network JSON (gamma)")->check(CLI::ExistingFile);
  cmd_score->add_option("--table", bio.table, "Abundance CSV")->required()->check(CLI::ExistingFile);
  cmd_score->add_option("--out", bio.out, "Score CSV")->required()->check(kParentExists);
  cmd_score->callback([&] {
    run = [&] {
      const auto model = io::model_from_json(io::json::parse(io::read_text(bio.model)));
      const auto table = io::read_abundance_csv(bio.table);
      const auto s = biomarker::scores(model, load_model_features(model, table));
      std::string csv = model.threshold ? "score,predicted\n" : "score\n";
      for (double v : s) {
        csv += io::format_double(v);
        if (model.threshold) csv += biomarker::predict(model, v) ? ",1" : ",0";
        csv += '\n';
      }
      out.add(bio.out, csv);
    };
  });

  auto* cmd_roc = cmd_bio->add_subcommand("roc", "ROC curve of a fitted model on labelled samples");
  cmd_roc->add_option("--model", bio.model, "Model JSON")->required()->check(CLI::ExistingFile);
  cmd_roc->add_option("--net", bio.net, "Network JSON (gamma)")->check(CLI::ExistingFile);
  cmd_roc->add_option("--table", bio.table, "Abundance CSV")->required()->check(CLI::ExistingFile);
  cmd_roc->add_option("--labels", bio.labels, "Label CSV")->required()->check(CLI::ExistingFile);
  cmd_roc->add_option("--out", bio.out, "ROC CSV (threshold,fpr,tpr)")->required()->check(kParentExists);
  cmd_roc->callback([&] {
    run = [&] {
      const auto model = io::model_from_json(io::json::parse(io::read_text(bio.model)));
      const auto table = io::read_abundance_csv(bio.table);
      const auto labels = io::read_labels_csv(bio.labels);
      if (labels.size() != table.samples()) throw Error(Errc::LengthMismatch, "--labels needs one label per sample");
      const auto s = biomarker::scores(model, load_model_features(model, table));
      std::vector<double> s0, s1;
      for (std::size_t i = 0; i < s.size(); ++i) (labels[i] ? s1 : s0).push_back(s[i]);
      const auto curve = biomarker::roc(s0, s1);
      out.add(bio.out, io::roc_csv(curve));
      std::cout << "auc " << io::format_double(curve.auc) << "\n";
    };
  });

  auto* cmd_select = cmd_bio->add_subcommand("select", "Grid search of (alpha, t) maximizing gamma AUC");
  cmd_select->add_option("--table", bio.table, "Abundance CSV")->required()->check(CLI::ExistingFile);
  cmd_select->add_option("--labels", bio.labels, "Label CSV")->required()->check(CLI::ExistingFile);
  cmd_select->add_option("--reference", bio.reference, "Abundance CSV the network is built from")
      ->check(CLI::ExistingFile);
  cmd_select->add_option("--alpha", bio.alphas, "LANS level, repeatable")->check(CLI::Range(1e-12, 1.0));
  cmd_select->add_option("--t", bio.ts, "Diffusion time, repeatable")->check(CLI::PositiveNumber);
  cmd_select->add_flag("--lans-exclude-self", bio.exclude_self, "Leave the node itself out of F_ij");
  cmd_select->add_option("--out", bio.out, "Selection JSON")->required()->check(kParentExists);
  cmd_select->callback([&] {
    run = [&] {
      const auto table = io::read_abundance_csv(bio.table);
      const auto labels = io::read_labels_csv(bio.labels);
      biomarker::SelectionOptions options;
      options.lans_exclude_self = bio.exclude_self;
      if (!bio.reference.empty()) options.reference = io::read_abundance_csv(bio.reference);
      const auto sel = biomarker::select_parameters(
          table, labels, bio.alphas.empty() ? biomarker::default_alpha_grid() : bio.alphas,
          bio.ts.empty() ? biomarker::default_t_grid() : bio.ts, options);
      json surface = json::array();
      for (Eigen::Index i = 0; i < sel.surface.rows(); ++i) surface.push_back(column(sel.surface.row(i).transpose()));
      json doc = {{"alpha", sel.alpha}, {"t", sel.t},          {"auc", sel.auc},
                  {"alpha_grid", sel.alpha_grid}, {"t_grid", sel.t_grid}, {"surface", surface}};
      out.add(bio.out, doc.dump(1) + "\n");
    };
  });

  // synth
  struct {
    std::uint64_t seed = 1;
    std::string out, labels_out, reference_out;
    std::vector<double> centers;
    std::size_t dim = 2, per_blob = 50, per_class = 20, reference = 60;
    double sigma = 0.1;
  } syn;
  auto* cmd_syn = app.add_subcommand("synth", "Seeded synthetic inputs");
  cmd_syn->require_subcommand(1);
  auto* cmd_blobs = cmd_syn->add_subcommand("blobs", "Gaussian blobs as a point CSV");
  cmd_blobs->add_option("--centers", syn.centers, "Blob centers, row-major")->required()->expected(1, -1);
  cmd_blobs->add_option("--dim", syn.dim, "Dimension")->check(CLI::PositiveNumber);
  cmd_blobs->add_option("--per-blob", syn.per_blob, "Points per blob")->check(CLI::PositiveNumber);
  cmd_blobs->add_option("--sigma", syn.sigma, "Blob standard deviation")->check(CLI::NonNegativeNumber);
  cmd_blobs->add_option("--seed", syn.seed, "64-bit seed");
  cmd_blobs->add_option("--out", syn.out, "Point CSV")->required()->check(kParentExists);
  cmd_blobs->callback([&] {
    if (syn.centers.size() % syn.dim != 0) throw CLI::ValidationError("--centers", "length must be a multiple of --dim");
    run = [&] {
      const auto coords = synthetic::gaussian_blobs(syn.centers, syn.dim, syn.per_blob, syn.sigma, syn.seed);
      out.add(syn.out, io::point_csv(coords, syn.dim, std::span<const double>{}));
    };
  });
  auto* cmd_planted = cmd_syn->add_subcommand("planted", "Two-class abundance table with a planted community shift");
  cmd_planted->add_option("--per-class", syn.per_class, "Samples per class")->check(CLI::Range(2, 1000000));
  cmd_planted->add_option("--reference", syn.reference, "Healthy reference samples")->check(CLI::Range(3, 1000000));
  cmd_planted->add_option("--seed", syn.seed, "64-bit seed");
  cmd_planted->add_option("--out", syn.out, "Abundance CSV")->required()->check(kParentExists);
  cmd_planted->add_option("--labels-out", syn.labels_out, "Label CSV")->required()->check(kParentExists);
  cmd_planted->add_option("--reference-out", syn.reference_out, "Reference abundance CSV")->check(kParentExists);
  cmd_planted->callback([&] {
    run = [&] {
      synthetic::PlantedBenchmark bench({}, syn.seed);
      if (!syn.reference_out.empty()) out.add(syn.reference_out, io::abundance_csv(bench.reference(syn.reference)));
      const auto d = bench.draw(syn.per_class);
      out.add(syn.out, io::abundance_csv(d.table));
      out.add(syn.labels_out, io::labels_csv(d.labels));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (threads) {
    set_thread_count(*threads);
  } else if (const char* env = std::getenv("DIFFUSCOPE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n <= 0) {
      std::cerr << "error: DIFFUSCOPE_THREADS must be a positive integer\n";
      return 2;
    }
    set_thread_count(static_cast<unsigned>(n));
  }

  try {
    run();
    out.commit();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numeric_failure(e.code()) ? 1 : 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
