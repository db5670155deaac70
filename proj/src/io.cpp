#include "diffuscope/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "diffuscope/error.hpp"

namespace diffuscope::io {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

double parse_number(const std::string& field, std::size_t line_no) {
  if (field == "inf" || field == "+inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": '" + field + "' is not a number");
  }
  return value;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("invalid JSON: ") + e.what());
  }
}

template <class F>
auto with_json_errors(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("malformed JSON document: ") + e.what());
  }
}

}  // namespace

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path() && !fs::exists(path.parent_path())) {
    throw Error(Errc::Io, "directory '" + path.parent_path().string() + "' does not exist");
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(Errc::Io, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(Errc::Io, "cannot move output into '" + path.string() + "': " + ec.message());
  }
}

EmpiricalMeasure parse_point_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(Errc::Parse, "point CSV needs a header row");
  const auto header = split(lines[0]);
  const bool weighted = !header.empty() && header.back() == "weight";
  const std::size_t dim = header.size() - (weighted ? 1 : 0);
  if (dim == 0) throw Error(Errc::Parse, "point CSV has no coordinate columns");
  if (lines.size() == 1) throw Error(Errc::EmptySupport, "point CSV has no rows");
  std::vector<double> coords, weights;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r]);
    if (fields.size() != header.size()) {
      throw Error(Errc::Parse, "line " + std::to_string(r + 1) + ": expected " +
                                   std::to_string(header.size()) + " columns");
    }
    for (std::size_t k = 0; k < dim; ++k) coords.push_back(parse_number(fields[k], r + 1));
    if (weighted) weights.push_back(parse_number(fields.back(), r + 1));
  }
  const std::size_t n = coords.size() / dim;
  if (!weighted) weights.assign(n, 1.0 / static_cast<double>(n));
  return EmpiricalMeasure(dim, std::move(coords), std::move(weights));
}

EmpiricalMeasure read_point_csv(const fs::path& path) { return parse_point_csv(read_text(path)); }

std::string point_csv(std::span<const double> coords, std::size_t dim, std::span<const double> weights) {
  std::string out;
  for (std::size_t k = 0; k < dim; ++k) out += (k ? ",x" : "x") + std::to_string(k + 1);
  if (!weights.empty()) out += ",weight";
  out += '\n';
  const std::size_t n = coords.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      if (k) out += ',';
      out += format_double(coords[i * dim + k]);
    }
    if (!weights.empty()) out += ',' + format_double(weights[i]);
    out += '\n';
  }
  return out;
}

VertexDistribution parse_distribution_json(const std::string& text) {
  const json doc = parse_json(text);
  return with_json_errors([&] {
    if (!doc.contains("probs")) throw Error(Errc::Parse, "distribution JSON needs a 'probs' array");
    return VertexDistribution(doc.at("probs").get<std::vector<double>>());
  });
}

VertexDistribution read_distribution_json(const fs::path& path) {
  return parse_distribution_json(read_text(path));
}

std::string distribution_json(const VertexDistribution& xi) {
  return json{{"probs", std::vector<double>(xi.probs().begin(), xi.probs().end())}}.dump() + "\n";
}

graph::WeightedNetwork parse_network_json(const std::string& text) {
  const json doc = parse_json(text);
  return with_json_errors([&] {
    auto labels = doc.at("labels").get<std::vector<std::string>>();
    std::vector<graph::Edge> edges;
    for (const json& e : doc.at("edges")) {
      const auto i = e.at("i").get<long long>();
      const auto j = e.at("j").get<long long>();
      if (i < 0 || j < 0) throw Error(Errc::InvalidNetwork, "negative node index");
      if (i == j) throw Error(Errc::InvalidNetwork, "self-loop at node " + std::to_string(i));
      if (i > j) throw Error(Errc::InvalidNetwork, "edges must be listed with i < j");
      edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), e.at("w").get<double>()});
    }
    return graph::WeightedNetwork::from_edges(std::move(labels), edges);
  });
}

graph::WeightedNetwork read_network_json(const fs::path& path) {
  return parse_network_json(read_text(path));
}

std::string network_json(const graph::WeightedNetwork& net) {
  json edges = json::array();
  for (const auto& e : net.edges()) edges.push_back({{"i", e.i}, {"j", e.j}, {"w", e.w}});
  return json{{"labels", net.labels()}, {"edges", edges}}.dump(2) + "\n";
}

cooccurrence::AbundanceTable parse_abundance_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(Errc::Parse, "abundance CSV needs a header of taxon labels");
  auto taxa = split(lines[0]);
  Eigen::MatrixXd counts(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(taxa.size()));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r]);
    if (fields.size() != taxa.size()) {
      throw Error(Errc::Parse, "line " + std::to_string(r + 1) + ": expected " +
                                   std::to_string(taxa.size()) + " columns");
    }
    for (std::size_t k = 0; k < fields.size(); ++k) {
      counts(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(k)) = parse_number(fields[k], r + 1);
    }
  }
  return cooccurrence::AbundanceTable(std::move(taxa), std::move(counts));
}

cooccurrence::AbundanceTable read_abundance_csv(const fs::path& path) {
  return parse_abundance_csv(read_text(path));
}

std::string abundance_csv(const cooccurrence::AbundanceTable& table) {
  std::string out;
  for (std::size_t k = 0; k < table.taxa().size(); ++k) out += (k ? "," : "") + table.taxa()[k];
  out += '\n';
  const auto& c = table.counts();
  for (Eigen::Index r = 0; r < c.rows(); ++r) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) out += (k ? "," : "") + format_double(c(r, k));
    out += '\n';
  }
  return out;
}

std::vector<int> parse_labels_csv(const std::string& text) {
  auto lines = lines_of(text);
  std::vector<int> labels;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const std::string field = trim(lines[r]);
    if (r == 0 && field == "label") continue;
    if (field == "0") labels.push_back(0);
    else if (field == "1") labels.push_back(1);
    else throw Error(Errc::Parse, "line " + std::to_string(r + 1) + ": label must be 0 or 1");
  }
  return labels;
}

std::vector<int> read_labels_csv(const fs::path& path) { return parse_labels_csv(read_text(path)); }

std::string labels_csv(const std::vector<int>& labels) {
  std::string out = "label\n";
  for (int l : labels) out += std::to_string(l) + "\n";
  return out;
}

std::string field_csv(const euclid::FrechetField& field) {
  std::string out;
  for (std::size_t k = 0; k < field.dim(); ++k) out += "x" + std::to_string(k + 1) + ",";
  out += "value\n";
  for (std::size_t idx = 0; idx < field.values.size(); ++idx) {
    for (double x : field.grid.point(idx)) out += format_double(x) + ",";
    out += format_double(field.values[idx]) + "\n";
  }
  return out;
}

std::string dfv_csv(const std::vector<std::string>& labels,
                    const std::vector<graph::DiffusionFrechetVector>& vectors) {
  std::string out = "label";
  if (vectors.size() == 1) {
    out += ",value";
  } else {
    for (const auto& v : vectors) out += ",t=" + format_double(v.t);
  }
  out += '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += labels[i];
    for (const auto& v : vectors) out += "," + format_double(v.values.at(i));
    out += '\n';
  }
  return out;
}

json transport_json(const transport::TransportResult& result) {
  json plan = json::array();
  const auto& m = result.plan.matrix;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) > 0.0) plan.push_back({i, j, m(i, j)});
  return {{"p", result.p}, {"cost", result.cost}, {"plan", plan}};
}

json model_json(const biomarker::LdaModel& model) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j = {{"direction", vec(model.direction)},
            {"feature_kind", biomarker::to_string(model.kind)},
            {"t", model.t},
            {"taxa", model.taxa},
            {"class_means", {vec(model.mean0), vec(model.mean1)}},
            {"regularization", model.regularization}};
  j["threshold"] = model.threshold ? json(*model.threshold) : json(nullptr);
  return j;
}

biomarker::LdaModel model_from_json(const json& j) {
  return with_json_errors([&] {
    auto vec = [](const json& a) {
      const auto v = a.get<std::vector<double>>();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    biomarker::LdaModel model;
    model.direction = vec(j.at("direction"));
    model.kind = biomarker::feature_kind_from_string(j.at("feature_kind").get<std::string>());
    model.t = j.at("t").get<double>();
    model.taxa = j.at("taxa").get<std::vector<std::string>>();
    model.mean0 = vec(j.at("class_means").at(0));
    model.mean1 = vec(j.at("class_means").at(1));
    model.regularization = j.value("regularization", 0.0);
    if (j.contains("threshold") && !j.at("threshold").is_null()) model.threshold = j.at("threshold").get<double>();
    if (model.direction.size() == 0 || static_cast<std::size_t>(model.direction.size()) != model.taxa.size()) {
      throw Error(Errc::Parse, "model direction length must match its taxa");
    }
    return model;
  });
}

std::string roc_csv(const biomarker::RocCurve& curve) {
  std::string out = "threshold,fpr,tpr\n";
  for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
    out += format_double(curve.thresholds[k]) + "," + format_double(curve.fpr[k]) + "," +
           format_double(curve.tpr[k]) + "\n";
  }
  return out;
}

json report_json(const stability::BoundReport& r) {
  return {{"family", r.family},           {"lhs", r.lhs},
          {"rhs", r.rhs},                 {"slack", r.slack},
          {"instance_digest", r.instance_digest}, {"satisfied", r.satisfied}};
}

json summary_json(const stability::FamilySummary& s) {
  return {{"family", s.family},
          {"count", s.count},
          {"violations", s.violations},
          {"min_slack_ratio", std::isfinite(s.min_slack_ratio) ? json(s.min_slack_ratio) : json(nullptr)},
          {"all_satisfied", s.all_satisfied}};
}

}  // namespace diffuscope::io
