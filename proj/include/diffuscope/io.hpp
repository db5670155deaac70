#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffuscope/biomarker.hpp"
#include "diffuscope/cooccurrence.hpp"
#include "diffuscope/euclid_diffusion.hpp"
#include "diffuscope/graph_diffusion.hpp"
#include "diffuscope/measures.hpp"
#include "diffuscope/stability.hpp"
#include "diffuscope/transport.hpp"

// File formats. Numbers are written with 17 significant digits so every
// writer round-trips exactly through its loader. Writers go through a
// temporary file and a rename, so a failed run leaves no partial output.
namespace diffuscope::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value);

std::string read_text(const fs::path& path);
void write_atomic(const fs::path& path, const std::string& content);

/// Header row required; d coordinate columns and an optional trailing
/// `weight` column. Without weights the measure is uniform.
EmpiricalMeasure read_point_csv(const fs::path& path);
EmpiricalMeasure parse_point_csv(const std::string& text);
std::string point_csv(std::span<const double> coords, std::size_t dim,
                      std::span<const double> weights = {});

/// {"probs": [...]}
VertexDistribution read_distribution_json(const fs::path& path);
VertexDistribution parse_distribution_json(const std::string& text);
std::string distribution_json(const VertexDistribution& xi);

/// {"labels": [...], "edges": [{"i": int, "j": int, "w": float}, ...]} with i < j.
graph::WeightedNetwork read_network_json(const fs::path& path);
graph::WeightedNetwork parse_network_json(const std::string& text);
std::string network_json(const graph::WeightedNetwork& net);

/// Header of taxon labels, one row of counts per sample.
cooccurrence::AbundanceTable read_abundance_csv(const fs::path& path);
cooccurrence::AbundanceTable parse_abundance_csv(const std::string& text);
std::string abundance_csv(const cooccurrence::AbundanceTable& table);

/// One 0/1 label per line, optional `label` header.
std::vector<int> read_labels_csv(const fs::path& path);
std::vector<int> parse_labels_csv(const std::string& text);
std::string labels_csv(const std::vector<int>& labels);

/// Rows x1,...,xd,value.
std::string field_csv(const euclid::FrechetField& field);

/// label,value for one scale; label,t=<t1>,t=<t2>,... for several.
std::string dfv_csv(const std::vector<std::string>& labels,
                    const std::vector<graph::DiffusionFrechetVector>& vectors);

/// {"p": ..., "cost": ..., "plan": [[i, j, mass], ...]} listing positive entries.
json transport_json(const transport::TransportResult& result);

json model_json(const biomarker::LdaModel& model);
biomarker::LdaModel model_from_json(const json& j);

/// threshold,fpr,tpr
std::string roc_csv(const biomarker::RocCurve& curve);

json report_json(const stability::BoundReport& report);
json summary_json(const stability::FamilySummary& summary);

}  // namespace diffuscope::io
