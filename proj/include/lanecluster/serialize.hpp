#pragma once

#include <string>
#include <utility>

#include "json.hpp"

#include "lanecluster/em_fit.hpp"
#include "lanecluster/lane_graph.hpp"
#include "lanecluster/matching.hpp"
#include "lanecluster/matrix.hpp"
#include "lanecluster/metrics.hpp"
#include "lanecluster/pipeline.hpp"
#include "lanecluster/scenegen.hpp"

namespace lanecluster {

/// All file schemas carry {"version": "1"}. Parsers are strict: a missing or
/// unknown field, a version mismatch, or a wrong JSON type raises
/// ValidationError naming the field and the schema version. Serialized
/// doubles use the shortest representation that parses back to the same
/// value, so serialize-parse round-trips are exact and output files are
/// byte-stable.
inline constexpr const char* kSchemaVersion = "1";

nlohmann::json roi_to_json(const RegionOfInterest& roi);
RegionOfInterest roi_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const LaneGraph& graph);
LaneGraph graph_from_json(const nlohmann::json& j);

/// {"rows": R, "cols": C, "values": [[...], ...]}; keeps the column count
/// through empty matrices.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);

nlohmann::json box_to_json(const DetectionBox& box);
DetectionBox box_from_json(const nlohmann::json& j);

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

nlohmann::json spec_to_json(const SceneSpec& spec);
SceneSpec spec_from_json(const nlohmann::json& j);

/// Standalone graph file {"version", "roi", "graph"}. Parsing also accepts a
/// full scene file (its embedded graph and ROI are taken) so generated
/// scenes can stand in for predictions.
nlohmann::json graph_file_to_json(const LaneGraph& graph, const RegionOfInterest& roi);
std::pair<LaneGraph, RegionOfInterest> graph_file_from_json(const nlohmann::json& j);

nlohmann::json membership_file_to_json(const MembershipMatrix& m);
MembershipMatrix membership_file_from_json(const nlohmann::json& j);

nlohmann::json match_to_json(const GraphMatch& match);
GraphMatch match_from_json(const nlohmann::json& j);

nlohmann::json bundle_to_json(const LabelBundle& bundle);
nlohmann::json eval_to_json(const EvalReport& report);
nlohmann::json em_state_to_json(const EmState& state);
nlohmann::json descent_to_json(const DescentResult& result, const RegionOfInterest& roi);

LogitMatrix logits_file_from_json(const nlohmann::json& j);

/// Parses a file; JSON syntax errors and unreadable paths raise
/// ValidationError with the parser's position diagnostics.
nlohmann::json load_json_file(const std::string& path);
std::string dump_json(const nlohmann::json& j);  // 2-space indent, trailing newline
void write_text_file(const std::string& path, const std::string& content);

}  // namespace lanecluster
