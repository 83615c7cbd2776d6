#include "lanecluster/serialize.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include "lanecluster/errors.hpp"
#include "lanecluster/objects.hpp"

namespace lanecluster {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what, const std::string& msg) {
  throw ValidationError(what + ": " + msg + " (schema version " +
                        std::string(kSchemaVersion) + ")");
}

const json& require(const json& obj, const std::string& what, const char* key) {
  if (!obj.is_object()) fail(what, "expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(what, "missing field '" + std::string(key) + "'");
  return *it;
}

void check_fields(const json& obj, const std::string& what,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) fail(what, "expected a JSON object");
  for (const char* k : required)
    if (!obj.contains(k)) fail(what, "missing field '" + std::string(k) + "'");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) fail(what, "unknown field '" + key + "'");
  }
}

void check_version(const json& obj, const std::string& what) {
  const json& v = require(obj, what, "version");
  if (!v.is_string() || v.get<std::string>() != kSchemaVersion)
    fail(what, "unsupported version " + v.dump());
}

double number(const json& j, const std::string& what, const char* field) {
  if (!j.is_number()) fail(what, std::string("field '") + field + "' must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& what, const char* field) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    fail(what, std::string("field '") + field + "' must be a non-negative integer");
  return static_cast<std::size_t>(j.get<long long>());
}

std::uint64_t seed_value(const json& j, const std::string& what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0)
    return static_cast<std::uint64_t>(j.get<long long>());
  fail(what, "field 'seed' must be a non-negative integer");
}

json vec2_to_json(Vec2 v) { return json::array({v.x, v.z}); }

Vec2 vec2_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) fail(what, "expected [x, z]");
  return {number(j[0], what, "x"), number(j[1], what, "z")};
}

json vec3_to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) fail(what, "expected [x, y, z]");
  return {number(j[0], what, "x"), number(j[1], what, "y"), number(j[2], what, "z")};
}

json trace_row_to_json(const DescentTraceRow& row) {
  return json{{"step", row.step},
              {"lane_graph_loss", row.lane_graph_loss},
              {"clustering_loss", row.clustering_loss},
              {"total", row.total}};
}

}  // namespace

json roi_to_json(const RegionOfInterest& roi) {
  return json{{"x_min", roi.x_min}, {"x_max", roi.x_max},
              {"z_min", roi.z_min}, {"z_max", roi.z_max}};
}

RegionOfInterest roi_from_json(const json& j) {
  const std::string what = "roi";
  check_fields(j, what, {"x_min", "x_max", "z_min", "z_max"});
  RegionOfInterest roi;
  roi.x_min = number(j.at("x_min"), what, "x_min");
  roi.x_max = number(j.at("x_max"), what, "x_max");
  roi.z_min = number(j.at("z_min"), what, "z_min");
  roi.z_max = number(j.at("z_max"), what, "z_max");
  roi.validate();
  return roi;
}

json graph_to_json(const LaneGraph& graph) {
  json curves = json::array();
  for (const BezierCurve& c : graph.curves)
    curves.push_back(json::array(
        {vec2_to_json(c.p0), vec2_to_json(c.p1), vec2_to_json(c.p2)}));
  json edges = json::array();
  for (const auto& [i, j] : graph.edges()) edges.push_back(json::array({i, j}));
  json out{{"curves", curves}, {"incidence", edges}};
  if (graph.existence) out["existence"] = *graph.existence;
  return out;
}

LaneGraph graph_from_json(const json& j) {
  const std::string what = "graph";
  check_fields(j, what, {"curves", "incidence"}, {"existence"});
  const json& curves = j.at("curves");
  if (!curves.is_array()) fail(what, "field 'curves' must be an array");
  std::vector<BezierCurve> cs;
  for (const json& cj : curves) {
    if (!cj.is_array() || cj.size() != 3) fail(what, "each curve needs 3 control points");
    try {
      cs.push_back(BezierCurve{vec2_from_json(cj[0], what), vec2_from_json(cj[1], what),
                               vec2_from_json(cj[2], what)});
    } catch (const std::invalid_argument& e) {
      fail(what, e.what());
    }
  }
  LaneGraph graph(std::move(cs));
  const json& edges = j.at("incidence");
  if (!edges.is_array()) fail(what, "field 'incidence' must be an array");
  for (const json& ej : edges) {
    if (!ej.is_array() || ej.size() != 2) fail(what, "each incidence entry must be [i, j]");
    try {
      graph.connect(count(ej[0], what, "incidence"), count(ej[1], what, "incidence"));
    } catch (const std::exception& e) {
      fail(what, e.what());
    }
  }
  if (j.contains("existence")) {
    const json& ex = j.at("existence");
    if (!ex.is_array()) fail(what, "field 'existence' must be an array");
    std::vector<double> probs;
    for (const json& ej : ex) probs.push_back(number(ej, what, "existence"));
    graph.existence = std::move(probs);
  }
  try {
    graph.validate();
  } catch (const std::exception& e) {
    fail(what, e.what());
  }
  return graph;
}

json matrix_to_json(const Matrix& m) {
  json values = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    values.push_back(std::move(row));
  }
  return json{{"rows", m.rows}, {"cols", m.cols}, {"values", values}};
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  check_fields(j, what, {"rows", "cols", "values"});
  const std::size_t rows = count(j.at("rows"), what, "rows");
  const std::size_t cols = count(j.at("cols"), what, "cols");
  const json& values = j.at("values");
  if (!values.is_array() || values.size() != rows)
    fail(what, "field 'values' must hold 'rows' rows");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = values[r];
    if (!row.is_array() || row.size() != cols)
      fail(what, "matrix row has wrong length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = number(row[c], what, "values");
  }
  return m;
}

json box_to_json(const DetectionBox& box) {
  json corners = json::array();
  for (const Vec3& c : box.corners) corners.push_back(vec3_to_json(c));
  return json{{"center", vec3_to_json(box.center)},
              {"corners", corners},
              {"class_id", box.class_id},
              {"confidence", box.confidence}};
}

DetectionBox box_from_json(const json& j) {
  const std::string what = "object";
  check_fields(j, what, {"center", "corners", "class_id", "confidence"});
  DetectionBox box;
  box.center = vec3_from_json(j.at("center"), what);
  const json& corners = j.at("corners");
  if (!corners.is_array() || corners.size() != 8) fail(what, "expected 8 corners");
  for (std::size_t i = 0; i < 8; ++i) box.corners[i] = vec3_from_json(corners[i], what);
  if (!j.at("class_id").is_number_integer())
    fail(what, "field 'class_id' must be an integer");
  box.class_id = j.at("class_id").get<int>();
  box.confidence = number(j.at("confidence"), what, "confidence");
  validate_box(box);
  return box;
}

json scene_to_json(const Scene& scene) {
  json objects = json::array();
  for (const DetectionBox& box : scene.objects) objects.push_back(box_to_json(box));
  return json{{"version", kSchemaVersion},
              {"roi", roi_to_json(scene.roi)},
              {"graph", graph_to_json(scene.gt_graph)},
              {"objects", objects},
              {"gen_membership", matrix_to_json(scene.gen_membership)}};
}

Scene scene_from_json(const json& j) {
  const std::string what = "scene";
  check_fields(j, what, {"version", "roi", "graph", "objects", "gen_membership"});
  check_version(j, what);
  Scene scene;
  scene.roi = roi_from_json(j.at("roi"));
  scene.gt_graph = graph_from_json(j.at("graph"));
  const json& objects = j.at("objects");
  if (!objects.is_array()) fail(what, "field 'objects' must be an array");
  for (const json& oj : objects) scene.objects.push_back(box_from_json(oj));
  scene.gen_membership = matrix_from_json(j.at("gen_membership"), "gen_membership");
  if (scene.gen_membership.rows != scene.objects.size())
    fail(what, "gen_membership row count must equal object count");
  if (scene.gen_membership.cols != scene.gt_graph.size() + 1)
    fail(what, "gen_membership must have one column per curve plus outlier");
  return scene;
}

json spec_to_json(const SceneSpec& spec) {
  const char* pattern = "parallel";
  switch (spec.pattern) {
    case LanePattern::parallel: pattern = "parallel"; break;
    case LanePattern::fork: pattern = "fork"; break;
    case LanePattern::merge: pattern = "merge"; break;
    case LanePattern::mixed: pattern = "mixed"; break;
  }
  return json{{"version", kSchemaVersion},
              {"n_lanes", spec.n_lanes},
              {"pattern", pattern},
              {"lane_gap", spec.lane_gap},
              {"objects_per_lane", spec.objects_per_lane},
              {"lateral_noise_sigma", spec.lateral_noise_sigma},
              {"n_outliers", spec.n_outliers},
              {"footprint", json::array({spec.footprint_length, spec.footprint_width})},
              {"seed", spec.seed}};
}

SceneSpec spec_from_json(const json& j) {
  const std::string what = "scene spec";
  check_fields(j, what,
               {"version", "n_lanes", "pattern", "lane_gap", "objects_per_lane",
                "lateral_noise_sigma", "n_outliers", "footprint", "seed"});
  check_version(j, what);
  SceneSpec spec;
  spec.n_lanes = count(j.at("n_lanes"), what, "n_lanes");
  const json& pj = j.at("pattern");
  if (!pj.is_string()) fail(what, "field 'pattern' must be a string");
  const std::string pattern = pj.get<std::string>();
  if (pattern == "parallel") spec.pattern = LanePattern::parallel;
  else if (pattern == "fork") spec.pattern = LanePattern::fork;
  else if (pattern == "merge") spec.pattern = LanePattern::merge;
  else if (pattern == "mixed") spec.pattern = LanePattern::mixed;
  else fail(what, "unknown pattern '" + pattern + "'");
  spec.lane_gap = number(j.at("lane_gap"), what, "lane_gap");
  spec.objects_per_lane = count(j.at("objects_per_lane"), what, "objects_per_lane");
  spec.lateral_noise_sigma = number(j.at("lateral_noise_sigma"), what, "lateral_noise_sigma");
  spec.n_outliers = count(j.at("n_outliers"), what, "n_outliers");
  const json& fp = j.at("footprint");
  if (!fp.is_array() || fp.size() != 2) fail(what, "field 'footprint' must be [length, width]");
  spec.footprint_length = number(fp[0], what, "footprint");
  spec.footprint_width = number(fp[1], what, "footprint");
  spec.seed = seed_value(j.at("seed"), what);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail(what, e.what());
  }
  return spec;
}

json graph_file_to_json(const LaneGraph& graph, const RegionOfInterest& roi) {
  return json{{"version", kSchemaVersion},
              {"roi", roi_to_json(roi)},
              {"graph", graph_to_json(graph)}};
}

std::pair<LaneGraph, RegionOfInterest> graph_file_from_json(const json& j) {
  if (j.is_object() && j.contains("objects")) {
    Scene scene = scene_from_json(j);
    return {std::move(scene.gt_graph), scene.roi};
  }
  const std::string what = "graph file";
  check_fields(j, what, {"version", "roi", "graph"});
  check_version(j, what);
  return {graph_from_json(j.at("graph")), roi_from_json(j.at("roi"))};
}

json membership_file_to_json(const MembershipMatrix& m) {
  return json{{"version", kSchemaVersion}, {"membership", matrix_to_json(m)}};
}

MembershipMatrix membership_file_from_json(const json& j) {
  const std::string what = "membership file";
  check_fields(j, what, {"version", "membership"});
  check_version(j, what);
  MembershipMatrix m = matrix_from_json(j.at("membership"), "membership");
  if (!is_one_hot(m)) fail(what, "membership rows must be one-hot");
  return m;
}

json match_to_json(const GraphMatch& match) {
  return json{{"version", kSchemaVersion},
              {"est_to_gt", match.est_to_gt},
              {"gt_to_est", match.gt_to_est}};
}

GraphMatch match_from_json(const json& j) {
  const std::string what = "match file";
  check_fields(j, what, {"version", "est_to_gt", "gt_to_est"});
  check_version(j, what);
  GraphMatch match;
  const json& eg = j.at("est_to_gt");
  const json& ge = j.at("gt_to_est");
  if (!eg.is_array() || !ge.is_array()) fail(what, "index maps must be arrays");
  for (const json& v : eg) {
    if (!v.is_number_integer()) fail(what, "est_to_gt entries must be integers");
    match.est_to_gt.push_back(v.get<int>());
  }
  for (const json& v : ge) {
    if (!v.is_number_integer()) fail(what, "gt_to_est entries must be integers");
    match.gt_to_est.push_back(v.get<int>());
  }
  return match;
}

json bundle_to_json(const LabelBundle& bundle) {
  return json{{"version", kSchemaVersion},
              {"z_star", matrix_to_json(bundle.z_star)},
              {"z_bar", matrix_to_json(bundle.z_bar)},
              {"match",
               {{"est_to_gt", bundle.match.est_to_gt},
                {"gt_to_est", bundle.match.gt_to_est}}},
              {"losses",
               {{"lane_graph_loss", bundle.losses.lane_graph_loss},
                {"clustering_loss", bundle.losses.clustering_loss},
                {"refine_loss", bundle.losses.refine_loss},
                {"total", bundle.losses.total},
                {"alpha", bundle.losses.alpha}}}};
}

json eval_to_json(const EvalReport& report) {
  json per = json::array();
  for (const ThresholdPr& row : report.per_threshold)
    per.push_back(json{{"threshold", row.threshold},
                       {"precision", row.precision},
                       {"recall", row.recall}});
  return json{{"version", kSchemaVersion},
              {"m_f", report.m_f},
              {"detect", report.detect},
              {"c_f", report.c_f},
              {"per_threshold", per}};
}

json em_state_to_json(const EmState& state) {
  json curves = json::array();
  for (const BezierCurve& c : state.curves)
    curves.push_back(json::array(
        {vec2_to_json(c.p0), vec2_to_json(c.p1), vec2_to_json(c.p2)}));
  return json{{"version", kSchemaVersion},
              {"curves", curves},
              {"mixing", state.mixing},
              {"responsibilities", matrix_to_json(state.responsibilities)},
              {"log_likelihood", state.log_likelihood},
              {"iterations", state.iterations},
              {"monotonicity_violations", state.monotonicity_violations}};
}

json descent_to_json(const DescentResult& result, const RegionOfInterest& roi) {
  json trace = json::array();
  for (const DescentTraceRow& row : result.trace) trace.push_back(trace_row_to_json(row));
  return json{{"version", kSchemaVersion},
              {"roi", roi_to_json(roi)},
              {"graph", graph_to_json(result.graph)},
              {"trace", trace}};
}

LogitMatrix logits_file_from_json(const json& j) {
  const std::string what = "logits file";
  check_fields(j, what, {"version", "logits"});
  check_version(j, what);
  return matrix_from_json(j.at("logits"), "logits");
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path + ": cannot open for writing");
  out << content;
  if (!out.good()) throw ValidationError(path + ": write failed");
}

}  // namespace lanecluster
