#include "sloloop/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json_fields.hpp"

namespace sloloop {

using namespace detail;

namespace {

constexpr TokenTable<ModelKind, 2> kModels{{{
    {ModelKind::heavy, "heavy"},
    {ModelKind::light, "light"},
}}};

constexpr TokenTable<FaultKind, 2> kFaultKinds{{{
    {FaultKind::network_latency, "network_latency"},
    {FaultKind::cpu_pressure, "cpu_pressure"},
}}};

CameraConfig parse_camera(const json& c, const std::string& path) {
  CameraConfig cam;
  cam.id = get_string(c, "id", path);
  cam.ar_per_hour = get_number(c, "ar_per_hour", path);
  cam.frame_rate = get_number_or(c, "frame_rate", path, cam.frame_rate);
  cam.detector = get_string_or(c, "detector", path, "");
  cam.detector = detector_id(cam);
  return cam;
}

Tick get_tick(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer())
    fail(ErrorCode::syntax, fmt::format("{}.{}: expected an integer", path, key));
  return v.get<Tick>();
}

void check(bool ok, const std::string& message) {
  if (!ok) fail(ErrorCode::invalid_value, message);
}

}  // namespace

std::string detector_id(const CameraConfig& c) {
  return c.detector.empty() ? "md-" + c.id : c.detector;
}

std::string_view to_string(ModelKind m) { return kModels.name(m); }
std::string_view to_string(FaultKind k) { return kFaultKinds.name(k); }

const NodeProfile* Scenario::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<NodeProfile> default_nodes() {
  return {{"camera", 1, 1, 1.0}, {"edge", 4, 8, 1.0}, {"cloud", 8, 16, 10.0}};
}

void validate_scenario(const Scenario& s) {
  check(!s.cameras.empty(), "scenario: camera list is empty");
  check(s.horizon_ticks >= 1, "scenario: horizon_ticks must be >= 1");
  check(std::isfinite(s.event_duration_s) && s.event_duration_s > 0,
        "scenario: event_duration_s must be > 0");
  check(std::isfinite(s.frame_size_kb) && s.frame_size_kb >= 0, "scenario: frame_size_kb must be >= 0");

  std::set<std::string> ids;
  auto claim = [&](const std::string& id, const std::string& what) {
    if (id.empty()) fail(ErrorCode::invalid_value, fmt::format("{}: empty id", what));
    if (!ids.insert(id).second)
      fail(ErrorCode::duplicate_id, fmt::format("{}: duplicate id '{}'", what, id));
  };
  for (const auto& n : s.nodes) {
    claim(n.id, "nodes");
    check(n.cpu_cores > 0 && n.ram_gb > 0 && n.link_gbps > 0,
          fmt::format("node '{}': profile values must be positive", n.id));
  }
  for (const char* required : {"edge", "cloud"})
    if (!s.find_node(required))
      fail(ErrorCode::dangling_reference, fmt::format("scenario: node '{}' is not defined", required));

  const RecognizerConfig& r = s.recognizer;
  claim(r.id, "recognizer");
  check(r.replicas >= 1, "recognizer: replicas must be >= 1");
  check(r.heavy_service_s > 0 && r.light_service_s > 0, "recognizer: service times must be > 0");
  check(r.heavy_accuracy >= 0 && r.heavy_accuracy <= 1 && r.light_accuracy >= 0 &&
            r.light_accuracy <= 1,
        "recognizer: accuracies must lie in [0, 1]");
  check(r.accuracy_noise >= 0, "recognizer: accuracy_noise must be >= 0");
  check(!r.queue_cap || *r.queue_cap >= 1, "recognizer: queue_cap must be >= 1");

  auto claim_camera = [&](const CameraConfig& c) {
    claim(c.id, "cameras");
    claim(detector_id(c), "cameras");
    check(std::isfinite(c.ar_per_hour) && c.ar_per_hour >= 0 && c.ar_per_hour <= kMaxArPerHour,
          fmt::format("camera '{}': ar_per_hour must lie in [0, {}]", c.id, kMaxArPerHour));
    check(std::isfinite(c.frame_rate) && c.frame_rate > 0,
          fmt::format("camera '{}': frame_rate must be > 0", c.id));
  };
  for (const auto& c : s.cameras) claim_camera(c);
  for (const auto& m : s.mutations) {
    check(m.tick >= 0, "mutation: tick must be >= 0");
    for (const auto& c : m.add_cameras) claim_camera(c);
  }

  const std::string cloud = "cloud";
  for (std::size_t i = 0; i < s.faults.size(); ++i) {
    const FaultSpec& f = s.faults[i];
    if (!ids.contains(f.target))
      fail(ErrorCode::dangling_reference, fmt::format("faults[{}]: unknown target '{}'", i, f.target));
    check(std::isfinite(f.magnitude) && f.magnitude > 0,
          fmt::format("faults[{}]: magnitude must be > 0", i));
    check(f.t0 < f.t1, fmt::format("faults[{}]: t0 must be < t1", i));
    if (f.kind == FaultKind::cpu_pressure)
      check(f.target == r.id || f.target == cloud,
            fmt::format("faults[{}]: cpu_pressure applies to '{}' or its node only", i, r.id));
    for (std::size_t j = 0; j < i; ++j) {
      const FaultSpec& g = s.faults[j];
      if (g.kind == f.kind && g.target == f.target && f.t0 < g.t1 && g.t0 < f.t1)
        fail(ErrorCode::invalid_value,
             fmt::format("faults[{}]: overlaps faults[{}] ({} on '{}')", i, j, to_string(f.kind),
                         f.target));
    }
  }
}

Scenario parse_scenario(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::syntax, fmt::format("scenario syntax error at byte {}: {}", e.byte, e.what()));
  }
  if (!root.is_object()) fail(ErrorCode::syntax, "scenario root must be an object");

  Scenario s;
  if (root.contains("seed")) {
    const json& v = root.at("seed");
    if (!v.is_number_unsigned()) fail(ErrorCode::syntax, "seed: expected a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }
  if (root.contains("horizon_ticks")) s.horizon_ticks = get_tick(root, "horizon_ticks", "scenario");
  s.event_duration_s = get_number_or(root, "event_duration_s", "scenario", s.event_duration_s);
  s.frame_size_kb = get_number_or(root, "frame_size_kb", "scenario", s.frame_size_kb);

  // Defaults keep their order; listed nodes override them or are appended.
  s.nodes = default_nodes();
  const auto& node_list = get_array_or_empty(root, "nodes");
  std::set<std::string> seen_nodes;
  for (std::size_t i = 0; i < node_list.size(); ++i) {
    const std::string path = fmt::format("nodes[{}]", i);
    NodeProfile n;
    n.id = get_string(node_list[i], "id", path);
    if (!seen_nodes.insert(n.id).second)
      fail(ErrorCode::duplicate_id, fmt::format("{}: duplicate id '{}'", path, n.id));
    auto slot = std::find_if(s.nodes.begin(), s.nodes.end(),
                             [&](const NodeProfile& x) { return x.id == n.id; });
    const NodeProfile base = slot != s.nodes.end() ? *slot : NodeProfile{n.id};
    n.cpu_cores = get_int_or(node_list[i], "cpu_cores", path, base.cpu_cores);
    n.ram_gb = get_int_or(node_list[i], "ram_gb", path, base.ram_gb);
    n.link_gbps = get_number_or(node_list[i], "link_gbps", path, base.link_gbps);
    if (slot != s.nodes.end())
      *slot = n;
    else
      s.nodes.push_back(n);
  }

  const auto& cameras = get_array_or_empty(root, "cameras");
  for (std::size_t i = 0; i < cameras.size(); ++i)
    s.cameras.push_back(parse_camera(cameras[i], fmt::format("cameras[{}]", i)));

  if (root.contains("recognizer")) {
    const json& r = root.at("recognizer");
    const std::string path = "recognizer";
    RecognizerConfig& rc = s.recognizer;
    rc.id = get_string_or(r, "id", path, rc.id);
    rc.replicas = get_int_or(r, "replicas", path, rc.replicas);
    if (r.contains("model")) rc.model = get_token(r, "model", path, kModels);
    if (r.contains("service_times")) {
      const json& st = r.at("service_times");
      rc.heavy_service_s = get_number_or(st, "heavy", path + ".service_times", rc.heavy_service_s);
      rc.light_service_s = get_number_or(st, "light", path + ".service_times", rc.light_service_s);
    }
    if (r.contains("accuracies")) {
      const json& acc = r.at("accuracies");
      rc.heavy_accuracy = get_number_or(acc, "heavy", path + ".accuracies", rc.heavy_accuracy);
      rc.light_accuracy = get_number_or(acc, "light", path + ".accuracies", rc.light_accuracy);
    }
    rc.accuracy_noise = get_number_or(r, "accuracy_noise", path, rc.accuracy_noise);
    if (r.contains("queue_cap") && !r.at("queue_cap").is_null())
      rc.queue_cap = get_int_or(r, "queue_cap", path, 0);
  }

  const auto& faults = get_array_or_empty(root, "faults");
  for (std::size_t i = 0; i < faults.size(); ++i) {
    const std::string path = fmt::format("faults[{}]", i);
    const json& f = faults[i];
    s.faults.push_back({get_token(f, "kind", path, kFaultKinds), get_string(f, "target", path),
                        get_number(f, "magnitude", path), get_tick(f, "t0", path),
                        get_tick(f, "t1", path)});
  }

  const auto& mutations = get_array_or_empty(root, "mutations");
  for (std::size_t i = 0; i < mutations.size(); ++i) {
    const std::string path = fmt::format("mutations[{}]", i);
    Mutation m;
    m.tick = get_tick(mutations[i], "tick", path);
    const auto& added = get_array_or_empty(mutations[i], "add_cameras");
    for (std::size_t k = 0; k < added.size(); ++k)
      m.add_cameras.push_back(parse_camera(added[k], fmt::format("{}.add_cameras[{}]", path, k)));
    s.mutations.push_back(std::move(m));
  }

  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, fmt::format("cannot open scenario '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string render_scenario(const Scenario& s) {
  auto camera_json = [](const CameraConfig& c) {
    return json{{"id", c.id}, {"ar_per_hour", c.ar_per_hour}, {"frame_rate", c.frame_rate},
                {"detector", detector_id(c)}};
  };
  json root{{"seed", s.seed},
            {"horizon_ticks", s.horizon_ticks},
            {"event_duration_s", s.event_duration_s},
            {"frame_size_kb", s.frame_size_kb}};
  root["nodes"] = json::array();
  for (const auto& n : s.nodes)
    root["nodes"].push_back(
        {{"id", n.id}, {"cpu_cores", n.cpu_cores}, {"ram_gb", n.ram_gb}, {"link_gbps", n.link_gbps}});
  root["cameras"] = json::array();
  for (const auto& c : s.cameras) root["cameras"].push_back(camera_json(c));
  const RecognizerConfig& r = s.recognizer;
  root["recognizer"] = {{"id", r.id},
                        {"replicas", r.replicas},
                        {"model", to_string(r.model)},
                        {"service_times", {{"heavy", r.heavy_service_s}, {"light", r.light_service_s}}},
                        {"accuracies", {{"heavy", r.heavy_accuracy}, {"light", r.light_accuracy}}},
                        {"accuracy_noise", r.accuracy_noise}};
  root["recognizer"]["queue_cap"] = r.queue_cap ? json(*r.queue_cap) : json(nullptr);
  root["faults"] = json::array();
  for (const auto& f : s.faults)
    root["faults"].push_back({{"kind", to_string(f.kind)}, {"target", f.target},
                              {"magnitude", f.magnitude}, {"t0", f.t0}, {"t1", f.t1}});
  root["mutations"] = json::array();
  for (const auto& m : s.mutations) {
    json added = json::array();
    for (const auto& c : m.add_cameras) added.push_back(camera_json(c));
    root["mutations"].push_back({{"tick", m.tick}, {"add_cameras", added}});
  }
  return root.dump(2) + "\n";
}

}  // namespace sloloop
