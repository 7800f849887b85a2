#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sloloop/types.hpp"

namespace sloloop {

struct NodeProfile {
  std::string id;
  int cpu_cores = 1;
  int ram_gb = 1;
  double link_gbps = 1.0;
  bool operator==(const NodeProfile&) const = default;
};

// Appearances are thinned from a one-per-second candidate process.
inline constexpr double kMaxArPerHour = 3600.0;

struct CameraConfig {
  std::string id;
  double ar_per_hour = 0.0;  // expected animal appearances per hour
  double frame_rate = 5.0;   // frames per second forwarded while motion is active
  std::string detector;      // motion detector id; "md-<camera id>" when empty
  bool operator==(const CameraConfig&) const = default;
};

std::string detector_id(const CameraConfig& c);

enum class ModelKind { heavy, light };

std::string_view to_string(ModelKind m);

struct RecognizerConfig {
  std::string id = "recognizer";
  int replicas = 1;
  ModelKind model = ModelKind::heavy;
  double heavy_service_s = 0.35;  // mean seconds per frame
  double light_service_s = 0.12;
  double heavy_accuracy = 0.92;
  double light_accuracy = 0.80;
  double accuracy_noise = 0.01;  // standard deviation of the per-tick reading
  std::optional<int> queue_cap;
  bool operator==(const RecognizerConfig&) const = default;

  double base_service(ModelKind m) const { return m == ModelKind::heavy ? heavy_service_s : light_service_s; }
  double accuracy(ModelKind m) const { return m == ModelKind::heavy ? heavy_accuracy : light_accuracy; }
};

enum class FaultKind { network_latency, cpu_pressure };

std::string_view to_string(FaultKind k);

/// Active on [t0, t1). Latency adds `magnitude` seconds to frame transport;
/// CPU pressure multiplies recognizer service time by `magnitude`.
struct FaultSpec {
  FaultKind kind = FaultKind::network_latency;
  std::string target;
  double magnitude = 0.0;
  Tick t0 = 0;
  Tick t1 = 0;
  bool active_at(double time) const { return time >= static_cast<double>(t0) && time < static_cast<double>(t1); }
  bool operator==(const FaultSpec&) const = default;
};

/// Topology change applied at the start of `tick`.
struct Mutation {
  Tick tick = 0;
  std::vector<CameraConfig> add_cameras;
  bool operator==(const Mutation&) const = default;
};

/// Node defaults: camera 1 CPU / 1 GB, edge 4 CPU / 8 GB at 1 Gbps, cloud
/// 8 CPU / 16 GB at 10 Gbps.
std::vector<NodeProfile> default_nodes();

struct Scenario {
  std::uint64_t seed = 1;
  Tick horizon_ticks = 3600;
  double event_duration_s = 10.0;
  double frame_size_kb = 50.0;
  std::vector<NodeProfile> nodes = default_nodes();  // "camera", "edge", "cloud"
  std::vector<CameraConfig> cameras;
  RecognizerConfig recognizer;
  std::vector<FaultSpec> faults;
  std::vector<Mutation> mutations;
  bool operator==(const Scenario&) const = default;

  const NodeProfile* find_node(std::string_view id) const;
};

/// Parses a scenario JSON document. Missing nodes fall back to the defaults.
/// Throws Error (syntax, invalid_token, invalid_value, duplicate_id,
/// dangling_reference) like descriptor parsing.
Scenario parse_scenario(std::string_view document);
Scenario load_scenario(const std::string& path);
std::string render_scenario(const Scenario& s);

/// Structural checks shared by the parser and World construction.
void validate_scenario(const Scenario& s);

}  // namespace sloloop
