#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sloloop/types.hpp"

namespace sloloop {

enum class ComponentKind { host, pod, service, metric_source };
enum class MetricLevel { application, infrastructure };
enum class CompareOp { lt, le, gt, ge, eq };
enum class ActionLevel { infrastructure, application };
enum class ActionVerb {
  scale_replicas,
  set_resource_limit,
  set_frame_rate,
  switch_model,
  set_queue_cap,
};

struct ComponentRef {
  std::string id;
  ComponentKind kind = ComponentKind::service;
  bool operator==(const ComponentRef&) const = default;
};

struct MetricSpec {
  std::string name;
  std::string component;
  MetricLevel level = MetricLevel::application;
  std::string unit;

  MetricKey key() const { return {component, name}; }
  bool operator==(const MetricSpec&) const = default;
};

inline constexpr int kDefaultDebounceTicks = 3;
inline constexpr int kDefaultCooldownTicks = 10;

/// One SLO: `metric` on `component` compared against `threshold`.
/// `debounce_ticks` consecutive failing evaluations are needed before the
/// condition is reported as violated.
struct SloCondition {
  std::string id;
  std::string metric;
  std::string component;
  CompareOp op = CompareOp::le;
  double threshold = 0.0;
  int debounce_ticks = kDefaultDebounceTicks;

  MetricKey key() const { return {component, metric}; }
  bool satisfied_by(double value) const;
  bool operator==(const SloCondition&) const = default;
};

struct ActionSpec {
  std::string id;
  ActionLevel level = ActionLevel::infrastructure;
  ActionVerb verb = ActionVerb::scale_replicas;
  std::string target;
  double parameter = 0.0;
  int priority = 0;  // lower is tried first
  int cooldown_ticks = kDefaultCooldownTicks;
  bool operator==(const ActionSpec&) const = default;
};

struct Dependency {
  std::string from;
  std::string to;
  bool operator==(const Dependency&) const = default;
};

inline constexpr std::string_view kWildcard = "*";

/// Maps a violated SLO plus a root-cause pattern to an ordered list of
/// candidate actions. Either pattern field may be the wildcard "*".
struct RemediationEntry {
  std::string slo;
  std::string cause_component{kWildcard};
  std::string cause_metric{kWildcard};
  std::vector<std::string> actions;

  bool matches(std::string_view slo_id, const MetricKey& cause) const;
  bool operator==(const RemediationEntry&) const = default;
};

struct Descriptor {
  std::vector<ComponentRef> components;
  std::vector<MetricSpec> metrics;
  std::vector<SloCondition> slos;
  std::vector<ActionSpec> actions;
  std::vector<Dependency> dependencies;
  std::vector<RemediationEntry> remediation;

  const ComponentRef* find_component(std::string_view id) const;
  const MetricSpec* find_metric(const MetricKey& key) const;
  const SloCondition* find_slo(std::string_view id) const;
  const ActionSpec* find_action(std::string_view id) const;

  bool operator==(const Descriptor&) const = default;
};

/// Parses and cross-validates a descriptor JSON document. Throws sloloop::Error
/// (syntax, invalid_token, dangling_reference, duplicate_id, invalid_value);
/// never returns a partially populated model.
Descriptor parse_descriptor(std::string_view document);

/// Reads and parses a descriptor file.
Descriptor load_descriptor(const std::string& path);

/// Canonical JSON rendering; parse_descriptor(render_descriptor(d)) == d.
std::string render_descriptor(const Descriptor& d);

/// Structural validation shared by the parser. Throws on the first problem.
void validate_descriptor(const Descriptor& d);

/// One warning per SLO that has no remediation entry.
std::vector<std::string> validate_remediation(const Descriptor& d);

std::string_view to_string(ComponentKind v);
std::string_view to_string(MetricLevel v);
std::string_view to_string(CompareOp v);
std::string_view to_string(ActionLevel v);
std::string_view to_string(ActionVerb v);

std::optional<ComponentKind> parse_component_kind(std::string_view token);
std::optional<MetricLevel> parse_metric_level(std::string_view token);
std::optional<CompareOp> parse_compare_op(std::string_view token);
std::optional<ActionLevel> parse_action_level(std::string_view token);
std::optional<ActionVerb> parse_action_verb(std::string_view token);

ActionLevel level_of(ActionVerb verb);

// True when a smaller observed value is the better outcome for this operator.
bool lower_is_better(CompareOp op);

}  // namespace sloloop
