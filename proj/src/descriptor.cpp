#include "sloloop/descriptor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "json_fields.hpp"
#include "sloloop/errors.hpp"

namespace sloloop {

using nlohmann::json;

namespace {

using namespace detail;


constexpr TokenTable<ComponentKind, 4> kKinds{{{
    {ComponentKind::host, "host"},
    {ComponentKind::pod, "pod"},
    {ComponentKind::service, "service"},
    {ComponentKind::metric_source, "metric-source"},
}}};

constexpr TokenTable<MetricLevel, 2> kLevels{{{
    {MetricLevel::application, "application"},
    {MetricLevel::infrastructure, "infrastructure"},
}}};

constexpr TokenTable<CompareOp, 5> kOps{{{
    {CompareOp::lt, "<"},
    {CompareOp::le, "<="},
    {CompareOp::gt, ">"},
    {CompareOp::ge, ">="},
    {CompareOp::eq, "=="},
}}};

constexpr TokenTable<ActionLevel, 2> kActionLevels{{{
    {ActionLevel::infrastructure, "infrastructure"},
    {ActionLevel::application, "application"},
}}};

constexpr TokenTable<ActionVerb, 5> kVerbs{{{
    {ActionVerb::scale_replicas, "scale_replicas"},
    {ActionVerb::set_resource_limit, "set_resource_limit"},
    {ActionVerb::set_frame_rate, "set_frame_rate"},
    {ActionVerb::switch_model, "switch_model"},
    {ActionVerb::set_queue_cap, "set_queue_cap"},
}}};

}  // namespace

std::string_view to_string(ComponentKind v) { return kKinds.name(v); }
std::string_view to_string(MetricLevel v) { return kLevels.name(v); }
std::string_view to_string(CompareOp v) { return kOps.name(v); }
std::string_view to_string(ActionLevel v) { return kActionLevels.name(v); }
std::string_view to_string(ActionVerb v) { return kVerbs.name(v); }

std::optional<ComponentKind> parse_component_kind(std::string_view t) { return kKinds.parse(t); }
std::optional<MetricLevel> parse_metric_level(std::string_view t) { return kLevels.parse(t); }
std::optional<CompareOp> parse_compare_op(std::string_view t) { return kOps.parse(t); }
std::optional<ActionLevel> parse_action_level(std::string_view t) { return kActionLevels.parse(t); }
std::optional<ActionVerb> parse_action_verb(std::string_view t) { return kVerbs.parse(t); }

ActionLevel level_of(ActionVerb verb) {
  switch (verb) {
    case ActionVerb::scale_replicas:
    case ActionVerb::set_resource_limit:
      return ActionLevel::infrastructure;
    case ActionVerb::set_frame_rate:
    case ActionVerb::switch_model:
    case ActionVerb::set_queue_cap:
      return ActionLevel::application;
  }
  return ActionLevel::application;
}

bool lower_is_better(CompareOp op) { return op == CompareOp::lt || op == CompareOp::le; }

bool SloCondition::satisfied_by(double value) const {
  switch (op) {
    case CompareOp::lt: return value < threshold;
    case CompareOp::le: return value <= threshold;
    case CompareOp::gt: return value > threshold;
    case CompareOp::ge: return value >= threshold;
    case CompareOp::eq: return value == threshold;
  }
  return false;
}

bool RemediationEntry::matches(std::string_view slo_id, const MetricKey& cause) const {
  if (slo != slo_id) return false;
  if (cause_component != kWildcard && cause_component != cause.component) return false;
  if (cause_metric != kWildcard && cause_metric != cause.metric) return false;
  return true;
}

const ComponentRef* Descriptor::find_component(std::string_view id) const {
  auto it = std::find_if(components.begin(), components.end(),
                         [&](const ComponentRef& c) { return c.id == id; });
  return it == components.end() ? nullptr : &*it;
}

const MetricSpec* Descriptor::find_metric(const MetricKey& key) const {
  auto it = std::find_if(metrics.begin(), metrics.end(),
                         [&](const MetricSpec& m) { return m.key() == key; });
  return it == metrics.end() ? nullptr : &*it;
}

const SloCondition* Descriptor::find_slo(std::string_view id) const {
  auto it = std::find_if(slos.begin(), slos.end(),
                         [&](const SloCondition& s) { return s.id == id; });
  return it == slos.end() ? nullptr : &*it;
}

const ActionSpec* Descriptor::find_action(std::string_view id) const {
  auto it = std::find_if(actions.begin(), actions.end(),
                         [&](const ActionSpec& a) { return a.id == id; });
  return it == actions.end() ? nullptr : &*it;
}

void validate_descriptor(const Descriptor& d) {
  std::set<std::string> component_ids;
  for (const auto& c : d.components) {
    if (c.id.empty()) fail(ErrorCode::invalid_value, "component id must be non-empty");
    if (c.id == kWildcard) fail(ErrorCode::invalid_value, "component id '*' is reserved");
    if (!component_ids.insert(c.id).second)
      fail(ErrorCode::duplicate_id, fmt::format("duplicate component id '{}'", c.id));
  }

  std::set<MetricKey> metric_keys;
  std::set<std::string> metric_names;
  for (const auto& m : d.metrics) {
    if (m.name.empty()) fail(ErrorCode::invalid_value, "metric name must be non-empty");
    if (!component_ids.contains(m.component))
      fail(ErrorCode::dangling_reference,
           fmt::format("metric '{}' references unknown component '{}'", m.name, m.component));
    if (!metric_keys.insert(m.key()).second)
      fail(ErrorCode::duplicate_id,
           fmt::format("duplicate metric '{}' on component '{}'", m.name, m.component));
    metric_names.insert(m.name);
  }

  std::set<std::string> slo_ids;
  for (const auto& s : d.slos) {
    if (s.id.empty()) fail(ErrorCode::invalid_value, "slo id must be non-empty");
    if (!slo_ids.insert(s.id).second)
      fail(ErrorCode::duplicate_id, fmt::format("duplicate slo id '{}'", s.id));
    if (!metric_keys.contains(s.key()))
      fail(ErrorCode::dangling_reference,
           fmt::format("slo '{}' references unknown metric '{}' on component '{}'", s.id,
                       s.metric, s.component));
    if (!std::isfinite(s.threshold))
      fail(ErrorCode::invalid_value, fmt::format("slo '{}' threshold must be finite", s.id));
    if (s.debounce_ticks < 1)
      fail(ErrorCode::invalid_value, fmt::format("slo '{}' debounce_ticks must be >= 1", s.id));
  }

  std::set<std::string> action_ids;
  for (const auto& a : d.actions) {
    if (a.id.empty()) fail(ErrorCode::invalid_value, "action id must be non-empty");
    if (!action_ids.insert(a.id).second)
      fail(ErrorCode::duplicate_id, fmt::format("duplicate action id '{}'", a.id));
    if (!component_ids.contains(a.target))
      fail(ErrorCode::dangling_reference,
           fmt::format("action '{}' references unknown target '{}'", a.id, a.target));
    if (level_of(a.verb) != a.level)
      fail(ErrorCode::invalid_value,
           fmt::format("action '{}': verb '{}' is not a {}-level verb", a.id, to_string(a.verb),
                       to_string(a.level)));
    if (!std::isfinite(a.parameter))
      fail(ErrorCode::invalid_value, fmt::format("action '{}' parameter must be finite", a.id));
    if (a.cooldown_ticks < 0)
      fail(ErrorCode::invalid_value,
           fmt::format("action '{}' cooldown_ticks must be >= 0", a.id));
  }

  for (const auto& dep : d.dependencies) {
    for (const auto* end : {&dep.from, &dep.to})
      if (!component_ids.contains(*end))
        fail(ErrorCode::dangling_reference,
             fmt::format("dependency references unknown component '{}'", *end));
  }

  for (const auto& r : d.remediation) {
    if (!slo_ids.contains(r.slo))
      fail(ErrorCode::dangling_reference,
           fmt::format("remediation references unknown slo '{}'", r.slo));
    if (r.cause_component != kWildcard && !component_ids.contains(r.cause_component))
      fail(ErrorCode::dangling_reference,
           fmt::format("remediation for '{}' references unknown component '{}'", r.slo,
                       r.cause_component));
    if (r.cause_metric != kWildcard && !metric_names.contains(r.cause_metric))
      fail(ErrorCode::dangling_reference,
           fmt::format("remediation for '{}' references unknown metric '{}'", r.slo,
                       r.cause_metric));
    if (r.actions.empty())
      fail(ErrorCode::invalid_value,
           fmt::format("remediation for '{}' must reference at least one action", r.slo));
    for (const auto& id : r.actions)
      if (!action_ids.contains(id))
        fail(ErrorCode::dangling_reference,
             fmt::format("remediation for '{}' references unknown action '{}'", r.slo, id));
  }
}

Descriptor parse_descriptor(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::syntax, fmt::format("descriptor syntax error at byte {}: {}", e.byte, e.what()));
  }
  if (!root.is_object()) fail(ErrorCode::syntax, "descriptor root must be an object");

  Descriptor d;
  const auto& components = get_array_or_empty(root, "components");
  for (std::size_t i = 0; i < components.size(); ++i) {
    const std::string path = fmt::format("components[{}]", i);
    const json& c = components[i];
    d.components.push_back({get_string(c, "id", path), get_token(c, "kind", path, kKinds)});
  }

  const auto& metrics = get_array_or_empty(root, "metrics");
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const std::string path = fmt::format("metrics[{}]", i);
    const json& m = metrics[i];
    d.metrics.push_back({get_string(m, "name", path), get_string(m, "component", path),
                         get_token(m, "level", path, kLevels),
                         get_string_or(m, "unit", path, "")});
  }

  const auto& slos = get_array_or_empty(root, "slos");
  for (std::size_t i = 0; i < slos.size(); ++i) {
    const std::string path = fmt::format("slos[{}]", i);
    const json& s = slos[i];
    SloCondition slo;
    slo.id = get_string(s, "id", path);
    slo.metric = get_string(s, "metric", path);
    slo.component = get_string(s, "component", path);
    slo.op = get_token(s, "op", path, kOps);
    slo.threshold = get_number(s, "threshold", path);
    slo.debounce_ticks = get_int_or(s, "debounce_ticks", path, kDefaultDebounceTicks);
    d.slos.push_back(std::move(slo));
  }

  const auto& actions = get_array_or_empty(root, "actions");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const std::string path = fmt::format("actions[{}]", i);
    const json& a = actions[i];
    ActionSpec action;
    action.id = get_string(a, "id", path);
    action.level = get_token(a, "level", path, kActionLevels);
    action.verb = get_token(a, "verb", path, kVerbs);
    action.target = get_string(a, "target", path);
    action.parameter = get_number(a, "parameter", path);
    action.priority = get_int_or(a, "priority", path, 0);
    action.cooldown_ticks = get_int_or(a, "cooldown_ticks", path, kDefaultCooldownTicks);
    d.actions.push_back(std::move(action));
  }

  const auto& deps = get_array_or_empty(root, "dependencies");
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const json& pair = deps[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
      fail(ErrorCode::syntax, fmt::format("dependencies[{}]: expected [\"from\", \"to\"]", i));
    d.dependencies.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
  }

  const auto& remediation = get_array_or_empty(root, "remediation");
  for (std::size_t i = 0; i < remediation.size(); ++i) {
    const std::string path = fmt::format("remediation[{}]", i);
    const json& r = remediation[i];
    RemediationEntry entry;
    entry.slo = get_string(r, "slo", path);
    entry.cause_component = get_string_or(r, "cause_component", path, std::string(kWildcard));
    entry.cause_metric = get_string_or(r, "cause_metric", path, std::string(kWildcard));
    const json& ids = require(r, "actions", path);
    if (!ids.is_array()) fail(ErrorCode::syntax, fmt::format("{}.actions: expected an array", path));
    for (const auto& id : ids) {
      if (!id.is_string())
        fail(ErrorCode::syntax, fmt::format("{}.actions: expected action id strings", path));
      entry.actions.push_back(id.get<std::string>());
    }
    d.remediation.push_back(std::move(entry));
  }

  validate_descriptor(d);
  return d;
}

Descriptor load_descriptor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, fmt::format("cannot open descriptor '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_descriptor(buf.str());
}

std::string render_descriptor(const Descriptor& d) {
  json root = json::object();
  root["components"] = json::array();
  for (const auto& c : d.components)
    root["components"].push_back({{"id", c.id}, {"kind", to_string(c.kind)}});
  root["metrics"] = json::array();
  for (const auto& m : d.metrics)
    root["metrics"].push_back({{"name", m.name},
                               {"component", m.component},
                               {"level", to_string(m.level)},
                               {"unit", m.unit}});
  root["slos"] = json::array();
  for (const auto& s : d.slos)
    root["slos"].push_back({{"id", s.id},
                            {"metric", s.metric},
                            {"component", s.component},
                            {"op", to_string(s.op)},
                            {"threshold", s.threshold},
                            {"debounce_ticks", s.debounce_ticks}});
  root["actions"] = json::array();
  for (const auto& a : d.actions)
    root["actions"].push_back({{"id", a.id},
                               {"level", to_string(a.level)},
                               {"verb", to_string(a.verb)},
                               {"target", a.target},
                               {"parameter", a.parameter},
                               {"priority", a.priority},
                               {"cooldown_ticks", a.cooldown_ticks}});
  root["dependencies"] = json::array();
  for (const auto& dep : d.dependencies) root["dependencies"].push_back({dep.from, dep.to});
  root["remediation"] = json::array();
  for (const auto& r : d.remediation)
    root["remediation"].push_back({{"slo", r.slo},
                                   {"cause_component", r.cause_component},
                                   {"cause_metric", r.cause_metric},
                                   {"actions", r.actions}});
  return root.dump(2) + "\n";
}

std::vector<std::string> validate_remediation(const Descriptor& d) {
  std::vector<std::string> warnings;
  for (const auto& s : d.slos) {
    bool mapped = std::any_of(d.remediation.begin(), d.remediation.end(),
                              [&](const RemediationEntry& r) { return r.slo == s.id; });
    if (!mapped)
      warnings.push_back(
          fmt::format("slo '{}' has no remediation entry; violations are report-only", s.id));
  }
  return warnings;
}

}  // namespace sloloop
