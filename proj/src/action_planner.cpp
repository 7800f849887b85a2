#include "sloloop/action_planner.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "sloloop/errors.hpp"

namespace sloloop {

bool CooldownBook::ready(const std::string& action_id, Tick now) const {
  auto it = until_.find(action_id);
  return it == until_.end() || now >= it->second;
}

void CooldownBook::start(const ActionSpec& action, Tick issued) {
  until_[action.id] = issued + action.cooldown_ticks;
}

std::optional<Tick> CooldownBook::until(const std::string& action_id) const {
  auto it = until_.find(action_id);
  if (it == until_.end()) return std::nullopt;
  return it->second;
}

ActionPlan infer_actions(const Descriptor& d, const std::vector<RootCause>& causes,
                         const CooldownBook& cooldowns, Tick now, const CurrentSetting& current) {
  if (causes.empty()) throw Error(ErrorCode::invalid_value, "infer_actions needs a root cause");
  ActionPlan plan;
  const RootCause& top = causes.front();

  auto entry = std::find_if(d.remediation.begin(), d.remediation.end(),
                            [&](const RemediationEntry& e) { return e.matches(top.slo, top.metric); });
  if (entry == d.remediation.end()) {
    plan.warnings.push_back(fmt::format("no remediation for SLO '{}' with cause {}; report only",
                                        top.slo, top.summary()));
    return plan;
  }

  std::vector<const ActionSpec*> ordered;
  for (const auto& id : entry->actions)
    if (const ActionSpec* a = d.find_action(id)) ordered.push_back(a);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ActionSpec* a, const ActionSpec* b) { return a->priority < b->priority; });

  for (const ActionSpec* a : ordered) {
    if (!cooldowns.ready(a->id, now)) continue;
    if (current) {
      const auto value = current(*a);
      if (value && *value == a->parameter) continue;  // already in effect
    }
    plan.actions.push_back({a->id, top, now, now + a->cooldown_ticks});
    break;
  }
  return plan;
}

}  // namespace sloloop
