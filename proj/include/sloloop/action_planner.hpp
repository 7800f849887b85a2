#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sloloop/descriptor.hpp"
#include "sloloop/root_cause.hpp"

namespace sloloop {

struct PlannedAction {
  std::string action;  // ActionSpec id
  RootCause cause;
  Tick issued_tick = 0;
  Tick cooldown_until = 0;  // issued_tick + cooldown_ticks
};

/// Per-action cooldown deadlines. An action is ready when now >= its deadline.
class CooldownBook {
 public:
  bool ready(const std::string& action_id, Tick now) const;
  void start(const ActionSpec& action, Tick issued);
  std::optional<Tick> until(const std::string& action_id) const;

 private:
  std::map<std::string, Tick> until_;
};

/// Current value of the setting an action would change, as far as the
/// actuator knows; nullopt when unknown.
using CurrentSetting = std::function<std::optional<double>(const ActionSpec&)>;

struct ActionPlan {
  std::vector<PlannedAction> actions;  // at most one
  std::vector<std::string> warnings;
};

/// For the top cause, takes the first remediation entry matching (violated
/// SLO, cause) and walks its actions by priority (list order on ties). The
/// first one that is off cooldown and would change the current setting is
/// planned. No matching entry yields an empty plan and a warning.
ActionPlan infer_actions(const Descriptor& d, const std::vector<RootCause>& causes,
                         const CooldownBook& cooldowns, Tick now,
                         const CurrentSetting& current = {});

}  // namespace sloloop
