#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sloloop/descriptor.hpp"
#include "sloloop/errors.hpp"

namespace sloloop {

enum class AckStatus { applied, rejected, failed };

std::string_view to_string(AckStatus s);

struct Ack {
  AckStatus status = AckStatus::applied;
  std::string reason;             // empty when applied
  std::optional<ErrorCode> code;  // unsupported, invalid_value, not_found, ...
  bool changed = false;           // applied with a state change

  static Ack applied_ok(bool changed) { return {AckStatus::applied, {}, std::nullopt, changed}; }
  static Ack rejected(ErrorCode code, std::string reason) {
    return {AckStatus::rejected, std::move(reason), code, false};
  }
  static Ack failed(std::string reason) {
    return {AckStatus::failed, std::move(reason), std::nullopt, false};
  }
};

/// Reason a parameter is out of range for the verb, if it is.
std::optional<std::string> check_parameter(ActionVerb verb, double parameter);

/// Boundary through which planned actions change the world. apply() checks
/// capabilities and parameter ranges before the implementation sees the
/// action, so rejected actions never touch target state.
class Actuator {
 public:
  virtual ~Actuator() = default;

  virtual std::set<ActionVerb> capabilities() const = 0;
  bool supports(ActionVerb verb) const { return capabilities().contains(verb); }

  Ack apply(const ActionSpec& action, Tick tick);

  /// Current value of the setting `action` controls; nullopt when unknown.
  virtual std::optional<double> current(const ActionSpec&) const { return std::nullopt; }

  std::size_t calls() const { return calls_; }

 protected:
  virtual Ack do_apply(const ActionSpec& action, Tick tick) = 0;

 private:
  std::size_t calls_ = 0;
};

/// Writes `tick,action_id,verb,target,parameter,ack` per call. Without an
/// inner actuator every verb is accepted and nothing changes.
class LoggingActuator : public Actuator {
 public:
  explicit LoggingActuator(std::ostream* log = nullptr, Actuator* inner = nullptr)
      : log_(log), inner_(inner) {}

  std::set<ActionVerb> capabilities() const override;
  std::optional<double> current(const ActionSpec& action) const override;
  const std::vector<std::string>& lines() const { return lines_; }

 protected:
  Ack do_apply(const ActionSpec& action, Tick tick) override;

 private:
  std::ostream* log_;
  Actuator* inner_;
  std::vector<std::string> lines_;
};

/// Stands in for an external orchestrator: records the reconfiguration request
/// it would send and acknowledges it. Wiring a real cluster client goes here.
class OrchestratorStubActuator : public Actuator {
 public:
  std::set<ActionVerb> capabilities() const override;
  std::optional<double> current(const ActionSpec& action) const override;
  const std::vector<std::string>& requests() const { return requests_; }

 protected:
  Ack do_apply(const ActionSpec& action, Tick tick) override;

 private:
  std::vector<std::string> requests_;
  std::map<std::pair<std::string, ActionVerb>, double> state_;
};

}  // namespace sloloop
