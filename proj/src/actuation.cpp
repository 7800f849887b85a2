#include "sloloop/actuation.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace sloloop {

std::string_view to_string(AckStatus s) {
  switch (s) {
    case AckStatus::applied: return "applied";
    case AckStatus::rejected: return "rejected";
    case AckStatus::failed: return "failed";
  }
  return "?";
}

std::optional<std::string> check_parameter(ActionVerb verb, double p) {
  if (!std::isfinite(p)) return "parameter must be finite";
  switch (verb) {
    case ActionVerb::scale_replicas:
      if (p < 1 || p != std::floor(p)) return fmt::format("replicas must be an integer >= 1, got {}", p);
      break;
    case ActionVerb::set_resource_limit:
      if (p <= 0) return fmt::format("resource limit must be > 0, got {}", p);
      break;
    case ActionVerb::set_frame_rate:
      if (p <= 0) return fmt::format("frame rate must be > 0, got {}", p);
      break;
    case ActionVerb::switch_model:
      if (p != 0 && p != 1) return fmt::format("model must be 0 (heavy) or 1 (light), got {}", p);
      break;
    case ActionVerb::set_queue_cap:
      if (p < 1 || p != std::floor(p)) return fmt::format("queue cap must be an integer >= 1, got {}", p);
      break;
  }
  return std::nullopt;
}

Ack Actuator::apply(const ActionSpec& action, Tick tick) {
  ++calls_;
  if (!supports(action.verb))
    return Ack::rejected(ErrorCode::unsupported,
                         fmt::format("verb {} is not supported", to_string(action.verb)));
  if (auto reason = check_parameter(action.verb, action.parameter))
    return Ack::rejected(ErrorCode::invalid_value, *reason);
  return do_apply(action, tick);
}

namespace {

const std::set<ActionVerb> kAllVerbs{ActionVerb::scale_replicas, ActionVerb::set_resource_limit,
                                     ActionVerb::set_frame_rate, ActionVerb::switch_model,
                                     ActionVerb::set_queue_cap};

}  // namespace

std::set<ActionVerb> LoggingActuator::capabilities() const {
  return inner_ ? inner_->capabilities() : kAllVerbs;
}

std::optional<double> LoggingActuator::current(const ActionSpec& action) const {
  return inner_ ? inner_->current(action) : std::nullopt;
}

Ack LoggingActuator::do_apply(const ActionSpec& action, Tick tick) {
  const Ack ack = inner_ ? inner_->apply(action, tick) : Ack::applied_ok(false);
  std::string line = fmt::format("{},{},{},{},{},{}", tick, action.id, to_string(action.verb),
                                 action.target, format_number(action.parameter),
                                 to_string(ack.status));
  if (log_) *log_ << line << '\n';
  lines_.push_back(std::move(line));
  return ack;
}

std::set<ActionVerb> OrchestratorStubActuator::capabilities() const { return kAllVerbs; }

std::optional<double> OrchestratorStubActuator::current(const ActionSpec& action) const {
  auto it = state_.find({action.target, action.verb});
  if (it == state_.end()) return std::nullopt;
  return it->second;
}

Ack OrchestratorStubActuator::do_apply(const ActionSpec& action, Tick tick) {
  std::string request;
  const std::string value = format_number(action.parameter);
  switch (action.verb) {
    case ActionVerb::scale_replicas:
      request = fmt::format("PATCH deployment/{} spec.replicas={}", action.target, value);
      break;
    case ActionVerb::set_resource_limit:
      request = fmt::format("PATCH deployment/{} resources.limits.cpu={}", action.target, value);
      break;
    case ActionVerb::set_frame_rate:
      request = fmt::format("PATCH configmap/{} frame_rate={}", action.target, value);
      break;
    case ActionVerb::switch_model:
      request = fmt::format("PATCH configmap/{} model={}", action.target,
                            action.parameter == 0 ? "heavy" : "light");
      break;
    case ActionVerb::set_queue_cap:
      request = fmt::format("PATCH configmap/{} queue_cap={}", action.target, value);
      break;
  }
  requests_.push_back(fmt::format("{} {}", tick, request));
  auto [it, inserted] = state_.try_emplace({action.target, action.verb}, action.parameter);
  const bool changed = inserted || it->second != action.parameter;
  it->second = action.parameter;
  return Ack::applied_ok(changed);
}

}  // namespace sloloop
