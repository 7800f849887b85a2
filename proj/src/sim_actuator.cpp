#include "sloloop/sim_actuator.hpp"

#include <fmt/format.h>

namespace sloloop {

std::set<ActionVerb> SimActuator::capabilities() const {
  return {ActionVerb::scale_replicas, ActionVerb::set_frame_rate, ActionVerb::switch_model,
          ActionVerb::set_queue_cap};
}

std::optional<double> SimActuator::current(const ActionSpec& action) const {
  const bool recognizer = action.target == world_.scenario().recognizer.id;
  switch (action.verb) {
    case ActionVerb::scale_replicas:
      if (recognizer) return world_.replicas();
      break;
    case ActionVerb::switch_model:
      if (recognizer) return world_.model() == ModelKind::heavy ? 0.0 : 1.0;
      break;
    case ActionVerb::set_queue_cap:
      if (recognizer && world_.queue_cap()) return *world_.queue_cap();
      break;
    case ActionVerb::set_frame_rate:
      return world_.frame_rate(action.target);
    case ActionVerb::set_resource_limit:
      break;
  }
  return std::nullopt;
}

Ack SimActuator::do_apply(const ActionSpec& action, Tick) {
  const std::string& recognizer = world_.scenario().recognizer.id;
  if (action.verb != ActionVerb::set_frame_rate && action.target != recognizer)
    return Ack::rejected(ErrorCode::not_found,
                         fmt::format("{} targets '{}', not the recognizer", to_string(action.verb),
                                     action.target));
  const auto before = current(action);
  switch (action.verb) {
    case ActionVerb::scale_replicas: {
      const int n = static_cast<int>(action.parameter);
      if (n > world_.max_replicas())
        return Ack::rejected(ErrorCode::invalid_value,
                             fmt::format("replicas {} exceed the cloud node's {} cores", n,
                                         world_.max_replicas()));
      world_.set_replicas(n);
      break;
    }
    case ActionVerb::switch_model:
      world_.set_model(action.parameter == 0 ? ModelKind::heavy : ModelKind::light);
      break;
    case ActionVerb::set_queue_cap:
      world_.set_queue_cap(static_cast<int>(action.parameter));
      break;
    case ActionVerb::set_frame_rate:
      if (!world_.set_frame_rate(action.target, action.parameter))
        return Ack::rejected(ErrorCode::not_found,
                             fmt::format("no camera or detector '{}'", action.target));
      break;
    case ActionVerb::set_resource_limit:
      return Ack::rejected(ErrorCode::unsupported, "set_resource_limit is not simulated");
  }
  return Ack::applied_ok(before != current(action));
}

}  // namespace sloloop
