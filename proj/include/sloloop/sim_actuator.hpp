#pragma once

#include "sloloop/actuation.hpp"
#include "sloloop/world.hpp"

namespace sloloop {

/// Actuator over a simulated world: scale_replicas, switch_model (0 heavy,
/// 1 light) and set_queue_cap on the recognizer; set_frame_rate on a camera,
/// its detector, or the camera/edge node. Replicas are capped at the cloud
/// node's core count. Effects are visible from the next step.
class SimActuator : public Actuator {
 public:
  explicit SimActuator(World& world) : world_(world) {}

  std::set<ActionVerb> capabilities() const override;
  std::optional<double> current(const ActionSpec& action) const override;

 protected:
  Ack do_apply(const ActionSpec& action, Tick tick) override;

 private:
  World& world_;
};

}  // namespace sloloop
