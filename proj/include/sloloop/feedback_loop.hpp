#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sloloop/action_planner.hpp"
#include "sloloop/actuation.hpp"
#include "sloloop/critical_metrics.hpp"
#include "sloloop/knowledge.hpp"
#include "sloloop/status.hpp"

namespace sloloop {

struct LoopOptions {
  Tick period = 5;             // ticks between iterations
  Tick eval_window = kDefaultEvalWindow;
  Tick analysis_window = 120;  // ticks handed to critical-metric extraction
  OutcomeWindows outcome;
  bool strict = false;
  CriticalMetricsOptions critical;  // critical.seed is the base forest seed
};

struct TraceEvent {
  Tick tick = 0;
  std::string phase;
  nlohmann::json payload;

  std::string to_json_line() const;
};

/// One control thread's view of the loop. The caller feeds it one tick at a
/// time after that tick's telemetry is in the store; every `period` ticks it
/// runs collect, preprocess, extract, status and, on a failing status, cause,
/// action and apply. While an applied action awaits its post window no new
/// action is issued, so each knowledge record is attributable to one action.
class FeedbackLoop {
 public:
  FeedbackLoop(Descriptor d, MetricStore& store, Actuator& actuator, KnowledgeBase& knowledge,
               LoopOptions options = {});

  void on_tick(Tick now);
  /// Horizon end: an applied action whose post window has not elapsed gets a
  /// failure event instead of a knowledge record.
  void finish(Tick now);

  /// Swaps the descriptor without a restart. New metrics are declared in the
  /// store and the next tick runs a full iteration. Throws on an invalid
  /// descriptor and keeps the old one.
  void reload_descriptor(Descriptor d, Tick now);

  /// Streams each event as a JSON line in addition to keeping it in memory.
  void set_trace_sink(std::ostream* sink) { sink_ = sink; }

  const std::vector<TraceEvent>& trace() const { return trace_; }
  const Descriptor& descriptor() const { return descriptor_; }
  const std::optional<SystemStatus>& last_status() const { return last_status_; }
  std::size_t fail_count() const { return fail_count_; }
  std::size_t applied_count() const { return applied_count_; }
  const CooldownBook& cooldowns() const { return cooldowns_; }

 private:
  struct InFlight {
    PlannedAction planned;
  };

  void iterate(Tick now);
  void evaluate_pending(Tick now);
  void emit(Tick tick, std::string phase, nlohmann::json payload);

  Descriptor descriptor_;
  MetricStore& store_;
  Actuator& actuator_;
  KnowledgeBase& knowledge_;
  LoopOptions options_;
  StatusTracker tracker_;
  CooldownBook cooldowns_;
  std::optional<InFlight> in_flight_;
  std::optional<SystemStatus> last_status_;
  Tick next_iteration_;
  std::size_t fail_count_ = 0;
  std::size_t applied_count_ = 0;
  std::vector<TraceEvent> trace_;
  std::ostream* sink_ = nullptr;
};

/// Drives `loop` over ticks [0, horizon): step(t) must put tick t's telemetry
/// into the store before the loop sees it.
void run_loop(FeedbackLoop& loop, Tick horizon, const std::function<void(Tick)>& step);

}  // namespace sloloop
