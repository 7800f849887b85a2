#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sloloop/descriptor.hpp"
#include "sloloop/telemetry.hpp"

namespace sloloop {

inline constexpr Tick kDefaultEvalWindow = 10;

enum class Verdict { good, fail };
enum class ConditionState { pass, fail, indeterminate };

std::string_view to_string(Verdict v);
std::string_view to_string(ConditionState s);

struct ConditionResult {
  std::string slo;
  ConditionState state = ConditionState::indeterminate;
  std::optional<double> value;  // window mean, absent when indeterminate
  int failing_streak = 0;       // consecutive failing evaluations so far
  bool violated = false;        // streak reached debounce_ticks
};

struct Violation {
  std::string slo;
  MetricKey metric;
  double value = 0.0;
};

struct SystemStatus {
  Verdict verdict = Verdict::good;
  std::vector<Violation> violated;  // in descriptor order
  Tick tick = 0;
  std::vector<ConditionResult> conditions;
  std::vector<std::string> warnings;
};

/// Mean of the observed samples of `key` over [t0, t1]; nullopt when the
/// metric is unknown or has no observed sample in the window.
std::optional<double> window_mean(const MetricStore& store, const MetricKey& key, Tick t0, Tick t1);

/// Stateful status inference. Each call is one evaluation; a condition is
/// violated once it has failed `debounce_ticks` consecutive evaluations. An
/// indeterminate evaluation (no data in the window) resets the streak and is
/// excluded from the verdict with a warning, or throws not_found in strict mode.
class StatusTracker {
 public:
  explicit StatusTracker(Tick eval_window = kDefaultEvalWindow, bool strict = false)
      : eval_window_(eval_window), strict_(strict) {}

  SystemStatus infer_status(const Descriptor& d, const MetricStore& store, Tick now);

  /// Drops streaks of SLO ids no longer present in `d`.
  void retain(const Descriptor& d);

  int streak(const std::string& slo_id) const;
  Tick eval_window() const { return eval_window_; }

 private:
  Tick eval_window_;
  bool strict_;
  std::map<std::string, int> streaks_;
};

}  // namespace sloloop
