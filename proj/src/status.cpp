#include "sloloop/status.hpp"

#include <fmt/format.h>

#include "sloloop/errors.hpp"

namespace sloloop {

std::string_view to_string(Verdict v) { return v == Verdict::good ? "good" : "fail"; }

std::string_view to_string(ConditionState s) {
  switch (s) {
    case ConditionState::pass: return "pass";
    case ConditionState::fail: return "fail";
    case ConditionState::indeterminate: return "indeterminate";
  }
  return "?";
}

std::optional<double> window_mean(const MetricStore& store, const MetricKey& key, Tick t0,
                                  Tick t1) {
  if (t1 < t0 || !store.contains(key)) return std::nullopt;
  const TimeSeries ts = store.query_window(key, t0, t1);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : ts.samples) {
    if (s.missing()) continue;
    sum += *s.value;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

SystemStatus StatusTracker::infer_status(const Descriptor& d, const MetricStore& store, Tick now) {
  SystemStatus status;
  status.tick = now;
  for (const auto& slo : d.slos) {
    ConditionResult r;
    r.slo = slo.id;
    r.value = window_mean(store, slo.key(), now - eval_window_ + 1, now);
    int& streak = streaks_[slo.id];
    if (!r.value) {
      if (strict_)
        throw Error(ErrorCode::not_found,
                    fmt::format("SLO '{}': no data for {} in the evaluation window", slo.id,
                                slo.key().node_name()));
      status.warnings.push_back(fmt::format("SLO '{}' indeterminate: no data for {}", slo.id,
                                            slo.key().node_name()));
      r.state = ConditionState::indeterminate;
      streak = 0;
    } else if (slo.satisfied_by(*r.value)) {
      r.state = ConditionState::pass;
      streak = 0;
    } else {
      r.state = ConditionState::fail;
      ++streak;
    }
    r.failing_streak = streak;
    r.violated = r.state == ConditionState::fail && streak >= slo.debounce_ticks;
    if (r.violated) status.violated.push_back({slo.id, slo.key(), *r.value});
    status.conditions.push_back(std::move(r));
  }
  status.verdict = status.violated.empty() ? Verdict::good : Verdict::fail;
  return status;
}

void StatusTracker::retain(const Descriptor& d) {
  for (auto it = streaks_.begin(); it != streaks_.end();)
    it = d.find_slo(it->first) ? std::next(it) : streaks_.erase(it);
}

int StatusTracker::streak(const std::string& slo_id) const {
  auto it = streaks_.find(slo_id);
  return it == streaks_.end() ? 0 : it->second;
}

}  // namespace sloloop
