#include "sloloop/feedback_loop.hpp"

#include <algorithm>
#include <ostream>

#include <spdlog/spdlog.h>

#include "sloloop/errors.hpp"
#include "sloloop/random.hpp"
#include "sloloop/root_cause.hpp"

namespace sloloop {

using nlohmann::json;

namespace {

constexpr std::size_t kTraceTopN = 3;

json status_payload(const SystemStatus& s) {
  json violated = json::array();
  for (const auto& v : s.violated) violated.push_back({{"slo", v.slo}, {"value", v.value}});
  json conditions = json::array();
  for (const auto& c : s.conditions) {
    json entry{{"slo", c.slo}, {"state", to_string(c.state)}, {"streak", c.failing_streak}};
    entry["value"] = c.value ? json(*c.value) : json(nullptr);
    conditions.push_back(std::move(entry));
  }
  return {{"verdict", to_string(s.verdict)}, {"violated", violated}, {"conditions", conditions}};
}

json cause_payload(const RootCause& c) {
  return {{"component", c.component}, {"metric", c.metric.node_name()},
          {"combined_score", c.combined_score}, {"slo", c.slo},
          {"path", c.path}, {"fallback", c.fallback}};
}

}  // namespace

std::string TraceEvent::to_json_line() const {
  return json{{"tick", tick}, {"phase", phase}, {"payload", payload}}.dump();
}

FeedbackLoop::FeedbackLoop(Descriptor d, MetricStore& store, Actuator& actuator,
                           KnowledgeBase& knowledge, LoopOptions options)
    : descriptor_(std::move(d)),
      store_(store),
      actuator_(actuator),
      knowledge_(knowledge),
      options_(options),
      tracker_(options.eval_window, options.strict),
      next_iteration_(options.period - 1) {
  if (options_.period < 1) throw Error(ErrorCode::invalid_value, "loop period must be >= 1");
  validate_descriptor(descriptor_);
}

void FeedbackLoop::emit(Tick tick, std::string phase, json payload) {
  trace_.push_back({tick, std::move(phase), std::move(payload)});
  if (sink_) *sink_ << trace_.back().to_json_line() << '\n';
}

void FeedbackLoop::on_tick(Tick now) {
  evaluate_pending(now);
  if (now >= next_iteration_) {
    iterate(now);
    next_iteration_ = now + options_.period;
  }
}

void FeedbackLoop::evaluate_pending(Tick now) {
  if (!in_flight_) return;
  const PlannedAction& p = in_flight_->planned;
  if (now < options_.outcome.post_end(p.issued_tick)) return;

  const SloCondition* slo = descriptor_.find_slo(p.cause.slo);
  try {
    if (!slo) throw Error(ErrorCode::not_found, "SLO '" + p.cause.slo + "' no longer declared");
    const Outcome o = evaluate_outcome(store_, p, *slo, options_.outcome);
    KnowledgeRecord r{p.cause.slo, p.cause.summary(), p.action, o.pre, o.post, o.effectiveness,
                      p.issued_tick};
    knowledge_.record(r);
    emit(now, "evaluate",
         {{"action", p.action}, {"slo", r.violation}, {"issued", p.issued_tick},
          {"pre", o.pre}, {"post", o.post}, {"effectiveness", o.effectiveness}});
  } catch (const Error& e) {
    spdlog::warn("tick {}: evaluation of '{}' failed: {}", now, p.action, e.what());
    emit(now, "failure", {{"action", p.action}, {"issued", p.issued_tick}, {"reason", e.what()}});
  }
  in_flight_.reset();
}

void FeedbackLoop::iterate(Tick now) {
  const Tick t0 = std::max<Tick>(0, now - options_.analysis_window + 1);
  const auto batch = collect_batch(descriptor_, store_, t0, now);
  emit(now, "collect", {{"t0", t0}, {"t1", now}, {"series", batch.size()}});

  const DependencyGraph graph = build_dependency_graph(descriptor_, batch);
  const auto measured = std::count_if(graph.edges().begin(), graph.edges().end(), [](const GraphEdge& e) {
    return e.origin == EdgeOrigin::measured;
  });
  emit(now, "preprocess", {{"nodes", graph.nodes().size()}, {"measured_edges", measured}});

  std::vector<AnomalyScore> critical;
  if (!batch.empty() && now - t0 + 1 >= options_.critical.feature_window) {
    CriticalMetricsOptions opt = options_.critical;
    opt.seed = RandomStream::splitmix64(options_.critical.seed + static_cast<std::uint64_t>(now));
    critical = score_batch(descriptor_, batch, graph, opt);
    json top = json::array();
    for (std::size_t i = 0; i < std::min(kTraceTopN, critical.size()); ++i)
      top.push_back({{"metric", critical[i].metric.node_name()},
                     {"score", critical[i].score},
                     {"combined", critical[i].combined}});
    emit(now, "extract", {{"top", top}});
  } else {
    emit(now, "extract", {{"skipped", "insufficient data"}});
  }

  SystemStatus status = tracker_.infer_status(descriptor_, store_, now);
  for (const auto& w : status.warnings) spdlog::warn("tick {}: {}", now, w);
  emit(now, "status", status_payload(status));
  last_status_ = status;
  if (status.verdict == Verdict::good) return;
  ++fail_count_;

  const auto causes = infer_root_cause(status, graph, critical);
  json ranked = json::array();
  for (std::size_t i = 0; i < std::min(kTraceTopN, causes.size()); ++i)
    ranked.push_back(cause_payload(causes[i]));
  emit(now, "cause", {{"causes", ranked}});

  if (in_flight_) {
    emit(now, "action", {{"planned", nullptr},
                         {"blocked", "evaluation in flight"},
                         {"pending", in_flight_->planned.action}});
    return;
  }
  const ActionPlan plan = infer_actions(descriptor_, causes, cooldowns_, now,
                                        [this](const ActionSpec& a) { return actuator_.current(a); });
  for (const auto& w : plan.warnings) spdlog::warn("tick {}: {}", now, w);
  if (plan.actions.empty()) {
    emit(now, "action", {{"planned", nullptr}, {"warnings", plan.warnings}});
    return;
  }
  const PlannedAction& planned = plan.actions.front();
  emit(now, "action", {{"planned", planned.action},
                       {"cause", planned.cause.summary()},
                       {"cooldown_until", planned.cooldown_until}});

  const ActionSpec& spec = *descriptor_.find_action(planned.action);
  const Ack ack = actuator_.apply(spec, now);
  cooldowns_.start(spec, now);  // also on rejection or failure
  json payload{{"action", spec.id},
               {"verb", to_string(spec.verb)},
               {"target", spec.target},
               {"parameter", spec.parameter},
               {"ack", to_string(ack.status)}};
  if (!ack.reason.empty()) payload["reason"] = ack.reason;
  emit(now, "apply", std::move(payload));

  if (ack.status == AckStatus::applied) {
    ++applied_count_;
    in_flight_ = InFlight{planned};
  } else {
    spdlog::warn("tick {}: action '{}' {}: {}", now, spec.id, to_string(ack.status), ack.reason);
  }
}

void FeedbackLoop::finish(Tick now) {
  evaluate_pending(now);
  if (!in_flight_) return;
  const PlannedAction& p = in_flight_->planned;
  emit(now, "failure", {{"action", p.action},
                        {"issued", p.issued_tick},
                        {"reason", "post window not elapsed at horizon end"}});
  in_flight_.reset();
}

void FeedbackLoop::reload_descriptor(Descriptor d, Tick now) {
  validate_descriptor(d);
  for (const auto& m : d.metrics) store_.declare(m.key());
  tracker_.retain(d);
  descriptor_ = std::move(d);
  json slos = json::array();
  for (const auto& s : descriptor_.slos) slos.push_back(s.id);
  emit(now, "reload", {{"slos", slos}, {"metrics", descriptor_.metrics.size()}});
  next_iteration_ = now + 1;
}

void run_loop(FeedbackLoop& loop, Tick horizon, const std::function<void(Tick)>& step) {
  for (Tick t = 0; t < horizon; ++t) {
    step(t);
    loop.on_tick(t);
  }
  loop.finish(horizon - 1);
}

}  // namespace sloloop
