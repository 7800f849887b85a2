#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sloloop/action_planner.hpp"
#include "sloloop/errors.hpp"
#include "sloloop/feedback_loop.hpp"
#include "sloloop/knowledge.hpp"
#include "sloloop/root_cause.hpp"
#include "sloloop/status.hpp"

using namespace sloloop;

namespace {

const MetricKey kRt{"recognizer", "response_time"};
const MetricKey kQueue{"recognizer", "queue_length"};
const MetricKey kCpu{"edge", "cpu"};

Descriptor plant_descriptor() {
  Descriptor d;
  d.components = {{"edge", ComponentKind::host}, {"recognizer", ComponentKind::service}};
  d.dependencies = {{"edge", "recognizer"}};
  d.metrics = {{"response_time", "recognizer", MetricLevel::application, "s"},
               {"queue_length", "recognizer", MetricLevel::application, "frames"},
               {"cpu", "edge", MetricLevel::infrastructure, "%"}};
  d.slos = {{"rt", "response_time", "recognizer", CompareOp::le, 1.0, 2}};
  d.actions = {{"scale-2", ActionLevel::infrastructure, ActionVerb::scale_replicas, "recognizer", 2, 0, 30},
               {"scale-3", ActionLevel::infrastructure, ActionVerb::scale_replicas, "recognizer", 3, 1, 30},
               {"scale-4", ActionLevel::infrastructure, ActionVerb::scale_replicas, "recognizer", 4, 2, 30}};
  d.remediation = {{"rt", std::string(kWildcard), std::string(kWildcard), {"scale-2", "scale-3", "scale-4"}}};
  return d;
}

// A replicated service whose response time is load / replicas.
class PlantActuator : public Actuator {
 public:
  int replicas = 1;

  std::set<ActionVerb> capabilities() const override { return {ActionVerb::scale_replicas}; }
  std::optional<double> current(const ActionSpec&) const override { return replicas; }

 protected:
  Ack do_apply(const ActionSpec& a, Tick) override {
    const int before = replicas;
    replicas = static_cast<int>(a.parameter);
    return Ack::applied_ok(before != replicas);
  }
};

struct PlantRun {
  std::vector<TraceEvent> trace;
  std::vector<KnowledgeRecord> records;
  std::size_t calls = 0;
  std::size_t applied = 0;
  int replicas = 1;
};

// load(t) is the offered load; noise keeps the forest fed with variance.
PlantRun run_plant(const std::function<double(Tick)>& load, Tick horizon, std::uint64_t seed = 3,
                   const Descriptor& d = plant_descriptor()) {
  MetricStore store;
  PlantActuator act;
  KnowledgeBase kb;
  FeedbackLoop loop(d, store, act, kb);
  RandomStream rng(seed);
  run_loop(loop, horizon, [&](Tick t) {
    const double l = load(t);
    store.ingest(kRt, {t, l / act.replicas + 0.01 * rng.uniform()});
    store.ingest(kQueue, {t, std::max(0.0, 4.0 * (l - act.replicas)) + rng.uniform()});
    store.ingest(kCpu, {t, 40.0 + rng.uniform()});
  });
  return {loop.trace(), kb.records(), act.calls(), loop.applied_count(), act.replicas};
}

std::vector<const TraceEvent*> phase(const std::vector<TraceEvent>& trace, std::string_view p) {
  std::vector<const TraceEvent*> out;
  for (const auto& e : trace)
    if (e.phase == p) out.push_back(&e);
  return out;
}

SystemStatus violated_status(const std::string& slo = "rt", const MetricKey& key = kRt) {
  SystemStatus s;
  s.verdict = Verdict::fail;
  s.violated = {{slo, key, 2.0}};
  return s;
}

AnomalyScore score(const MetricKey& k, double raw, double combined) {
  return {k, raw, combined / raw, combined, 0, 29};
}

}  // namespace

// ---------------------------------------------------------------- status

TEST_CASE("status truth table matches the conjunction-with-debounce oracle") {
  const auto report = oracle::check_status_truth_table(3);
  CHECK(report.combinations == 27 + 27 * 27 + 27 * 27 * 27);
  CHECK_MESSAGE(report.mismatches == 0, report.first_mismatch);
}

TEST_CASE("an oscillating metric is reported only after debounce consecutive failures") {
  Descriptor d = plant_descriptor();
  d.slos[0].debounce_ticks = 3;
  MetricStore store;
  StatusTracker tracker;
  const std::vector<double> windows{2, 2, 0.5, 2, 2, 2, 0.5};
  std::vector<bool> violated;
  for (std::size_t e = 0; e < windows.size(); ++e) {
    for (Tick t = 10 * e; t < static_cast<Tick>(10 * e + 10); ++t) store.ingest(kRt, {t, windows[e]});
    violated.push_back(tracker.infer_status(d, store, 10 * e + 9).verdict == Verdict::fail);
  }
  CHECK(violated == std::vector<bool>{false, false, false, false, false, true, false});
}

TEST_CASE("status edge cases") {
  Descriptor d = plant_descriptor();
  MetricStore store;
  SUBCASE("value exactly at the threshold passes") {
    for (Tick t = 0; t < 10; ++t) store.ingest(kRt, {t, 1.0});
    const auto s = StatusTracker().infer_status(d, store, 9);
    CHECK(s.conditions[0].state == ConditionState::pass);
  }
  SUBCASE("window mean ignores missing markers") {
    store.ingest(kRt, {0, 3.0});
    store.ingest(kRt, Sample{1, std::nullopt});
    store.ingest(kRt, {2, 1.0});
    CHECK(window_mean(store, kRt, 0, 9) == 2.0);
  }
  SUBCASE("no data is indeterminate with a warning, and resets the streak") {
    d.slos[0].debounce_ticks = 2;
    StatusTracker tracker;
    for (Tick t = 0; t < 10; ++t) store.ingest(kRt, {t, 5.0});
    CHECK(tracker.infer_status(d, store, 9).conditions[0].failing_streak == 1);
    const auto s = tracker.infer_status(d, store, 19);
    CHECK(s.conditions[0].state == ConditionState::indeterminate);
    CHECK(s.verdict == Verdict::good);
    CHECK(s.warnings.size() == 1);
    CHECK(tracker.streak("rt") == 0);
  }
  SUBCASE("strict mode throws not_found on missing data") {
    StatusTracker tracker(10, true);
    try {
      tracker.infer_status(d, store, 9);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_found);
    }
  }
  SUBCASE("retain drops streaks of removed SLOs") {
    StatusTracker tracker;
    for (Tick t = 0; t < 10; ++t) store.ingest(kRt, {t, 5.0});
    tracker.infer_status(d, store, 9);
    CHECK(tracker.streak("rt") == 1);
    Descriptor without = d;
    without.slos.clear();
    tracker.retain(without);
    CHECK(tracker.streak("rt") == 0);
  }
}

// ---------------------------------------------------------------- root cause

TEST_CASE("root cause ranks anomalous upstream metrics by combined score") {
  const Descriptor d = plant_descriptor();
  const auto graph = build_dependency_graph(d, {});
  const std::vector<AnomalyScore> critical{score(kCpu, 0.9, 0.9 / 4), score(kQueue, 0.8, 0.8 / 3),
                                           score(kRt, 0.99, 0.99)};
  const auto causes = infer_root_cause(violated_status(), graph, critical);
  REQUIRE(causes.size() == 2);
  CHECK(causes[0].metric == kQueue);
  CHECK(causes[0].path == std::vector<std::string>{"recognizer/queue_length", "recognizer",
                                                   "recognizer/response_time"});
  CHECK(causes[1].metric == kCpu);
  CHECK(causes[1].path.front() == "edge/cpu");
  CHECK(causes[1].path.back() == "recognizer/response_time");
  CHECK_FALSE(causes[0].fallback);
  CHECK(causes[0].slo == "rt");
}

TEST_CASE("root cause filters and fallback") {
  const Descriptor d = plant_descriptor();
  const auto graph = build_dependency_graph(d, {});
  SUBCASE("raw score below the criticality threshold is not a cause") {
    const auto causes = infer_root_cause(violated_status(), graph, {score(kQueue, 0.59, 0.3)});
    REQUIRE(causes.size() == 1);
    CHECK(causes[0].fallback);
  }
  SUBCASE("without candidates the violated metric itself is returned") {
    const auto causes = infer_root_cause(violated_status(), graph, {});
    REQUIRE(causes.size() == 1);
    CHECK(causes[0].metric == kRt);
    CHECK(causes[0].path == std::vector<std::string>{"recognizer/response_time"});
    CHECK(causes[0].combined_score == kUnreachableProximity);
  }
  SUBCASE("a metric with no path to the violated node is skipped") {
    DependencyGraph g;
    g.add_node("edge/cpu");
    g.add_node("recognizer/response_time");
    const auto causes = infer_root_cause(violated_status(), g, {score(kCpu, 0.95, 0.01)});
    CHECK(causes[0].fallback);
  }
  SUBCASE("a good status has no cause") {
    CHECK(infer_root_cause(SystemStatus{}, graph, {score(kQueue, 0.9, 0.3)}).empty());
  }
}

TEST_CASE("root cause ties resolve by key") {
  Descriptor d = plant_descriptor();
  d.metrics.push_back({"cpu_utilization", "recognizer", MetricLevel::infrastructure, "%"});
  const auto graph = build_dependency_graph(d, {});
  const MetricKey util{"recognizer", "cpu_utilization"};
  const auto causes =
      infer_root_cause(violated_status(), graph, {score(kQueue, 0.9, 0.3), score(util, 0.9, 0.3)});
  REQUIRE(causes.size() == 2);
  CHECK(causes[0].metric == util);
  CHECK(causes[1].metric == kQueue);
}

// ---------------------------------------------------------------- planning

TEST_CASE("infer_actions picks the first matching entry by priority") {
  Descriptor d = plant_descriptor();
  RootCause cause{"recognizer", kQueue, 0.3, {}, "rt", false};
  CooldownBook cooldowns;
  SUBCASE("lowest priority number first") {
    std::swap(d.remediation[0].actions[0], d.remediation[0].actions[2]);
    const auto plan = infer_actions(d, {cause}, cooldowns, 100);
    REQUIRE(plan.actions.size() == 1);
    CHECK(plan.actions[0].action == "scale-2");
    CHECK(plan.actions[0].issued_tick == 100);
    CHECK(plan.actions[0].cooldown_until == 130);
  }
  SUBCASE("an action still cooling down is skipped") {
    cooldowns.start(*d.find_action("scale-2"), 90);
    CHECK(infer_actions(d, {cause}, cooldowns, 100).actions[0].action == "scale-3");
    CHECK(infer_actions(d, {cause}, cooldowns, 120).actions[0].action == "scale-2");
  }
  SUBCASE("an action already in effect is skipped") {
    const auto plan = infer_actions(d, {cause}, cooldowns, 0,
                                    [](const ActionSpec&) { return std::optional<double>(2.0); });
    CHECK(plan.actions[0].action == "scale-3");
  }
  SUBCASE("specific entries shadow the wildcard when listed first") {
    d.remediation.insert(d.remediation.begin(), {"rt", "recognizer", "queue_length", {"scale-4"}});
    CHECK(infer_actions(d, {cause}, cooldowns, 0).actions[0].action == "scale-4");
    cause.metric = kCpu;
    CHECK(infer_actions(d, {cause}, cooldowns, 0).actions[0].action == "scale-2");
  }
  SUBCASE("no matching entry yields an empty plan and a warning") {
    d.remediation = {{"other", std::string(kWildcard), std::string(kWildcard), {"scale-2"}}};
    const auto plan = infer_actions(d, {cause}, cooldowns, 0);
    CHECK(plan.actions.empty());
    CHECK(plan.warnings.size() == 1);
  }
  SUBCASE("everything cooling down yields nothing") {
    for (const auto& a : d.actions) cooldowns.start(a, 0);
    CHECK(infer_actions(d, {cause}, cooldowns, 10).actions.empty());
  }
  SUBCASE("empty cause list is an error") {
    CHECK_THROWS_AS(infer_actions(d, {}, cooldowns, 0), Error);
  }
}

// ---------------------------------------------------------------- knowledge

TEST_CASE("knowledge records round-trip through JSON lines") {
  KnowledgeRecord r{"rt", "recognizer/queue_length", "scale-2", 1.2345678901234567, 0.1, -0.25, 42};
  CHECK(parse_knowledge_record(to_json_line(r)) == r);
  CHECK_THROWS_AS(parse_knowledge_record("{not json"), Error);
}

TEST_CASE("knowledge log persists and reloads") {
  const auto dir = std::filesystem::temp_directory_path() / "sloloop_test_kb";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto log = oracle::interleaved_records(20);
  {
    KnowledgeBase kb(dir / "k.jsonl");
    for (const auto& r : log) kb.record(r);
  }
  const auto reloaded = KnowledgeBase::load(dir / "k.jsonl");
  CHECK(reloaded.records() == log);
  std::filesystem::remove_all(dir);
}

TEST_CASE("knowledge write failures leave the log unchanged") {
  KnowledgeBase kb("/nonexistent-dir/k.jsonl");
  try {
    kb.record(oracle::interleaved_records(1)[0]);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  CHECK(kb.records().empty());
  KnowledgeBase mem;
  auto r = oracle::interleaved_records(1)[0];
  r.effectiveness = std::nan("");
  CHECK_THROWS_AS(mem.record(r), Error);
}

TEST_CASE("knowledge queries equal a linear scan over 100 interleaved records") {
  const auto log = oracle::interleaved_records(100);
  KnowledgeBase kb;
  for (const auto& r : log) kb.record(r);
  CHECK(oracle::knowledge_query_mismatches(kb, log) == 0);
}

TEST_CASE("effectiveness") {
  const SloCondition le{"rt", "response_time", "recognizer", CompareOp::le, 1.0, 1};
  CHECK(effectiveness(1.0, 0.5, le) == 0.5);
  CHECK(effectiveness(1.0, 1.0, le) == 0.0);
  CHECK(effectiveness(1.0, 1.5, le) == -0.5);
  SloCondition ge = le;
  ge.op = CompareOp::ge;
  CHECK(effectiveness(0.5, 1.0, ge) == 1.0);
  SloCondition eq = le;
  eq.op = CompareOp::eq;
  // Distance to the threshold shrinks from 0.5 to 0.1.
  CHECK(effectiveness(1.5, 1.1, eq) == doctest::Approx(0.8));
  CHECK(std::isfinite(effectiveness(0.0, 1.0, le)));
}

TEST_CASE("evaluate_outcome uses the pre and post windows") {
  const SloCondition slo{"rt", "response_time", "recognizer", CompareOp::le, 1.0, 1};
  MetricStore store;
  PlannedAction p{"scale-2", {}, 100, 130};
  for (Tick t = 0; t < 200; ++t) {
    double v = 9.0;  // outside both windows
    if (t >= 90 && t <= 99) v = 2.0;
    if (t >= 105 && t <= 114) v = 1.0;
    store.ingest(kRt, {t, v});
  }
  const auto o = evaluate_outcome(store, p, slo);
  CHECK(o.pre == 2.0);
  CHECK(o.post == 1.0);
  CHECK(o.effectiveness == 0.5);

  MetricStore empty;
  try {
    evaluate_outcome(empty, p, slo);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_data);
  }
}

// ---------------------------------------------------------------- loop

TEST_CASE("a violation-free run never calls the actuator") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto run = run_plant([](Tick) { return 0.5; }, 600, seed);
    CHECK(run.calls == 0);
    CHECK(run.records.empty());
    CHECK(phase(run.trace, "status").size() == 120);
    CHECK(phase(run.trace, "cause").empty());
  }
}

TEST_CASE("iterations run every period starting at period - 1") {
  const auto run = run_plant([](Tick) { return 0.5; }, 30);
  const auto st = phase(run.trace, "status");
  REQUIRE(st.size() == 6);
  for (std::size_t i = 0; i < st.size(); ++i) CHECK(st[i]->tick == static_cast<Tick>(5 * i + 4));
}

TEST_CASE("overload is remediated by climbing the replica ladder") {
  const auto run = run_plant([](Tick t) { return t < 200 ? 0.5 : 2.6; }, 1000);
  CHECK(run.replicas == 3);
  CHECK(run.applied >= 2);
  const auto applies = phase(run.trace, "apply");
  REQUIRE(applies.size() >= 2);
  CHECK(applies[0]->payload["action"] == "scale-2");
  CHECK(applies[0]->tick > 200);
  CHECK(applies[0]->tick <= 200 + 10 + 5);
  CHECK(phase(run.trace, "evaluate").size() == run.records.size());
  CHECK(run.records.size() == run.applied);
  CHECK(run.records[0].action == "scale-2");
  CHECK(run.records[0].effectiveness > 0.0);
}

TEST_CASE("loop hygiene properties over varied load profiles") {
  const Descriptor d = plant_descriptor();
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    RandomStream rng(seed);
    std::vector<double> profile;
    double level = 0.5;
    for (int i = 0; i < 30; ++i) {
      if (rng.uniform() < 0.4) level = rng.uniform(0.2, 4.0);
      profile.push_back(level);
    }
    const auto run = run_plant([&](Tick t) { return profile[t / 50]; }, 1500, seed);
    CAPTURE(seed);

    std::map<std::string, Tick> last_issue;
    Tick last_apply = -1000;
    const OutcomeWindows w;
    std::size_t applied = 0;
    for (const auto* e : phase(run.trace, "apply")) {
      const std::string id = e->payload["action"];
      const ActionSpec& spec = *d.find_action(id);
      if (last_issue.contains(id)) CHECK(e->tick >= last_issue[id] + spec.cooldown_ticks);
      CHECK(e->tick >= w.post_end(last_apply));  // never while one is in flight
      last_issue[id] = e->tick;
      last_apply = e->tick;
      if (e->payload["ack"] == "applied") ++applied;
    }
    // Each applied action ends in one record or, at the horizon, one failure.
    const auto failures = phase(run.trace, "failure");
    CHECK(run.records.size() + failures.size() == applied);
    CHECK(run.calls == phase(run.trace, "apply").size());
  }
}

TEST_CASE("an action applied just before the horizon ends in a failure event") {
  const auto run = run_plant([](Tick t) { return t < 280 ? 0.5 : 3.0; }, 300);
  REQUIRE(run.applied == 1);
  CHECK(run.records.empty());
  const auto failures = phase(run.trace, "failure");
  REQUIRE(failures.size() == 1);
  CHECK(failures[0]->tick == 299);
}

TEST_CASE("no new action while an evaluation is in flight") {
  Descriptor d = plant_descriptor();
  for (auto& a : d.actions) a.cooldown_ticks = 1;
  const auto run = run_plant([](Tick t) { return t < 100 ? 0.5 : 10.0; }, 200, 3, d);
  const auto applies = phase(run.trace, "apply");
  REQUIRE(applies.size() >= 2);
  CHECK(applies[1]->tick - applies[0]->tick >= OutcomeWindows{}.post_end(0));
  bool blocked = false;
  for (const auto* e : phase(run.trace, "action")) blocked |= e->payload.contains("blocked");
  CHECK(blocked);
}

TEST_CASE("the loop is deterministic for a given seed") {
  auto lines = [] {
    const auto run = run_plant([](Tick t) { return t < 150 ? 0.5 : 2.5; }, 600, 9);
    std::string s;
    for (const auto& e : run.trace) s += e.to_json_line() + "\n";
    return s;
  };
  CHECK(lines() == lines());
}

TEST_CASE("a hot-reloaded descriptor is evaluated on the next tick") {
  MetricStore store(kDefaultRetentionTicks, false);
  Descriptor d = plant_descriptor();
  for (const auto& m : d.metrics) store.declare(m.key());
  PlantActuator act;
  KnowledgeBase kb;
  FeedbackLoop loop(d, store, act, kb);
  const MetricKey temp{"recognizer", "gpu_temp"};
  for (Tick t = 0; t < 300; ++t) {
    store.ingest(kRt, {t, 0.5});
    store.ingest(kQueue, {t, 1.0});
    store.ingest(kCpu, {t, 40.0});
    if (t == 200) store.declare(temp);  // registered mid-run
    if (t >= 200) store.ingest(temp, {t, 60.0});
    loop.on_tick(t);
    if (t == 201) {
      Descriptor next = d;
      next.metrics.push_back({"gpu_temp", "recognizer", MetricLevel::infrastructure, "C"});
      next.slos.push_back({"temp", "gpu_temp", "recognizer", CompareOp::le, 80.0, 1});
      loop.reload_descriptor(next, t);
    }
    if (t == 199) CHECK_THROWS_AS(store.ingest(temp, {t, 60.0}), Error);
  }
  const auto reload = phase(loop.trace(), "reload");
  REQUIRE(reload.size() == 1);
  CHECK(reload[0]->tick == 201);
  const TraceEvent* next_status = nullptr;
  for (const auto* e : phase(loop.trace(), "status"))
    if (e->tick > 201) {
      next_status = e;
      break;
    }
  REQUIRE(next_status);
  CHECK(next_status->tick == 202);
  const auto& conds = next_status->payload["conditions"];
  REQUIRE(conds.size() == 2);
  CHECK(conds[1]["slo"] == "temp");
  CHECK(conds[1]["state"] == "pass");
}

TEST_CASE("an invalid reload keeps the old descriptor") {
  MetricStore store;
  PlantActuator act;
  KnowledgeBase kb;
  FeedbackLoop loop(plant_descriptor(), store, act, kb);
  Descriptor bad = plant_descriptor();
  bad.slos[0].metric = "missing";
  CHECK_THROWS_AS(loop.reload_descriptor(bad, 0), Error);
  CHECK(loop.descriptor() == plant_descriptor());
}

TEST_CASE("trace events stream to a sink as JSON lines") {
  MetricStore store;
  PlantActuator act;
  KnowledgeBase kb;
  FeedbackLoop loop(plant_descriptor(), store, act, kb);
  std::ostringstream sink;
  loop.set_trace_sink(&sink);
  run_loop(loop, 10, [&](Tick t) { store.ingest(kRt, {t, 0.5}); });
  std::istringstream in(sink.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("tick"));
    CHECK(j.contains("phase"));
    CHECK(j.contains("payload"));
    ++n;
  }
  CHECK(n == loop.trace().size());
}
