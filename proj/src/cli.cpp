#include "sloloop/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sloloop/errors.hpp"
#include "sloloop/scenario.hpp"
#include "sloloop/sim_actuator.hpp"
#include "sloloop/world.hpp"

namespace sloloop {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(RunMode m) { return m == RunMode::open_loop ? "open-loop" : "closed-loop"; }

std::optional<RunMode> parse_run_mode(std::string_view token) {
  if (token == "open-loop") return RunMode::open_loop;
  if (token == "closed-loop") return RunMode::closed_loop;
  return std::nullopt;
}

namespace {

std::ofstream open_artifact(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write {}", path.string()));
  return out;
}

void write_summary(std::ostream& out, const RunConfig& config, const Scenario& scenario,
                   const MetricStore& store, const RunResult& result,
                   const std::vector<TraceEvent>& trace) {
  out << "mode " << to_string(config.mode) << '\n';
  out << "seed " << scenario.seed << '\n';
  out << "horizon_ticks " << scenario.horizon_ticks << '\n';
  out << "final_status " << (result.final_verdict ? to_string(*result.final_verdict) : "n/a") << '\n';
  out << "violations " << result.violations << '\n';
  out << "actions_applied " << result.actions_applied << '\n';
  for (const auto& e : trace)
    if (e.phase == "apply")
      out << "action " << e.tick << ' ' << e.payload.at("action").get<std::string>() << ' '
          << e.payload.at("ack").get<std::string>() << '\n';
  for (const auto& key : store.keys()) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : store.query_all(key).samples) {
      if (s.missing()) continue;
      sum += *s.value;
      ++n;
    }
    if (n) out << "mean " << key.node_name() << ' ' << format_number(sum / static_cast<double>(n)) << '\n';
  }
}

}  // namespace

RunResult run_scenario(const RunConfig& config) {
  Scenario scenario = load_scenario(config.scenario);
  if (config.seed) scenario.seed = *config.seed;
  std::optional<Descriptor> descriptor;
  if (!config.descriptor.empty()) descriptor = load_descriptor(config.descriptor);
  if (config.mode == RunMode::closed_loop && !descriptor)
    throw Error(ErrorCode::invalid_value, "closed-loop mode requires --descriptor");
  if (descriptor)
    for (const auto& w : validate_remediation(*descriptor)) spdlog::warn("{}", w);

  fs::create_directories(config.out);
  const fs::path knowledge_path = config.out / "knowledge.jsonl";
  open_artifact(knowledge_path).close();
  KnowledgeBase knowledge(knowledge_path);

  World world(scenario);
  MetricStore store(scenario.horizon_ticks + 1);
  auto step = [&](Tick) { store.ingest_batch(world.step()); };

  RunResult result;
  std::vector<TraceEvent> trace;
  if (config.mode == RunMode::closed_loop) {
    std::ofstream trace_out = open_artifact(config.out / "loop_trace.jsonl");
    std::ofstream actuator_log = open_artifact(config.out / "actuator.log");
    SimActuator sim(world);
    LoggingActuator actuator(&actuator_log, &sim);
    FeedbackLoop loop(*descriptor, store, actuator, knowledge, config.loop);
    loop.set_trace_sink(&trace_out);
    run_loop(loop, scenario.horizon_ticks, step);
    result.violations = loop.fail_count();
    result.actions_applied = loop.applied_count();
    if (loop.last_status()) result.final_verdict = loop.last_status()->verdict;
    trace = loop.trace();
    if (result.final_verdict == Verdict::fail) result.exit_code = kExitUnresolved;
  } else {
    StatusTracker tracker(config.loop.eval_window, config.loop.strict);
    for (Tick t = 0; t < scenario.horizon_ticks; ++t) {
      step(t);
      if (descriptor && (t + 1) % config.loop.period == 0) {
        const SystemStatus s = tracker.infer_status(*descriptor, store, t);
        result.violations += s.verdict == Verdict::fail;
        result.final_verdict = s.verdict;
      }
    }
  }

  std::ofstream csv = open_artifact(config.out / "telemetry.csv");
  store.write_csv(csv);
  std::ofstream summary = open_artifact(config.out / "summary.txt");
  write_summary(summary, config, scenario, store, result, trace);
  return result;
}

int cmd_run(const RunConfig& config, std::ostream& err) {
  try {
    return run_scenario(config).exit_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

namespace {

struct RunTable {
  // component -> metric -> tick -> value
  std::map<std::string, std::map<std::string, std::map<Tick, double>>> values;

  const std::map<Tick, double>* series(const std::string& component, const std::string& metric) const {
    auto c = values.find(component);
    if (c == values.end()) return nullptr;
    auto m = c->second.find(metric);
    return m == c->second.end() ? nullptr : &m->second;
  }
};

RunTable read_run(const fs::path& run_dir) {
  const fs::path csv = run_dir / "telemetry.csv";
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::not_found, fmt::format("missing artifact {}", csv.string()));
  RunTable table;
  for (const auto& p : read_csv(in))
    if (p.sample.value) table.values[p.key.component][p.key.metric][p.sample.timestamp] = *p.sample.value;
  return table;
}

std::string cell(const std::map<Tick, double>* s, Tick t) {
  if (!s) return "";
  auto it = s->find(t);
  return it == s->end() ? "" : format_number(it->second);
}

void plot_motions_vs_response(const RunTable& table, std::ostream& out, Tick window) {
  out << "window_start,stream,detected_motions,response_time\n";
  // Streams are the motion detectors: components reporting detections and a
  // response time but no queue of their own.
  std::map<Tick, std::map<std::string, std::pair<double, std::pair<double, int>>>> rows;
  for (const auto& [component, metrics] : table.values) {
    if (!metrics.contains("detected_motions") || !metrics.contains("response_time") ||
        metrics.contains("queue_length"))
      continue;
    for (const auto& [t, v] : metrics.at("detected_motions")) rows[t / window * window][component].first += v;
    for (const auto& [t, v] : metrics.at("response_time")) {
      auto& acc = rows[t / window * window][component].second;
      acc.first += v;
      ++acc.second;
    }
  }
  for (const auto& [start, streams] : rows)
    for (const auto& [stream, v] : streams)
      out << start << ',' << stream << ',' << format_number(v.first) << ','
          << (v.second.second ? format_number(v.second.first / v.second.second) : "") << '\n';
}

void plot_adaptation_timeline(const RunTable& table, const fs::path& run_dir, std::ostream& out) {
  out << "tick,response_time,frame_processing_time,replicas,cameras,action\n";
  std::string recognizer;
  for (const auto& [component, metrics] : table.values)
    if (metrics.contains("replicas")) recognizer = component;

  std::map<Tick, std::string> actions;
  std::ifstream trace(run_dir / "loop_trace.jsonl");
  std::string line;
  while (trace && std::getline(trace, line)) {
    if (line.empty()) continue;
    const json e = json::parse(line);
    if (e.at("phase") != "apply" || e.at("payload").at("ack") != "applied") continue;
    auto& slot = actions[e.at("tick").get<Tick>()];
    slot += (slot.empty() ? "" : ";") + e.at("payload").at("action").get<std::string>();
  }

  const auto* rt = table.series(recognizer, "response_time");
  const auto* fpt = table.series(recognizer, "frame_processing_time");
  const auto* replicas = table.series(recognizer, "replicas");
  const auto* cameras = table.series("edge", "cameras");
  std::set<Tick> ticks;
  for (const auto* s : {rt, fpt, replicas, cameras})
    if (s)
      for (const auto& [t, v] : *s) ticks.insert(t);
  for (Tick t : ticks) {
    auto a = actions.find(t);
    out << t << ',' << cell(rt, t) << ',' << cell(fpt, t) << ',' << cell(replicas, t) << ','
        << cell(cameras, t) << ',' << (a == actions.end() ? "" : a->second) << '\n';
  }
}

}  // namespace

int cmd_plotdata(const fs::path& run_dir, const std::string& figure, std::ostream& out,
                 std::ostream& err, Tick window) {
  try {
    if (figure != "motions_vs_response" && figure != "adaptation_timeline")
      throw Error(ErrorCode::invalid_token, fmt::format("unknown figure '{}'", figure));
    if (window < 1) throw Error(ErrorCode::invalid_value, "window must be >= 1");
    const RunTable table = read_run(run_dir);
    if (figure == "motions_vs_response")
      plot_motions_vs_response(table, out, window);
    else
      plot_adaptation_timeline(table, run_dir, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "error: bad loop trace: " << e.what() << '\n';
  }
  return kExitError;
}

int cmd_validate(const std::string& descriptor, std::ostream& out, std::ostream& err) {
  try {
    const Descriptor d = load_descriptor(descriptor);
    for (const auto& w : validate_remediation(d)) out << "warning: " << w << '\n';
    out << fmt::format("ok: {} components, {} metrics, {} SLOs, {} actions\n", d.components.size(),
                       d.metrics.size(), d.slos.size(), d.actions.size());
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("sloloop");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("SLOLOOP_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

}  // namespace

int run_cli(int argc, char** argv) {
  if (!spdlog::get("sloloop")) configure_logging();

  CLI::App app{"Closed-loop SLO violation detection and adaptation on a simulated video pipeline"};
  app.require_subcommand(1);

  RunConfig run;
  std::string mode = "open-loop";
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "run a scenario open- or closed-loop");
  run_cmd->add_option("--descriptor", run.descriptor, "system descriptor JSON");
  run_cmd->add_option("--scenario", run.scenario, "scenario JSON")->required();
  run_cmd->add_option("--mode", mode, "open-loop or closed-loop")
      ->check(CLI::IsMember({"open-loop", "closed-loop"}));
  run_cmd->add_option("--out", run.out, "output directory")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the scenario seed");

  std::string run_dir;
  std::string figure;
  Tick window = 60;
  auto* plot_cmd = app.add_subcommand("plotdata", "figure-ready CSV from a run directory");
  plot_cmd->add_option("--run", run_dir, "run output directory")->required();
  plot_cmd->add_option("--figure", figure, "motions_vs_response or adaptation_timeline")->required();
  plot_cmd->add_option("--window", window, "ticks per window for motions_vs_response");

  std::string descriptor;
  auto* validate_cmd = app.add_subcommand("validate", "parse a descriptor and report warnings");
  validate_cmd->add_option("--descriptor", descriptor, "system descriptor JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  if (*run_cmd) {
    run.mode = *parse_run_mode(mode);
    if (*seed_opt) run.seed = seed;
    return cmd_run(run, std::cerr);
  }
  if (*plot_cmd) return cmd_plotdata(run_dir, figure, std::cout, std::cerr, window);
  return cmd_validate(descriptor, std::cout, std::cerr);
}

}  // namespace sloloop
