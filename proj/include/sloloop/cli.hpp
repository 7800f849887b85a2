#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "sloloop/feedback_loop.hpp"
#include "sloloop/status.hpp"

namespace sloloop {

enum class RunMode { open_loop, closed_loop };

std::string_view to_string(RunMode m);
std::optional<RunMode> parse_run_mode(std::string_view token);

struct RunConfig {
  std::string descriptor;  // required in closed loop
  std::string scenario;
  RunMode mode = RunMode::open_loop;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  LoopOptions loop;
};

struct RunResult {
  int exit_code = 0;
  std::size_t violations = 0;  // failing status evaluations
  std::size_t actions_applied = 0;
  std::optional<Verdict> final_verdict;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnresolved = 2;

/// Runs a scenario and writes telemetry.csv, knowledge.jsonl, summary.txt and,
/// in closed loop, loop_trace.jsonl and actuator.log into config.out. Inputs
/// are parsed before anything is written, so an input error throws and
/// leaves no artifacts. Exit code 2 when a closed-loop run ends failing.
RunResult run_scenario(const RunConfig& config);

/// Wrappers returning process exit codes; errors are reported on `err`.
int cmd_run(const RunConfig& config, std::ostream& err);
int cmd_plotdata(const std::filesystem::path& run_dir, const std::string& figure, std::ostream& out,
                 std::ostream& err, Tick window = 60);
int cmd_validate(const std::string& descriptor, std::ostream& out, std::ostream& err);

/// Full command line: `run`, `plotdata`, `validate`. SLOLOOP_LOG sets the
/// log level (trace, debug, info, warn, error, off; default warn).
int run_cli(int argc, char** argv);

}  // namespace sloloop
