#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sloloop/action_planner.hpp"
#include "sloloop/descriptor.hpp"
#include "sloloop/telemetry.hpp"

namespace sloloop {

inline constexpr Tick kDefaultOutcomeWindow = 10;
inline constexpr Tick kDefaultSettleTicks = 5;
inline constexpr double kEffectivenessEpsilon = 1e-9;

struct KnowledgeRecord {
  std::string violation;  // SLO id
  std::string cause;      // "component/metric"
  std::string action;     // ActionSpec id
  double pre_value = 0.0;
  double post_value = 0.0;
  double effectiveness = 0.0;
  Tick tick = 0;  // issuance tick
  bool operator==(const KnowledgeRecord&) const = default;
};

std::string to_json_line(const KnowledgeRecord& r);
KnowledgeRecord parse_knowledge_record(std::string_view line);

struct KnowledgeFilter {
  std::optional<std::string> slo;
  std::optional<std::string> action;
  bool matches(const KnowledgeRecord& r) const;
};

/// Append-only knowledge log. With a file attached, every record is appended
/// as one JSON line and flushed before record() returns.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::filesystem::path file);

  /// Throws io when the record cannot be persisted; the in-memory log is
  /// left unchanged in that case.
  void record(const KnowledgeRecord& r);
  /// Chronological matches.
  std::vector<KnowledgeRecord> query(const KnowledgeFilter& filter) const;
  const std::vector<KnowledgeRecord>& records() const { return records_; }

  static KnowledgeBase load(const std::filesystem::path& file);

 private:
  std::optional<std::filesystem::path> file_;
  std::vector<KnowledgeRecord> records_;
};

struct OutcomeWindows {
  Tick window = kDefaultOutcomeWindow;  // length of the pre and post windows
  Tick settle = kDefaultSettleTicks;    // delay between issue and post window
  Tick post_start(Tick issued) const { return issued + settle; }
  Tick post_end(Tick issued) const { return issued + settle + window - 1; }
};

struct Outcome {
  double pre = 0.0;
  double post = 0.0;
  double effectiveness = 0.0;
};

/// Relative improvement of the SLO metric: (pre - post) / max(|pre|, eps)
/// when lower is better, sign flipped when higher is better. For == the
/// distance to the threshold is compared instead.
double effectiveness(double pre, double post, const SloCondition& slo);

/// Pre window [issue - window, issue - 1], post window starting `settle`
/// ticks after issue. Throws insufficient_data when either window has no
/// observed sample.
Outcome evaluate_outcome(const MetricStore& store, const PlannedAction& action,
                         const SloCondition& slo, const OutcomeWindows& windows = {});

}  // namespace sloloop
