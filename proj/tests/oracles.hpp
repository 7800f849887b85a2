#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sloloop/isolation_forest.hpp"
#include "sloloop/knowledge.hpp"
#include "sloloop/random.hpp"
#include "sloloop/status.hpp"

namespace sloloop::oracle {

// c(n) = 2 H(n-1) - 2 (n-1) / n with H(i) ~ ln(i) + gamma.
inline double oracle_c(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n);
  return 2.0 * (std::log(m - 1.0) + 0.5772156649015329) - 2.0 * (m - 1.0) / m;
}

// Exhaustive path-length evaluation: walk every tree from the root.
inline double oracle_score(const IsolationForest& forest, const std::vector<double>& x) {
  double total = 0.0;
  for (const auto& tree : forest.trees()) {
    std::size_t id = 0;
    int edges = 0;
    while (tree.nodes[id].feature >= 0) {
      const auto& n = tree.nodes[id];
      id = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.split ? n.left
                                                                                      : n.right);
      ++edges;
    }
    total += edges + oracle_c(tree.nodes[id].size);
  }
  const double mean = total / static_cast<double>(forest.trees().size());
  return std::pow(2.0, -mean / oracle_c(forest.subsample_size()));
}

inline std::vector<FeatureVector> planted_outlier_data() {
  RandomStream rng(2024);
  std::vector<FeatureVector> pts;
  for (int i = 0; i < 99; ++i) pts.push_back({rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)});
  pts.push_back({10.0, 10.0});
  return pts;
}

// Textbook form: cov / (sigma_a * sigma_b) from raw sums.
inline double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    sab += a[i] * b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double va = saa / n - (sa / n) * (sa / n);
  const double vb = sbb / n - (sb / n) * (sb / n);
  return cov / std::sqrt(va * vb);
}

/// One condition's setup: prior failing evaluations, debounce and final state.
struct ConditionCase {
  int debounce = 1;
  int prior_fails = 0;  // 0..debounce
  ConditionState final_state = ConditionState::pass;
};

struct TruthTableReport {
  std::size_t combinations = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

/// Conjunction with debounce, evaluated from first principles: the streak is
/// the number of trailing failing evaluations, a condition is violated when
/// it fails with streak >= debounce, and the verdict fails iff any is.
inline TruthTableReport check_status_truth_table(int max_conditions = 3) {
  constexpr Tick kWindow = 10;
  std::vector<ConditionCase> phases;
  for (auto state : {ConditionState::pass, ConditionState::fail, ConditionState::indeterminate})
    for (int d = 1; d <= 3; ++d)
      for (int s = 0; s <= d; ++s) phases.push_back({d, s, state});

  TruthTableReport report;
  for (int n = 1; n <= max_conditions; ++n) {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      ++report.combinations;
      Descriptor d;
      d.components = {{"svc", ComponentKind::service}};
      int prior = 0;
      for (int i = 0; i < n; ++i) {
        const std::string m = "m" + std::to_string(i);
        d.metrics.push_back({m, "svc", MetricLevel::application, ""});
        d.slos.push_back({"slo" + std::to_string(i), m, "svc", CompareOp::le, 1.0,
                          phases[idx[i]].debounce});
        prior = std::max(prior, phases[idx[i]].prior_fails);
      }
      MetricStore store;
      auto write = [&](int i, int eval, ConditionState s) {
        if (s == ConditionState::indeterminate) return;
        const double v = s == ConditionState::fail ? 2.0 : 0.5;
        for (Tick t = eval * kWindow; t < (eval + 1) * kWindow; ++t)
          store.ingest({"svc", "m" + std::to_string(i)}, {t, v});
      };
      for (int i = 0; i < n; ++i) {
        const auto& c = phases[idx[i]];
        for (int e = 0; e < prior; ++e)
          write(i, e, e >= prior - c.prior_fails ? ConditionState::fail : ConditionState::pass);
        write(i, prior, c.final_state);
      }
      StatusTracker tracker(kWindow);
      SystemStatus status;
      for (int e = 0; e <= prior; ++e) status = tracker.infer_status(d, store, e * kWindow + kWindow - 1);

      bool any_violated = false;
      std::vector<std::string> expected_violated;
      bool ok = status.conditions.size() == static_cast<std::size_t>(n);
      for (int i = 0; ok && i < n; ++i) {
        const auto& c = phases[idx[i]];
        const int streak = c.final_state == ConditionState::fail ? c.prior_fails + 1 : 0;
        const bool violated = c.final_state == ConditionState::fail && streak >= c.debounce;
        if (violated) expected_violated.push_back(d.slos[i].id);
        any_violated |= violated;
        const auto& r = status.conditions[i];
        ok = r.state == c.final_state && r.failing_streak == streak && r.violated == violated &&
             r.value.has_value() == (c.final_state != ConditionState::indeterminate);
      }
      if (ok) {
        ok = (status.verdict == Verdict::fail) == any_violated &&
             status.violated.size() == expected_violated.size();
        for (std::size_t k = 0; ok && k < expected_violated.size(); ++k)
          ok = status.violated[k].slo == expected_violated[k];
      }
      if (!ok) {
        if (report.mismatches == 0) {
          report.first_mismatch = "conditions:";
          for (int i = 0; i < n; ++i)
            report.first_mismatch += " (d=" + std::to_string(phases[idx[i]].debounce) +
                                     " prior=" + std::to_string(phases[idx[i]].prior_fails) +
                                     " final=" + std::string(to_string(phases[idx[i]].final_state)) + ")";
        }
        ++report.mismatches;
      }

      int k = 0;
      while (k < n && ++idx[k] == phases.size()) idx[k++] = 0;
      if (k == n) break;
    }
  }
  return report;
}

/// 100 records spread over a few SLOs and actions in interleaved order.
inline std::vector<KnowledgeRecord> interleaved_records(std::size_t n = 100, std::uint64_t seed = 7) {
  static const std::array<const char*, 3> kSlos{"rt", "fpt", "acc"};
  static const std::array<const char*, 4> kActions{"scale-2", "fps-cam1", "light", "cap"};
  RandomStream rng(seed);
  std::vector<KnowledgeRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    KnowledgeRecord r;
    r.violation = kSlos[rng.below(kSlos.size())];
    r.action = kActions[rng.below(kActions.size())];
    r.cause = "recognizer/queue_length";
    r.pre_value = rng.uniform(0.5, 2.0);
    r.post_value = rng.uniform(0.1, 2.0);
    r.effectiveness = (r.pre_value - r.post_value) / r.pre_value;
    r.tick = static_cast<Tick>(10 * i);
    out.push_back(r);
  }
  return out;
}

/// Counts filters over every (slo, action) combination, including absent
/// fields, whose query result differs from a plain linear scan.
inline std::size_t knowledge_query_mismatches(const KnowledgeBase& kb,
                                              const std::vector<KnowledgeRecord>& log) {
  std::vector<std::optional<std::string>> slos{std::nullopt, "rt", "fpt", "acc", "none"};
  std::vector<std::optional<std::string>> actions{std::nullopt, "scale-2", "fps-cam1", "light",
                                                  "cap", "none"};
  std::size_t mismatches = 0;
  for (const auto& s : slos)
    for (const auto& a : actions) {
      std::vector<KnowledgeRecord> expected;
      for (const auto& r : log)
        if ((!s || r.violation == *s) && (!a || r.action == *a)) expected.push_back(r);
      if (kb.query({s, a}) != expected) ++mismatches;
    }
  return mismatches;
}

}  // namespace sloloop::oracle
