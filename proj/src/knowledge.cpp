#include "sloloop/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sloloop/errors.hpp"
#include "sloloop/status.hpp"

namespace sloloop {

using nlohmann::json;

std::string to_json_line(const KnowledgeRecord& r) {
  json j{{"violation", r.violation},     {"cause", r.cause},
         {"action", r.action},           {"pre_value", r.pre_value},
         {"post_value", r.post_value},   {"effectiveness", r.effectiveness},
         {"tick", r.tick}};
  return j.dump();
}

KnowledgeRecord parse_knowledge_record(std::string_view line) {
  try {
    const json j = json::parse(line);
    return {j.at("violation").get<std::string>(), j.at("cause").get<std::string>(),
            j.at("action").get<std::string>(),    j.at("pre_value").get<double>(),
            j.at("post_value").get<double>(),     j.at("effectiveness").get<double>(),
            j.at("tick").get<Tick>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::syntax, fmt::format("bad knowledge record: {}", e.what()));
  }
}

bool KnowledgeFilter::matches(const KnowledgeRecord& r) const {
  return (!slo || *slo == r.violation) && (!action || *action == r.action);
}

KnowledgeBase::KnowledgeBase(std::filesystem::path file) : file_(std::move(file)) {}

void KnowledgeBase::record(const KnowledgeRecord& r) {
  if (!std::isfinite(r.effectiveness))
    throw Error(ErrorCode::invalid_value, "effectiveness must be finite");
  if (file_) {
    std::ofstream out(*file_, std::ios::app);
    out << to_json_line(r) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::io, fmt::format("cannot append to {}", file_->string()));
  }
  records_.push_back(r);
}

std::vector<KnowledgeRecord> KnowledgeBase::query(const KnowledgeFilter& filter) const {
  std::vector<KnowledgeRecord> out;
  std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
               [&](const KnowledgeRecord& r) { return filter.matches(r); });
  return out;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", file.string()));
  KnowledgeBase kb;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) kb.records_.push_back(parse_knowledge_record(line));
  return kb;
}

double effectiveness(double pre, double post, const SloCondition& slo) {
  if (slo.op == CompareOp::eq) {
    const double dpre = std::abs(pre - slo.threshold);
    const double dpost = std::abs(post - slo.threshold);
    return (dpre - dpost) / std::max(dpre, kEffectivenessEpsilon);
  }
  const double gain = (pre - post) / std::max(std::abs(pre), kEffectivenessEpsilon);
  return lower_is_better(slo.op) ? gain : -gain;
}

Outcome evaluate_outcome(const MetricStore& store, const PlannedAction& action,
                         const SloCondition& slo, const OutcomeWindows& windows) {
  const Tick issued = action.issued_tick;
  const auto pre = window_mean(store, slo.key(), issued - windows.window, issued - 1);
  const auto post =
      window_mean(store, slo.key(), windows.post_start(issued), windows.post_end(issued));
  if (!pre || !post)
    throw Error(ErrorCode::insufficient_data,
                fmt::format("cannot evaluate '{}' issued at {}: {} window has no data",
                            action.action, issued, pre ? "post" : "pre"));
  return {*pre, *post, effectiveness(*pre, *post, slo)};
}

}  // namespace sloloop
