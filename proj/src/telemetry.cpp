#include "sloloop/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "sloloop/errors.hpp"

namespace sloloop {

MetricStore::MetricStore(Tick retention, bool auto_register)
    : retention_(retention), auto_register_(auto_register) {
  if (retention_ <= 0) throw Error(ErrorCode::invalid_value, "retention must be positive");
}

void MetricStore::declare(const MetricKey& key) {
  std::unique_lock lock(index_mutex_);
  series_.try_emplace(key, std::make_unique<Series>());
}

MetricStore::Series* MetricStore::find_series(const MetricKey& key) const {
  std::shared_lock lock(index_mutex_);
  auto it = series_.find(key);
  return it == series_.end() ? nullptr : it->second.get();
}

MetricStore::Series& MetricStore::series_for_ingest(const MetricKey& key) {
  if (Series* s = find_series(key)) return *s;
  if (!auto_register_)
    throw Error(ErrorCode::undeclared_metric,
                fmt::format("metric '{}' on component '{}' is not declared", key.metric,
                            key.component));
  std::unique_lock lock(index_mutex_);
  auto [it, inserted] = series_.try_emplace(key, std::make_unique<Series>());
  return *it->second;
}

void MetricStore::ingest(const MetricKey& key, Sample sample) {
  if (sample.timestamp < 0)
    throw Error(ErrorCode::invalid_value, "sample timestamp must be non-negative");
  if (sample.value && !std::isfinite(*sample.value))
    throw Error(ErrorCode::invalid_value,
                fmt::format("non-finite value for '{}'; use the missing marker",
                            key.node_name()));

  Series& series = series_for_ingest(key);
  std::lock_guard lock(series.mutex);
  auto& samples = series.samples;
  if (samples.empty() || samples.back().timestamp < sample.timestamp) {
    samples.push_back(sample);
  } else {
    auto it = std::lower_bound(
        samples.begin(), samples.end(), sample.timestamp,
        [](const Sample& s, Tick t) { return s.timestamp < t; });
    if (it != samples.end() && it->timestamp == sample.timestamp)
      *it = sample;
    else
      samples.insert(it, sample);
  }
  const Tick horizon = samples.back().timestamp - retention_;
  while (!samples.empty() && samples.front().timestamp < horizon) samples.pop_front();
}

void MetricStore::ingest_batch(const std::vector<MetricPoint>& batch) {
  for (const auto& p : batch) ingest(p);
}

TimeSeries MetricStore::query_window(const MetricKey& key, Tick t0, Tick t1) const {
  if (t0 > t1) throw Error(ErrorCode::invalid_value, "query window requires t0 <= t1");
  const Series* series = find_series(key);
  if (!series)
    throw Error(ErrorCode::not_found, fmt::format("unknown series '{}'", key.node_name()));

  TimeSeries out{key, {}};
  std::lock_guard lock(series->mutex);
  const auto& samples = series->samples;
  auto first = std::lower_bound(samples.begin(), samples.end(), t0,
                                [](const Sample& s, Tick t) { return s.timestamp < t; });
  auto last = std::upper_bound(samples.begin(), samples.end(), t1,
                               [](Tick t, const Sample& s) { return t < s.timestamp; });
  if (first < last) out.samples.assign(first, last);
  return out;
}

TimeSeries MetricStore::query_all(const MetricKey& key) const {
  const Series* series = find_series(key);
  if (!series)
    throw Error(ErrorCode::not_found, fmt::format("unknown series '{}'", key.node_name()));
  std::lock_guard lock(series->mutex);
  return {key, {series->samples.begin(), series->samples.end()}};
}

bool MetricStore::contains(const MetricKey& key) const { return find_series(key) != nullptr; }

std::vector<MetricKey> MetricStore::keys() const {
  std::shared_lock lock(index_mutex_);
  std::vector<MetricKey> out;
  out.reserve(series_.size());
  for (const auto& [k, _] : series_) out.push_back(k);
  return out;
}

std::size_t MetricStore::sample_count(const MetricKey& key) const {
  const Series* series = find_series(key);
  if (!series) return 0;
  std::lock_guard lock(series->mutex);
  return series->samples.size();
}

void MetricStore::compact(Tick now) {
  std::shared_lock lock(index_mutex_);
  const Tick horizon = now - retention_;
  for (auto& [_, series] : series_) {
    std::lock_guard series_lock(series->mutex);
    auto& samples = series->samples;
    while (!samples.empty() && samples.front().timestamp < horizon) samples.pop_front();
  }
}

std::string MetricStore::export_snapshot() const {
  std::shared_lock lock(index_mutex_);
  std::string out;
  for (const auto& [key, series] : series_) {
    std::lock_guard series_lock(series->mutex);
    if (series->samples.empty()) continue;
    const Sample& latest = series->samples.back();
    out += fmt::format("{}{{component=\"{}\"}} {} {}\n", key.metric, key.component,
                       latest.value ? format_number(*latest.value) : "NaN", latest.timestamp);
  }
  if (!out.empty()) out += "# EOF\n";
  return out;
}

void MetricStore::write_csv(std::ostream& out) const {
  std::shared_lock lock(index_mutex_);
  out << "component,metric,timestamp,value\n";
  for (const auto& [key, series] : series_) {
    std::lock_guard series_lock(series->mutex);
    for (const auto& s : series->samples) {
      out << key.component << ',' << key.metric << ',' << s.timestamp << ',';
      if (s.value) out << format_number(*s.value);
      out << '\n';
    }
  }
}

std::vector<MetricPoint> read_csv(std::istream& in) {
  std::vector<MetricPoint> points;
  std::string line;
  if (!std::getline(in, line)) return points;
  if (line != "component,metric,timestamp,value")
    throw Error(ErrorCode::syntax, "telemetry CSV: unexpected header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4)
      throw Error(ErrorCode::syntax, fmt::format("telemetry CSV line {}: expected 4 fields", line_no));
    MetricPoint p;
    p.key = {fields[0], fields[1]};
    try {
      p.sample.timestamp = std::stoll(fields[2]);
      if (!fields[3].empty()) p.sample.value = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::syntax, fmt::format("telemetry CSV line {}: bad number", line_no));
    }
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace sloloop
