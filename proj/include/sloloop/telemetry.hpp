#pragma once

#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "sloloop/types.hpp"

namespace sloloop {

/// One observation. An empty `value` is the explicit missing marker.
struct Sample {
  Tick timestamp = 0;
  std::optional<double> value;

  bool missing() const { return !value.has_value(); }
  bool operator==(const Sample&) const = default;
};

struct TimeSeries {
  MetricKey key;
  std::vector<Sample> samples;  // strictly increasing timestamps
};

struct MetricPoint {
  MetricKey key;
  Sample sample;
};

inline constexpr Tick kDefaultRetentionTicks = 10'000;

/// In-memory time-series store keyed by (component, metric).
///
/// Each series is a timestamp-ordered buffer guarded by its own mutex; the
/// index is guarded by a shared mutex so lookups run concurrently with
/// ingestion into other series. Samples older than latest - retention are
/// compacted away on ingest.
class MetricStore {
 public:
  explicit MetricStore(Tick retention = kDefaultRetentionTicks, bool auto_register = true);

  MetricStore(const MetricStore&) = delete;
  MetricStore& operator=(const MetricStore&) = delete;

  /// Makes (component, metric) ingestible when auto-registration is off.
  void declare(const MetricKey& key);

  /// Last write wins on a duplicate timestamp. Throws undeclared_metric or
  /// invalid_value (non-finite value, negative timestamp).
  void ingest(const MetricKey& key, Sample sample);
  void ingest(const MetricPoint& point) { ingest(point.key, point.sample); }
  void ingest_batch(const std::vector<MetricPoint>& batch);

  /// Samples with t0 <= timestamp <= t1. Throws not_found for an unknown key.
  TimeSeries query_window(const MetricKey& key, Tick t0, Tick t1) const;

  /// Entire retained series.
  TimeSeries query_all(const MetricKey& key) const;

  bool contains(const MetricKey& key) const;
  std::vector<MetricKey> keys() const;
  std::size_t sample_count(const MetricKey& key) const;

  /// Drops samples with timestamp < now - retention from every series.
  void compact(Tick now);

  Tick retention() const { return retention_; }
  bool auto_register() const { return auto_register_; }
  void set_auto_register(bool on) { auto_register_ = on; }

  /// Text exposition snapshot: latest sample per series, sorted by
  /// component then metric, terminated by "# EOF". Empty store yields "".
  std::string export_snapshot() const;

  /// CSV dump: header `component,metric,timestamp,value`, one row per sample.
  void write_csv(std::ostream& out) const;

 private:
  struct Series {
    mutable std::mutex mutex;
    std::deque<Sample> samples;
  };

  Series* find_series(const MetricKey& key) const;
  Series& series_for_ingest(const MetricKey& key);

  Tick retention_;
  bool auto_register_;
  mutable std::shared_mutex index_mutex_;
  std::map<MetricKey, std::unique_ptr<Series>> series_;
};

/// Parses a CSV dump produced by MetricStore::write_csv.
std::vector<MetricPoint> read_csv(std::istream& in);

}  // namespace sloloop
