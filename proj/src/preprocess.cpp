#include "sloloop/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sloloop/errors.hpp"

namespace sloloop {

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mu = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double slope_of(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double x_mean = static_cast<double>(n - 1) / 2.0;
  const double y_mean = mean_of(values);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    num += dx * (values[i] - y_mean);
    den += dx * dx;
  }
  return num / den;
}

CleanSeries clean_and_interpolate(const TimeSeries& series, Tick step,
                                  std::optional<std::pair<Tick, Tick>> range) {
  if (step <= 0) throw Error(ErrorCode::invalid_value, "grid step must be positive");

  std::vector<Tick> ts;
  std::vector<double> vs;
  for (const auto& s : series.samples) {
    if (s.value) {
      ts.push_back(s.timestamp);
      vs.push_back(*s.value);
    }
  }
  if (vs.size() < 2)
    throw Error(ErrorCode::insufficient_data,
                fmt::format("series '{}' has fewer than 2 observed samples",
                            series.key.node_name()));

  const double mu = mean_of(vs);
  const double sigma = stddev_of(vs);
  const double lo = mu - kOutlierSigma * sigma;
  const double hi = mu + kOutlierSigma * sigma;
  for (double& v : vs) v = std::clamp(v, lo, hi);

  Tick first = series.samples.front().timestamp;
  Tick last = series.samples.back().timestamp;
  if (range) std::tie(first, last) = *range;
  if (first > last) throw Error(ErrorCode::invalid_value, "grid range requires first <= last");

  CleanSeries out{series.key, first, step, {}};
  out.values.reserve(static_cast<std::size_t>((last - first) / step + 1));
  std::size_t j = 0;  // first observed index with ts[j] >= t
  for (Tick t = first; t <= last; t += step) {
    while (j < ts.size() && ts[j] < t) ++j;
    double v;
    if (j < ts.size() && ts[j] == t) {
      v = vs[j];
    } else if (j == 0) {
      v = vs.front();
    } else if (j == ts.size()) {
      v = vs.back();
    } else {
      const double frac = static_cast<double>(t - ts[j - 1]) /
                          static_cast<double>(ts[j] - ts[j - 1]);
      v = vs[j - 1] + frac * (vs[j] - vs[j - 1]);
    }
    out.values.push_back(v);
  }
  return out;
}

std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::invalid_value, "minmax_normalize of empty input");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double range = *max_it - lo;
  std::vector<double> out(values.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i)
      out[i] = std::clamp((values[i] - lo) / range, 0.0, 1.0);
  }
  return out;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::length_mismatch,
                fmt::format("correlation of series with lengths {} and {}", a.size(), b.size()));
  if (a.size() < 3)
    throw Error(ErrorCode::insufficient_data, "correlation needs at least 3 points");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double correlation(const CleanSeries& a, const CleanSeries& b) {
  return correlation(std::span<const double>(a.values), std::span<const double>(b.values));
}

}  // namespace sloloop
