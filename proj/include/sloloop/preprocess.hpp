#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sloloop/telemetry.hpp"
#include "sloloop/types.hpp"

namespace sloloop {

inline constexpr double kOutlierSigma = 3.0;

/// Gap-free series on a regular tick grid.
struct CleanSeries {
  MetricKey key;
  Tick start = 0;
  Tick step = 1;
  std::vector<double> values;
};

/// Clips |z| > 3 outliers to the 3-sigma bound, then resamples on a regular
/// grid. Interior gaps are linearly interpolated; leading and trailing gaps
/// take the nearest observed value. The grid spans [first, last] sample
/// timestamps unless `range` overrides it. Throws insufficient_data when
/// fewer than two samples carry a value.
CleanSeries clean_and_interpolate(const TimeSeries& series, Tick step = 1,
                                  std::optional<std::pair<Tick, Tick>> range = std::nullopt);

/// (x - min) / (max - min); a constant input maps to all zeros.
std::vector<double> minmax_normalize(std::span<const double> values);

/// Pearson coefficient; 0 when either side has zero variance.
/// Throws length_mismatch, or insufficient_data below 3 points.
double correlation(std::span<const double> a, std::span<const double> b);
double correlation(const CleanSeries& a, const CleanSeries& b);

double mean_of(std::span<const double> values);
double stddev_of(std::span<const double> values);  // population
double slope_of(std::span<const double> values);   // least squares over the index

}  // namespace sloloop
