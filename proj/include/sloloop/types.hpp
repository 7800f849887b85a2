#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace sloloop {

// Simulation time. One tick is one second of simulated time.
using Tick = std::int64_t;

struct MetricKey {
  std::string component;
  std::string metric;

  auto operator<=>(const MetricKey&) const = default;
  bool operator==(const MetricKey&) const = default;

  // Node name used in the dependency graph and in trace payloads.
  std::string node_name() const { return component + "/" + metric; }
};

// Shortest decimal representation that round-trips to the same double.
std::string format_number(double value);

}  // namespace sloloop
