#include <array>
#include <charconv>
#include <cmath>

#include "sloloop/errors.hpp"
#include "sloloop/types.hpp"

namespace sloloop {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::syntax: return "syntax";
    case ErrorCode::dangling_reference: return "dangling_reference";
    case ErrorCode::invalid_token: return "invalid_token";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::invalid_value: return "invalid_value";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::undeclared_metric: return "undeclared_metric";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "+Inf" : "-Inf";
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "NaN";
  return std::string(buf.data(), end);
}

}  // namespace sloloop
