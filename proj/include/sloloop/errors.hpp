#pragma once

#include <stdexcept>
#include <string>

namespace sloloop {

enum class ErrorCode {
  syntax,
  dangling_reference,
  invalid_token,
  duplicate_id,
  invalid_value,
  insufficient_data,
  not_found,
  undeclared_metric,
  dimension_mismatch,
  length_mismatch,
  unsupported,
  io,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sloloop
