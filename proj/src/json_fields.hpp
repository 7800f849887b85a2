#pragma once

// JSON field accessors shared by the descriptor and scenario parsers.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sloloop/errors.hpp"

namespace sloloop::detail {

using nlohmann::json;

template <typename Enum, std::size_t N>
struct TokenTable {
  std::array<std::pair<Enum, std::string_view>, N> entries;

  std::string_view name(Enum v) const {
    for (const auto& [e, s] : entries)
      if (e == v) return s;
    return "?";
  }
  std::optional<Enum> parse(std::string_view token) const {
    for (const auto& [e, s] : entries)
      if (s == token) return e;
    return std::nullopt;
  }
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(ErrorCode::syntax, fmt::format("{}: expected an object", path));
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::syntax, fmt::format("{}: missing key '{}'", path, key));
  return *it;
}

inline std::string get_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) fail(ErrorCode::syntax, fmt::format("{}.{}: expected a string", path, key));
  return v.get<std::string>();
}

inline std::string get_string_or(const json& obj, const char* key, const std::string& path,
                                 std::string fallback) {
  if (!obj.contains(key)) return fallback;
  return get_string(obj, key, path);
}

inline double get_number(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) fail(ErrorCode::syntax, fmt::format("{}.{}: expected a number", path, key));
  return v.get<double>();
}

inline double get_number_or(const json& obj, const char* key, const std::string& path,
                            double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj, key, path);
}

inline int get_int_or(const json& obj, const char* key, const std::string& path, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    fail(ErrorCode::syntax, fmt::format("{}.{}: expected an integer", path, key));
  return v.get<int>();
}

inline const json& get_array_or_empty(const json& root, const char* key) {
  static const json kEmpty = json::array();
  auto it = root.find(key);
  if (it == root.end()) return kEmpty;
  if (!it->is_array()) fail(ErrorCode::syntax, fmt::format("{}: expected an array", key));
  return *it;
}

template <typename Enum, std::size_t N>
Enum get_token(const json& obj, const char* key, const std::string& path,
               const TokenTable<Enum, N>& table) {
  std::string token = get_string(obj, key, path);
  auto parsed = table.parse(token);
  if (!parsed)
    fail(ErrorCode::invalid_token,
         fmt::format("{}.{}: invalid {} token '{}'", path, key, key, token));
  return *parsed;
}

}  // namespace sloloop::detail
