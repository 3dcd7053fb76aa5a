#pragma once

#include <charconv>
#include <string>
#include <system_error>

#include "octnet/errors.hpp"

namespace octnet {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw io_error(context + ": invalid number '" + text + "'");
  return value;
}

inline long long parse_int(const std::string& text, const std::string& context) {
  long long value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw io_error(context + ": invalid integer '" + text + "'");
  return value;
}

}  // namespace octnet
