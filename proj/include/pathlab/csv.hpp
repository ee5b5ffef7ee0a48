#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>

namespace pathlab::csv {

/// Shortest-safe round-trip text for a double ("%.17g"); nan/inf spelled out.
inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string num(unsigned long long x) { return std::to_string(x); }
inline std::string num(unsigned long x) { return std::to_string(x); }
inline std::string num(unsigned int x) { return std::to_string(x); }
inline std::string num(long long x) { return std::to_string(x); }
inline std::string num(long x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }
inline std::string num(std::string_view s) { return std::string(s); }
inline std::string num(const char* s) { return s; }

template <typename First, typename... Rest>
void row(std::ostream& out, const First& first, const Rest&... rest) {
  out << num(first);
  ((out << ',' << num(rest)), ...);
  out << '\n';
}

}  // namespace pathlab::csv
