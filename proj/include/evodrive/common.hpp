#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace evodrive {

// Invalid configuration, caught before any simulation runs.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void config_check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// Caller broke an API contract (size mismatch, bad enum value).
inline void contract_check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Round-trip exact double formatting; all numeric artifacts use this so
// repeated runs produce byte-identical files.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace evodrive
