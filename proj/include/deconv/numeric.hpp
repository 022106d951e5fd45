#pragma once

#include <stdexcept>
#include <string>

namespace deconv {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;
inline constexpr double kSqrt2Pi = 2.50662827463100050241;   // sqrt(2*pi)
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Bad configuration: unknown keys, out-of-range values, incompatible choices.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input data.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation left its validity envelope (divergence, failed bracket, NaN).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace deconv
