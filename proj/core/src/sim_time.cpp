#include "ispsim/sim_time.hpp"

#include <cmath>
#include <cstdio>

namespace ispsim {

SimDuration SimDuration::from_ns(double v) {
  return {static_cast<std::int64_t>(std::llround(v * 1e3))};
}

SimDuration SimDuration::from_us(double v) {
  return {static_cast<std::int64_t>(std::llround(v * 1e6))};
}

SimDuration SimDuration::from_ms(double v) {
  return {static_cast<std::int64_t>(std::llround(v * 1e9))};
}

std::string format_ns(std::int64_t ps) {
  const bool neg = ps < 0;
  std::uint64_t abs = neg ? static_cast<std::uint64_t>(-ps) : static_cast<std::uint64_t>(ps);
  std::uint64_t whole = abs / 1000;
  std::uint64_t frac = abs % 1000;
  char buf[48];
  if (frac == 0) {
    std::snprintf(buf, sizeof(buf), "%s%llu", neg ? "-" : "", static_cast<unsigned long long>(whole));
  } else {
    std::snprintf(buf, sizeof(buf), "%s%llu.%03llu", neg ? "-" : "",
                  static_cast<unsigned long long>(whole), static_cast<unsigned long long>(frac));
    // trim trailing zeros of the fractional part
    std::string s(buf);
    while (s.back() == '0') s.pop_back();
    return s;
  }
  return buf;
}

}  // namespace ispsim
