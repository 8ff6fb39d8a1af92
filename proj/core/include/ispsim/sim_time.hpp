#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace ispsim {

// Simulated durations and time points.
//
// Stored as integer picoseconds so that every latency constant in the model
// (75 us page read, 2.5 ns controller cycle, ...) is exact and event ordering
// never depends on floating-point rounding. Interfaces and logs speak
// nanoseconds.
struct SimDuration {
  std::int64_t ps = 0;

  static constexpr SimDuration from_ps(std::int64_t v) { return {v}; }
  static SimDuration from_ns(double v);
  static SimDuration from_us(double v);
  static SimDuration from_ms(double v);

  double ns() const { return static_cast<double>(ps) / 1000.0; }

  constexpr auto operator<=>(const SimDuration&) const = default;
  constexpr SimDuration operator+(SimDuration o) const { return {ps + o.ps}; }
  constexpr SimDuration operator-(SimDuration o) const { return {ps - o.ps}; }
  constexpr SimDuration operator*(std::int64_t k) const { return {ps * k}; }
  SimDuration& operator+=(SimDuration o) {
    ps += o.ps;
    return *this;
  }
};

struct SimTime {
  std::int64_t ps = 0;

  static constexpr SimTime origin() { return {0}; }
  static constexpr SimTime from_ps(std::int64_t v) { return {v}; }

  double ns() const { return static_cast<double>(ps) / 1000.0; }

  constexpr auto operator<=>(const SimTime&) const = default;
  constexpr SimTime operator+(SimDuration d) const { return {ps + d.ps}; }
  constexpr SimDuration operator-(SimTime o) const { return {ps - o.ps}; }
  SimTime& operator+=(SimDuration d) {
    ps += d.ps;
    return *this;
  }
};

// "75000" for whole nanoseconds, "2.5" when a half-cycle remainder exists.
std::string format_ns(std::int64_t ps);
inline std::string format_ns(SimTime t) { return format_ns(t.ps); }
inline std::string format_ns(SimDuration d) { return format_ns(d.ps); }

}  // namespace ispsim
