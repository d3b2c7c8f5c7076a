#pragma once

#include <compare>

namespace gripstream {

// Thin tagged wrapper so volts, millivolts, ohms and newtons cannot be mixed
// up at conversion boundaries. Arithmetic is deliberately limited to what the
// conversions need; unwrap with value() for anything else.
template <class Tag>
class Quantity {
 public:
  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value_(v) {}

  constexpr double value() const { return value_; }

  constexpr auto operator<=>(const Quantity&) const = default;

  constexpr Quantity operator+(Quantity o) const { return Quantity{value_ + o.value_}; }
  constexpr Quantity operator-(Quantity o) const { return Quantity{value_ - o.value_}; }
  constexpr Quantity operator*(double k) const { return Quantity{value_ * k}; }
  constexpr double operator/(Quantity o) const { return value_ / o.value_; }

 private:
  double value_ = 0.0;
};

struct VoltsTag {};
struct MillivoltsTag {};
struct OhmsTag {};
struct NewtonsTag {};

using Volts = Quantity<VoltsTag>;
using Millivolts = Quantity<MillivoltsTag>;
using Ohms = Quantity<OhmsTag>;
using Newtons = Quantity<NewtonsTag>;

constexpr Millivolts to_millivolts(Volts v) { return Millivolts{v.value() * 1000.0}; }
constexpr Volts to_volts(Millivolts mv) { return Volts{mv.value() / 1000.0}; }

namespace literals {
constexpr Volts operator""_V(long double v) { return Volts{static_cast<double>(v)}; }
constexpr Millivolts operator""_mV(long double v) { return Millivolts{static_cast<double>(v)}; }
constexpr Millivolts operator""_mV(unsigned long long v) { return Millivolts{static_cast<double>(v)}; }
constexpr Ohms operator""_Ohm(unsigned long long v) { return Ohms{static_cast<double>(v)}; }
constexpr Newtons operator""_N(long double v) { return Newtons{static_cast<double>(v)}; }
constexpr Newtons operator""_N(unsigned long long v) { return Newtons{static_cast<double>(v)}; }
}  // namespace literals

}  // namespace gripstream
