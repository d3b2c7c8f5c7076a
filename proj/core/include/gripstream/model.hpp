#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "gripstream/units.hpp"

namespace gripstream {

inline constexpr std::size_t kSensorCount = 12;

// One of the twelve FSR positions, S1..S12.
class SensorId {
 public:
  constexpr SensorId() = default;

  // number is 1-based (S1 == 1). Throws DomainError outside 1..12.
  static SensorId from_number(int number);
  // Zero-based slot, as used to index per-sensor arrays.
  static SensorId from_slot(std::size_t slot) { return from_number(static_cast<int>(slot) + 1); }
  // Accepts "S3", "s3" or "3".
  static SensorId parse(std::string_view label);

  constexpr int number() const { return number_; }
  constexpr std::size_t slot() const { return static_cast<std::size_t>(number_ - 1); }
  std::string label() const { return "S" + std::to_string(number_); }

  constexpr auto operator<=>(const SensorId&) const = default;

 private:
  constexpr explicit SensorId(int number) : number_(number) {}
  int number_ = 1;
};

enum class SensorLocus {
  FingertipThumb,
  FingertipIndex,
  FingertipMiddle,
  FingertipRing,
  FingertipLittle,
  PhalanxIndex,
  PhalanxMiddle,
  PhalanxRing,
  PhalanxLittle,
  Thenar,
  Hypothenar,
  MidPalm,
};

std::string_view to_string(SensorLocus locus);
SensorLocus parse_locus(std::string_view text);

// Fingertip and palm FSRs are 10 mm parts; middle-phalanx FSRs are 5 mm.
constexpr int expected_diameter_mm(SensorLocus locus) {
  switch (locus) {
    case SensorLocus::PhalanxIndex:
    case SensorLocus::PhalanxMiddle:
    case SensorLocus::PhalanxRing:
    case SensorLocus::PhalanxLittle:
      return 5;
    default:
      return 10;
  }
}

struct SensorSpec {
  SensorId id;
  int diameter_mm = 10;
  SensorLocus locus = SensorLocus::FingertipThumb;

  bool operator==(const SensorSpec&) const = default;
};

using SensorLayout = std::array<SensorSpec, kSensorCount>;

// S1..S5 fingertips thumb to little, S6..S9 middle phalanges index to little,
// S10 thenar, S11 hypothenar, S12 mid-palm.
SensorLayout default_sensor_layout();

// Slot of the first sensor in the layout placed at the given locus.
std::size_t slot_of(const SensorLayout& layout, SensorLocus locus);

// The side values double as the glove byte on the wire ('L' / 'R').
enum class Side : std::uint8_t { Left = 0x4C, Right = 0x52 };
enum class Dominance { Dominant, NonDominant };

std::string_view to_string(Side side);
std::string_view to_string(Dominance dominance);
Side parse_side(std::string_view text);
Dominance parse_dominance(std::string_view text);
char side_letter(Side side);

struct Hand {
  Side side = Side::Right;
  Dominance dominance = Dominance::Dominant;

  auto operator<=>(const Hand&) const = default;
};

enum class ConversionMode {
  // force = v * anchor_force / anchor_voltage
  LinearCalibrated,
  // force = c * v / (supply - v), c fixed so the anchor maps exactly
  LiteralDivider,
};

std::string_view to_string(ConversionMode mode);
ConversionMode parse_conversion_mode(std::string_view text);

struct GloveConfig {
  Volts supply_voltage{3.3};
  Ohms pulldown_resistance{10'000.0};
  std::chrono::milliseconds sample_period{20};
  SensorLayout sensor_layout = default_sensor_layout();
  Volts battery_nominal{4.2};
  ConversionMode conversion_mode = ConversionMode::LinearCalibrated;

  Millivolts supply_millivolts() const { return to_millivolts(supply_voltage); }

  bool operator==(const GloveConfig&) const = default;
};

// Throws ConfigError when an invariant does not hold.
void validate(const GloveConfig& cfg);

// Single per-glove calibration point; zero force maps to zero volts.
struct Calibration {
  Millivolts anchor_voltage{1500.0};
  Newtons anchor_force{10.0};

  bool operator==(const Calibration&) const = default;
};

void validate(const Calibration& cal, const GloveConfig& cfg);

// Voltage divider output for a given FSR resistance.
Volts divider_voltage(Ohms rfsr, const GloveConfig& cfg);

// Inverse of divider_voltage. Requires 0 < v < supply.
Ohms resistance_from_voltage(Volts v, const GloveConfig& cfg);

// Requires 0 <= v < supply. Mode taken from cfg.conversion_mode.
Newtons force_from_voltage(Millivolts v, const Calibration& cal, const GloveConfig& cfg);

// Inverse of force_from_voltage over [0, 2 * anchor_force].
Millivolts voltage_from_force(Newtons f, const Calibration& cal, const GloveConfig& cfg);

// Plain-text key-value form:
//   supply_voltage_v, pulldown_resistance_ohm, sample_period_ms,
//   battery_nominal_v, conversion_mode, anchor_voltage_mv, anchor_force_n,
//   sensor.S<k> = <locus>,<diameter_mm>
// Keys absent from the input keep their defaults.
struct DeviceConfig {
  GloveConfig glove;
  Calibration calibration;

  bool operator==(const DeviceConfig&) const = default;
};

DeviceConfig read_device_config(std::istream& in, const std::string& source_name = "<config>");
DeviceConfig load_device_config(const std::string& path);
void write_device_config(std::ostream& out, const DeviceConfig& config);

}  // namespace gripstream
