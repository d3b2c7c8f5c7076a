#include "gripstream/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "gripstream/error.hpp"
#include "gripstream/key_value.hpp"

namespace gripstream {

namespace {

std::string lower(std::string_view text) {
  std::string out{text};
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr std::array<std::pair<SensorLocus, std::string_view>, kSensorCount> kLocusNames{{
    {SensorLocus::FingertipThumb, "FingertipThumb"},
    {SensorLocus::FingertipIndex, "FingertipIndex"},
    {SensorLocus::FingertipMiddle, "FingertipMiddle"},
    {SensorLocus::FingertipRing, "FingertipRing"},
    {SensorLocus::FingertipLittle, "FingertipLittle"},
    {SensorLocus::PhalanxIndex, "PhalanxIndex"},
    {SensorLocus::PhalanxMiddle, "PhalanxMiddle"},
    {SensorLocus::PhalanxRing, "PhalanxRing"},
    {SensorLocus::PhalanxLittle, "PhalanxLittle"},
    {SensorLocus::Thenar, "Thenar"},
    {SensorLocus::Hypothenar, "Hypothenar"},
    {SensorLocus::MidPalm, "MidPalm"},
}};

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

SensorId SensorId::from_number(int number) {
  if (number < 1 || number > static_cast<int>(kSensorCount)) {
    throw DomainError("sensor number out of range 1..12: " + std::to_string(number));
  }
  return SensorId{number};
}

SensorId SensorId::parse(std::string_view label) {
  auto text = trim(label);
  if (!text.empty() && (text.front() == 'S' || text.front() == 's')) text.remove_prefix(1);
  const auto n = parse_int(text);
  if (!n) throw DomainError("not a sensor label: '" + std::string{label} + "'");
  return from_number(static_cast<int>(*n));
}

std::string_view to_string(SensorLocus locus) {
  for (const auto& [l, name] : kLocusNames) {
    if (l == locus) return name;
  }
  return "?";
}

SensorLocus parse_locus(std::string_view text) {
  const auto wanted = lower(trim(text));
  for (const auto& [l, name] : kLocusNames) {
    if (lower(name) == wanted) return l;
  }
  throw ConfigError("unknown sensor locus '" + std::string{text} + "'");
}

SensorLayout default_sensor_layout() {
  SensorLayout layout{};
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    const auto locus = kLocusNames[i].first;
    layout[i] = SensorSpec{SensorId::from_slot(i), expected_diameter_mm(locus), locus};
  }
  return layout;
}

std::size_t slot_of(const SensorLayout& layout, SensorLocus locus) {
  for (const auto& spec : layout) {
    if (spec.locus == locus) return spec.id.slot();
  }
  throw ConfigError("sensor layout has no " + std::string{to_string(locus)} + " sensor");
}

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view to_string(Dominance dominance) {
  return dominance == Dominance::Dominant ? "dominant" : "nondominant";
}

char side_letter(Side side) { return side == Side::Left ? 'L' : 'R'; }

Side parse_side(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "left" || t == "l") return Side::Left;
  if (t == "right" || t == "r") return Side::Right;
  throw ConfigError("unknown hand side '" + std::string{text} + "'");
}

Dominance parse_dominance(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "dominant" || t == "d") return Dominance::Dominant;
  if (t == "nondominant" || t == "non-dominant" || t == "n") return Dominance::NonDominant;
  throw ConfigError("unknown hand dominance '" + std::string{text} + "'");
}

std::string_view to_string(ConversionMode mode) {
  return mode == ConversionMode::LinearCalibrated ? "linear" : "literal";
}

ConversionMode parse_conversion_mode(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "linear" || t == "linearcalibrated") return ConversionMode::LinearCalibrated;
  if (t == "literal" || t == "literaldivider") return ConversionMode::LiteralDivider;
  throw ConfigError("unknown conversion mode '" + std::string{text} + "'");
}

void validate(const GloveConfig& cfg) {
  if (!finite_positive(cfg.supply_voltage.value())) {
    throw ConfigError("supply voltage must be > 0");
  }
  if (!finite_positive(cfg.pulldown_resistance.value())) {
    throw ConfigError("pull-down resistance must be > 0");
  }
  if (cfg.sample_period.count() <= 0) throw ConfigError("sample period must be > 0 ms");
  if (!finite_positive(cfg.battery_nominal.value())) {
    throw ConfigError("battery nominal voltage must be > 0");
  }

  std::set<int> ids;
  int large = 0;
  int small = 0;
  for (const auto& spec : cfg.sensor_layout) {
    if (!ids.insert(spec.id.number()).second) {
      throw ConfigError("duplicate sensor id " + spec.id.label());
    }
    if (spec.diameter_mm != expected_diameter_mm(spec.locus)) {
      throw ConfigError(spec.id.label() + " at " + std::string{to_string(spec.locus)} +
                        " must have diameter " +
                        std::to_string(expected_diameter_mm(spec.locus)) + " mm");
    }
    (spec.diameter_mm == 10 ? large : small) += 1;
  }
  if (large != 8 || small != 4) {
    throw ConfigError("layout must have eight 10 mm and four 5 mm sensors");
  }
}

void validate(const Calibration& cal, const GloveConfig& cfg) {
  const double supply_mv = cfg.supply_millivolts().value();
  if (!finite_positive(cal.anchor_voltage.value()) || cal.anchor_voltage.value() >= supply_mv) {
    throw ConfigError("calibration anchor voltage must lie in (0, supply)");
  }
  if (!finite_positive(cal.anchor_force.value())) {
    throw ConfigError("calibration anchor force must be > 0");
  }
}

Volts divider_voltage(Ohms rfsr, const GloveConfig& cfg) {
  if (!finite_positive(rfsr.value())) {
    throw DomainError("FSR resistance must be > 0 ohm");
  }
  const double rpd = cfg.pulldown_resistance.value();
  return Volts{rpd * cfg.supply_voltage.value() / (rpd + rfsr.value())};
}

Ohms resistance_from_voltage(Volts v, const GloveConfig& cfg) {
  const double supply = cfg.supply_voltage.value();
  if (!(v.value() > 0.0 && v.value() < supply)) {
    throw DomainError("divider voltage must lie in (0, supply)");
  }
  return Ohms{cfg.pulldown_resistance.value() * (supply - v.value()) / v.value()};
}

Newtons force_from_voltage(Millivolts v, const Calibration& cal, const GloveConfig& cfg) {
  const double supply = cfg.supply_millivolts().value();
  const double mv = v.value();
  if (!(mv >= 0.0 && mv < supply)) {
    throw DomainError("voltage " + format_double(mv) + " mV outside [0, supply)");
  }
  const double va = cal.anchor_voltage.value();
  const double fa = cal.anchor_force.value();
  if (cfg.conversion_mode == ConversionMode::LinearCalibrated) {
    return Newtons{fa * (mv / va)};
  }
  // c * v / (S - v) with c = fa * (S - va) / va, grouped so v == va gives fa exactly.
  return Newtons{fa * (mv / va) * ((supply - va) / (supply - mv))};
}

Millivolts voltage_from_force(Newtons f, const Calibration& cal, const GloveConfig& cfg) {
  const double fa = cal.anchor_force.value();
  const double n = f.value();
  if (!(n >= 0.0 && n <= 2.0 * fa)) {
    throw DomainError("force " + format_double(n) + " N outside calibrated range [0, " +
                      format_double(2.0 * fa) + "]");
  }
  const double supply = cfg.supply_millivolts().value();
  const double va = cal.anchor_voltage.value();
  double mv = 0.0;
  if (cfg.conversion_mode == ConversionMode::LinearCalibrated) {
    mv = va * (n / fa);
    if (mv >= supply) {
      throw DomainError("force " + format_double(n) + " N maps at or above supply voltage");
    }
  } else {
    const double c = fa * (supply - va) / va;
    mv = supply * n / (c + n);
  }
  return Millivolts{mv};
}

DeviceConfig read_device_config(std::istream& in, const std::string& source_name) {
  const auto file = KeyValueFile::parse(in, source_name);
  file.reject_unknown({"supply_voltage_v", "pulldown_resistance_ohm", "sample_period_ms",
                       "battery_nominal_v", "conversion_mode", "anchor_voltage_mv",
                       "anchor_force_n", "sensor."});
  DeviceConfig config;
  auto& g = config.glove;
  if (auto v = file.get_double("supply_voltage_v")) g.supply_voltage = Volts{*v};
  if (auto v = file.get_double("pulldown_resistance_ohm")) g.pulldown_resistance = Ohms{*v};
  if (auto v = file.get_int("sample_period_ms")) g.sample_period = std::chrono::milliseconds{*v};
  if (auto v = file.get_double("battery_nominal_v")) g.battery_nominal = Volts{*v};
  if (auto v = file.get_string("conversion_mode")) g.conversion_mode = parse_conversion_mode(*v);
  if (auto v = file.get_double("anchor_voltage_mv")) config.calibration.anchor_voltage = Millivolts{*v};
  if (auto v = file.get_double("anchor_force_n")) config.calibration.anchor_force = Newtons{*v};

  for (const auto& e : file.entries()) {
    if (!e.key.starts_with("sensor.")) continue;
    try {
      const auto id = SensorId::parse(std::string_view{e.key}.substr(7));
      const auto parts = split(e.value, ',');
      if (parts.size() != 2) throw ConfigError("expected '<locus>,<diameter_mm>'");
      const auto diameter = parse_int(parts[1]);
      if (!diameter) throw ConfigError("diameter is not an integer");
      g.sensor_layout[id.slot()] = SensorSpec{id, static_cast<int>(*diameter), parse_locus(parts[0])};
    } catch (const Error& err) {
      throw ParseError(file.source(), e.line, err.what());
    }
  }
  validate(g);
  validate(config.calibration, g);
  return config;
}

DeviceConfig load_device_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return read_device_config(in, path);
}

void write_device_config(std::ostream& out, const DeviceConfig& config) {
  const auto& g = config.glove;
  out << "# gripstream device configuration (SI units)\n";
  out << "supply_voltage_v = " << format_double(g.supply_voltage.value()) << '\n';
  out << "pulldown_resistance_ohm = " << format_double(g.pulldown_resistance.value()) << '\n';
  out << "sample_period_ms = " << g.sample_period.count() << '\n';
  out << "battery_nominal_v = " << format_double(g.battery_nominal.value()) << '\n';
  out << "conversion_mode = " << to_string(g.conversion_mode) << '\n';
  out << "anchor_voltage_mv = " << format_double(config.calibration.anchor_voltage.value()) << '\n';
  out << "anchor_force_n = " << format_double(config.calibration.anchor_force.value()) << '\n';
  for (const auto& spec : g.sensor_layout) {
    out << "sensor." << spec.id.label() << " = " << to_string(spec.locus) << ','
        << spec.diameter_mm << '\n';
  }
}

}  // namespace gripstream
