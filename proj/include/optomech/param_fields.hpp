#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optomech/constants.hpp"
#include "optomech/error.hpp"
#include "optomech/params.hpp"

namespace optomech {

// Each PhysicalParams field is addressed by its conventional symbol. Values
// cross the user boundary in "caption units": temperatures in mK, the PA gain
// and the two inter-cavity couplings in multiples of Gamma, everything else
// in SI.
enum class UnitKind { Mass, AngularFrequency, Length, Power, Temperature, GammaMultiple,
                      Angle, Dimensionless };

struct UnitSuffix {
  std::string_view name;
  double to_si;  // multiply a value in this unit by to_si to get SI
};

struct ParamField {
  std::string_view name;
  double PhysicalParams::*member;
  UnitKind kind;
  std::string_view canonical_unit;  // unit used for display and config dumps
  std::string_view column;          // CSV column label
};

inline constexpr std::array<ParamField, 14> kParamFields{{
    {"m", &PhysicalParams::mass, UnitKind::Mass, "kg", "m_kg"},
    {"omega_M", &PhysicalParams::omega_m, UnitKind::AngularFrequency, "rad/s", "omega_M_rad_s"},
    {"omega_c", &PhysicalParams::omega_c, UnitKind::AngularFrequency, "rad/s", "omega_c_rad_s"},
    {"omega_l", &PhysicalParams::omega_l, UnitKind::AngularFrequency, "rad/s", "omega_l_rad_s"},
    {"L", &PhysicalParams::cavity_length, UnitKind::Length, "m", "L_m"},
    {"P", &PhysicalParams::power, UnitKind::Power, "W", "P_W"},
    {"Gamma", &PhysicalParams::cavity_decay, UnitKind::AngularFrequency, "rad/s", "Gamma_rad_s"},
    {"gamma", &PhysicalParams::mech_damping, UnitKind::AngularFrequency, "rad/s", "gamma_rad_s"},
    {"T", &PhysicalParams::temperature, UnitKind::Temperature, "mK", "T_mK"},
    {"r", &PhysicalParams::squeezing, UnitKind::Dimensionless, "", "r"},
    {"lambda", &PhysicalParams::pa_gain, UnitKind::GammaMultiple, "Gamma", "lambda_Gamma"},
    {"theta", &PhysicalParams::pa_phase, UnitKind::Angle, "rad", "theta_rad"},
    {"alpha", &PhysicalParams::hopping, UnitKind::GammaMultiple, "Gamma", "alpha_Gamma"},
    {"beta", &PhysicalParams::tunneling, UnitKind::GammaMultiple, "Gamma", "beta_Gamma"},
}};

inline const ParamField* find_param_field(std::string_view name) {
  for (const auto& f : kParamFields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

inline const ParamField& param_field(std::string_view name) {
  if (const ParamField* f = find_param_field(name)) return *f;
  throw Error(ErrorKind::ConfigParseError, "unknown parameter '" + std::string(name) + "'");
}

// Accepted unit suffixes per kind; the first entry is the canonical unit.
// GammaMultiple "Gamma" is resolved against the cavity decay rate at use.
inline std::span<const UnitSuffix> unit_suffixes(UnitKind kind) {
  using constants::kTwoPi;
  static constexpr UnitSuffix mass[] = {{"kg", 1.0}, {"g", 1e-3}, {"mg", 1e-6},
                                        {"ug", 1e-9}, {"ng", 1e-12}};
  static constexpr UnitSuffix freq[] = {{"rad/s", 1.0},        {"Hz", kTwoPi},
                                        {"kHz", kTwoPi * 1e3}, {"MHz", kTwoPi * 1e6},
                                        {"GHz", kTwoPi * 1e9}, {"THz", kTwoPi * 1e12}};
  static constexpr UnitSuffix length[] = {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3},
                                          {"um", 1e-6}};
  static constexpr UnitSuffix power[] = {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}};
  static constexpr UnitSuffix temp[] = {{"mK", 1e-3}, {"K", 1.0}, {"uK", 1e-6}};
  static constexpr UnitSuffix gamma_multiple[] = {{"Gamma", 0.0}, {"rad/s", 1.0}};
  static constexpr UnitSuffix angle[] = {{"rad", 1.0}, {"deg", constants::kPi / 180.0}};
  static constexpr UnitSuffix none[] = {{"", 1.0}};
  switch (kind) {
    case UnitKind::Mass: return mass;
    case UnitKind::AngularFrequency: return freq;
    case UnitKind::Length: return length;
    case UnitKind::Power: return power;
    case UnitKind::Temperature: return temp;
    case UnitKind::GammaMultiple: return gamma_multiple;
    case UnitKind::Angle: return angle;
    case UnitKind::Dimensionless: return none;
  }
  return none;
}

// Value in caption units (what config files and CSV columns carry).
inline double to_caption_units(const ParamField& f, const PhysicalParams& p) {
  const double si = p.*f.member;
  if (f.kind == UnitKind::GammaMultiple) return si / p.cavity_decay;
  return si / unit_suffixes(f.kind).front().to_si;
}

inline double caption_value(const PhysicalParams& p, std::string_view name) {
  return to_caption_units(param_field(name), p);
}

// Stores `value` given in `unit` (empty = canonical) into p.
inline void set_in_unit(const ParamField& f, PhysicalParams& p, double value,
                        std::string_view unit = {}) {
  const auto suffixes = unit_suffixes(f.kind);
  const UnitSuffix* chosen = unit.empty() ? &suffixes.front() : nullptr;
  for (const auto& s : suffixes) {
    if (!chosen && s.name == unit) chosen = &s;
  }
  if (!chosen) {
    throw Error(ErrorKind::ConfigParseError, "unit '" + std::string(unit) +
                                                 "' does not apply to parameter '" +
                                                 std::string(f.name) + "'");
  }
  if (f.kind == UnitKind::GammaMultiple && chosen->name == "Gamma") {
    p.*f.member = value * p.cavity_decay;
  } else {
    p.*f.member = value * chosen->to_si;
  }
}

/// Parses "<number> [unit]" strictly; trailing garbage is an error.
inline std::pair<double, std::string> parse_quantity(std::string_view text) {
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  text = trim(text);
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr == begin) {
    throw Error(ErrorKind::ConfigParseError, "expected a number, got '" + std::string(text) + "'");
  }
  const std::string_view rest = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
  if (rest.find_first_of(" \t") != std::string_view::npos) {
    throw Error(ErrorKind::ConfigParseError, "malformed quantity '" + std::string(text) + "'");
  }
  return {value, std::string(rest)};
}

// Shortest text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == v) break;
  }
  return buf;
}

// Writes `si` as "<x> <canonical unit>" if that reproduces `si` exactly on
// re-parse, otherwise in the kind's unit-factor SI unit.
inline std::string exact_quantity(double si, UnitKind kind, double cavity_decay) {
  const auto suffixes = unit_suffixes(kind);
  const UnitSuffix& canonical = suffixes.front();
  const double factor = (kind == UnitKind::GammaMultiple) ? cavity_decay : canonical.to_si;
  auto canonical_text = [&](double x) {
    std::string text = format_double(x);
    if (!canonical.name.empty()) text += " " + std::string(canonical.name);
    return text;
  };
  // Among the few doubles near si / factor that map back onto si exactly,
  // prefer the one with the shortest decimal form.
  std::optional<std::string> best;
  double down = si / factor;
  double up = down;
  for (int step = 0; step <= 4; ++step) {
    for (double x : {down, up}) {
      if (x * factor != si) continue;
      std::string text = canonical_text(x);
      if (!best || text.size() < best->size()) best = std::move(text);
    }
    down = std::nextafter(down, -INFINITY);
    up = std::nextafter(up, INFINITY);
  }
  if (best) return *best;
  for (const auto& s : suffixes) {
    if (s.to_si == 1.0) {
      std::string text = format_double(si);
      if (!s.name.empty()) text += " " + std::string(s.name);
      return text;
    }
  }
  return format_double(si);
}

// Caption-unit text for one field of p, exact under re-parsing.
inline std::string caption_text(const ParamField& f, const PhysicalParams& p) {
  return exact_quantity(p.*f.member, f.kind, p.cavity_decay);
}

// A set of parameter assignments in caption units, applied so that
// Gamma-multiples are resolved against the final Gamma: when Gamma changes,
// lambda/alpha/beta keep their ratio to it.
inline PhysicalParams apply_caption_values(
    PhysicalParams base, std::span<const std::pair<std::string, double>> assignments) {
  std::vector<std::pair<const ParamField*, double>> relative;
  for (const auto& f : kParamFields) {
    if (f.kind == UnitKind::GammaMultiple) relative.emplace_back(&f, to_caption_units(f, base));
  }
  for (const auto& [name, value] : assignments) {
    const ParamField& f = param_field(name);
    if (f.kind != UnitKind::GammaMultiple) set_in_unit(f, base, value);
  }
  for (const auto& [f, value] : relative) set_in_unit(*f, base, value);
  for (const auto& [name, value] : assignments) {
    const ParamField& f = param_field(name);
    if (f.kind == UnitKind::GammaMultiple) set_in_unit(f, base, value);
  }
  return base;
}

}  // namespace optomech
