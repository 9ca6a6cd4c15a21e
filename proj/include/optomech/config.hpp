#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "optomech/error.hpp"
#include "optomech/param_fields.hpp"
#include "optomech/params.hpp"
#include "optomech/sweep.hpp"

// Run configuration files are INI text:
//
//   [run]      label
//   [params]   one key per physical parameter, "<number> [unit]"
//   [axis1]    name, min, max, points      (values in caption units)
//   [axis2]    optional second axis
//   [family]   name, values = v1, v2, ...
//   [numerics] stability_margin, condition_bound, phase
//
// Missing parameters keep their experimental defaults. Unknown sections or
// keys are errors.
namespace optomech::config {

using Tree = boost::property_tree::ptree;

namespace detail {

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = [] {
    std::map<std::string, std::set<std::string>> m;
    m["run"] = {"label"};
    for (const auto& f : kParamFields) m["params"].insert(std::string(f.name));
    m["axis1"] = m["axis2"] = {"name", "min", "max", "points"};
    m["family"] = {"name", "values"};
    m["numerics"] = {"stability_margin", "condition_bound", "phase"};
    return m;
  }();
  return s;
}

[[noreturn]] inline void parse_error(const std::string& what) {
  throw Error(ErrorKind::ConfigParseError, what);
}

inline void check_known(const Tree& tree) {
  const auto& s = schema();
  std::set<std::string> sections;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) parse_error("key '" + section + "' outside of a section");
    const auto it = s.find(section);
    if (it == s.end()) parse_error("unknown section [" + section + "]");
    if (!sections.insert(section).second) parse_error("duplicate section [" + section + "]");
    std::set<std::string> keys;
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) parse_error("unknown key '" + section + "." + key + "'");
      if (!keys.insert(key).second) parse_error("duplicate key '" + section + "." + key + "'");
    }
  }
}

inline double parse_number(const std::string& text, const std::string& where) {
  const auto [value, unit] = parse_quantity(text);
  if (!unit.empty()) parse_error("'" + where + "' takes a plain number, got unit '" + unit + "'");
  return value;
}

inline int parse_points(const std::string& text, const std::string& where) {
  const double v = parse_number(text, where);
  if (v != std::floor(v) || v < 2 || v > 1e7) {
    parse_error("'" + where + "' must be an integer >= 2");
  }
  return static_cast<int>(v);
}

inline std::vector<double> parse_list(const std::string& text, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, where));
  if (out.empty()) parse_error("'" + where + "' needs at least one value");
  return out;
}

inline std::optional<std::string> get(const Tree& tree, const std::string& path) {
  if (auto v = tree.get_optional<std::string>(Tree::path_type(path, '.'))) return *v;
  return std::nullopt;
}

inline std::optional<Axis> parse_axis(const Tree& tree, const std::string& section) {
  const auto name = get(tree, section + ".name");
  if (!name || name->empty()) {
    for (const char* key : {"min", "max", "points"}) {
      if (get(tree, section + "." + key)) parse_error("[" + section + "] has no name");
    }
    return std::nullopt;
  }
  Axis axis;
  axis.name = *name;
  if (!find_param_field(axis.name)) parse_error("unknown axis parameter '" + axis.name + "'");
  for (const char* key : {"min", "max", "points"}) {
    if (!get(tree, section + "." + key)) parse_error("[" + section + "] is missing '" + key + "'");
  }
  axis.min = parse_number(*get(tree, section + ".min"), section + ".min");
  axis.max = parse_number(*get(tree, section + ".max"), section + ".max");
  axis.points = parse_points(*get(tree, section + ".points"), section + ".points");
  return axis;
}

}  // namespace detail

inline Tree read_tree(std::istream& in) {
  Tree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    detail::parse_error(std::string("malformed config: ") + e.what());
  }
  detail::check_known(tree);
  return tree;
}

inline Tree read_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'");
  return read_tree(in);
}

/// Applies a "section.key=value" override. The key must exist in the schema.
inline void apply_override(Tree& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    detail::parse_error("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot == std::string::npos) detail::parse_error("override key '" + key + "' needs section.key");
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);
  const auto& s = detail::schema();
  const auto it = s.find(section);
  if (it == s.end() || !it->second.contains(name)) {
    detail::parse_error("override references unknown key '" + key + "'");
  }
  tree.put(Tree::path_type(key, '.'), value);
}

/// Interprets a checked tree as a sweep specification. Axes are optional here
/// (a `point` run only needs [params]); validate_spec enforces them for sweeps.
inline SweepSpec interpret(const Tree& tree) {
  detail::check_known(tree);
  SweepSpec spec;
  spec.base = experimental_params();
  if (auto label = detail::get(tree, "run.label")) spec.label = *label;

  // Non-Gamma-relative quantities first so that "x Gamma" resolves against
  // the configured cavity decay.
  if (auto params = tree.get_child_optional("params")) {
    std::vector<std::pair<const ParamField*, std::pair<double, std::string>>> relative;
    for (const auto& [key, node] : *params) {
      const ParamField& f = param_field(key);
      auto quantity = parse_quantity(node.data());
      if (f.kind == UnitKind::GammaMultiple) {
        relative.emplace_back(&f, std::move(quantity));
      } else {
        set_in_unit(f, spec.base, quantity.first, quantity.second);
      }
    }
    for (const auto& [f, quantity] : relative) {
      set_in_unit(*f, spec.base, quantity.first, quantity.second);
    }
  }
  try {
    validate(spec.base);
  } catch (const Error& e) {
    detail::parse_error(std::string("[params]: ") + e.what());
  }

  for (const char* section : {"axis1", "axis2"}) {
    if (auto axis = detail::parse_axis(tree, section)) spec.axes.push_back(*axis);
  }
  if (spec.axes.empty() && detail::get(tree, "axis2.name")) {
    detail::parse_error("[axis2] given without [axis1]");
  }
  if (auto name = detail::get(tree, "family.name"); name && !name->empty()) {
    if (!find_param_field(*name)) detail::parse_error("unknown family parameter '" + *name + "'");
    const auto values = detail::get(tree, "family.values");
    if (!values) detail::parse_error("[family] is missing 'values'");
    spec.family = Family{*name, detail::parse_list(*values, "family.values")};
  } else if (detail::get(tree, "family.values")) {
    detail::parse_error("[family] has no name");
  }

  spec.numerics.stability_margin = 1e-6 * spec.base.cavity_decay;
  if (auto margin = detail::get(tree, "numerics.stability_margin")) {
    const auto [value, unit] = parse_quantity(*margin);
    if (unit.empty() || unit == "Gamma") {
      spec.numerics.stability_margin = value * spec.base.cavity_decay;
    } else if (unit == "rad/s") {
      spec.numerics.stability_margin = value;
    } else {
      detail::parse_error("numerics.stability_margin takes Gamma or rad/s, got '" + unit + "'");
    }
    if (!(spec.numerics.stability_margin >= 0.0)) {
      detail::parse_error("numerics.stability_margin must be >= 0");
    }
  }
  if (auto bound = detail::get(tree, "numerics.condition_bound")) {
    spec.numerics.condition_bound = detail::parse_number(*bound, "numerics.condition_bound");
    if (!(spec.numerics.condition_bound > 1.0)) {
      detail::parse_error("numerics.condition_bound must be > 1");
    }
  }
  if (auto phase = detail::get(tree, "numerics.phase")) {
    if (*phase == "as-printed") {
      spec.numerics.phase = PhaseConvention::AsPrinted;
    } else if (*phase == "factor-two") {
      spec.numerics.phase = PhaseConvention::FactorTwo;
    } else {
      detail::parse_error("numerics.phase must be as-printed or factor-two");
    }
  }
  return spec;
}

/// Canonical INI text for `spec`; interpret(read_tree(dump)) == spec.
inline std::string dump(const SweepSpec& spec) {
  std::ostringstream os;
  if (!spec.label.empty()) os << "[run]\nlabel = " << spec.label << "\n\n";
  os << "[params]\n";
  for (const auto& f : kParamFields) {
    os << f.name << " = "
       << exact_quantity(spec.base.*f.member, f.kind, spec.base.cavity_decay) << '\n';
  }
  for (std::size_t k = 0; k < spec.axes.size(); ++k) {
    const Axis& a = spec.axes[k];
    os << "\n[axis" << (k + 1) << "]\nname = " << a.name << "\nmin = " << format_double(a.min)
       << "\nmax = " << format_double(a.max) << "\npoints = " << a.points << '\n';
  }
  if (spec.family) {
    os << "\n[family]\nname = " << spec.family->name << "\nvalues = ";
    for (std::size_t k = 0; k < spec.family->values.size(); ++k) {
      os << (k ? ", " : "") << format_double(spec.family->values[k]);
    }
    os << '\n';
  }
  os << "\n[numerics]\nstability_margin = "
     << exact_quantity(spec.numerics.stability_margin, UnitKind::GammaMultiple,
                               spec.base.cavity_decay)
     << "\ncondition_bound = " << format_double(spec.numerics.condition_bound)
     << "\nphase = " << phase_convention_name(spec.numerics.phase) << '\n';
  return os.str();
}

inline Tree tree_from_spec(const SweepSpec& spec) {
  std::istringstream in(dump(spec));
  return read_tree(in);
}

}  // namespace optomech::config
