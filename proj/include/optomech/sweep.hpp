#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <initializer_list>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "optomech/dynamics.hpp"
#include "optomech/entanglement.hpp"
#include "optomech/error.hpp"
#include "optomech/param_fields.hpp"
#include "optomech/params.hpp"
#include "optomech/steady_state.hpp"
#include "optomech/version.hpp"

namespace optomech {

// Linearly spaced axis in caption units; endpoints are hit exactly.
struct Axis {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  int points = 2;

  double value(int i) const {
    if (i == 0) return min;
    if (i == points - 1) return max;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  std::vector<double> values() const {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(value(i));
    return out;
  }

  bool operator==(const Axis&) const = default;
};

// Discrete second parameter giving one curve per value.
struct Family {
  std::string name;
  std::vector<double> values;

  bool operator==(const Family&) const = default;
};

struct EvaluationOptions {
  double stability_margin = 0.0;  // rad/s
  double condition_bound = 1e12;
  PhaseConvention phase = PhaseConvention::AsPrinted;

  bool operator==(const EvaluationOptions&) const = default;
};

struct SweepSpec {
  std::string label;
  PhysicalParams base;
  std::vector<Axis> axes;
  std::optional<Family> family;
  EvaluationOptions numerics;

  bool operator==(const SweepSpec&) const = default;
};

inline void validate_spec(const SweepSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); };
  validate(spec.base);
  if (spec.axes.empty() || spec.axes.size() > 2) fail("a sweep needs one or two axes");
  for (const auto& axis : spec.axes) {
    if (!find_param_field(axis.name)) fail("unknown axis parameter '" + axis.name + "'");
    if (!std::isfinite(axis.min) || !std::isfinite(axis.max) || !(axis.min < axis.max)) {
      fail("axis '" + axis.name + "' needs a finite range with min < max");
    }
    if (axis.points < 2) fail("axis '" + axis.name + "' needs at least 2 points");
  }
  if (spec.axes.size() == 2 && spec.axes[0].name == spec.axes[1].name) {
    fail("the two axes must sweep different parameters");
  }
  if (spec.family) {
    if (!find_param_field(spec.family->name)) {
      fail("unknown family parameter '" + spec.family->name + "'");
    }
    if (spec.family->values.empty()) fail("family needs at least one value");
    for (const auto& axis : spec.axes) {
      if (axis.name == spec.family->name) fail("family parameter duplicates an axis");
    }
    for (double v : spec.family->values) {
      if (!std::isfinite(v)) fail("family values must be finite");
    }
  }
  if (!(spec.numerics.stability_margin >= 0.0)) fail("stability margin must be >= 0");
}

enum class PointStatus { Ok, IllConditioned, Unstable, Failed };

constexpr std::string_view to_string(PointStatus s) {
  switch (s) {
    case PointStatus::Ok: return "ok";
    case PointStatus::IllConditioned: return "ill_conditioned";
    case PointStatus::Unstable: return "unstable";
    case PointStatus::Failed: return "failed";
  }
  return "failed";
}

// Outcome of the full pipeline at one parameter set.
struct PointEvaluation {
  PointStatus status = PointStatus::Failed;
  bool stable = false;
  double max_real_part = std::numeric_limits<double>::quiet_NaN();
  std::optional<EntanglementResult> entanglement;  // absent unless solved
  double residual = std::numeric_limits<double>::quiet_NaN();
  double condition = std::numeric_limits<double>::quiet_NaN();
  double min_symplectic = std::numeric_limits<double>::quiet_NaN();
  std::optional<ErrorKind> error;
  std::string message;

  bool has_value() const { return entanglement.has_value(); }
  double log_negativity() const {
    return entanglement ? entanglement->log_negativity : std::numeric_limits<double>::quiet_NaN();
  }
};

/// derive -> Q, Omega -> stability -> Lyapunov -> reduce -> E_N. Never throws
/// for domain failures; they are reported in the returned record.
inline PointEvaluation evaluate_point(const PhysicalParams& p, const EvaluationOptions& options) {
  PointEvaluation out;
  try {
    const DerivedQuantities d = derive(p, options.phase);
    const DriftMatrix drift = build_drift(d, p);
    const StabilityReport stability = stability_check(drift, options.stability_margin);
    out.stable = stability.stable;
    out.max_real_part = stability.max_real_part;
    if (!stability.stable) {
      out.status = PointStatus::Unstable;
      return out;
    }
    const NoiseMatrix noise = build_noise(d, p);
    const LyapunovSolution solution = solve_lyapunov(
        drift, noise, {.condition_bound = options.condition_bound,
                       .stability_margin = options.stability_margin});
    out.residual = solution.relative_residual;
    out.condition = solution.condition_estimate;
    out.min_symplectic = symplectic_eigenvalues<8>(solution.covariance.eta).front();
    out.entanglement = log_negativity(reduce_covariance(solution.covariance));
    out.status = solution.ill_conditioned ? PointStatus::IllConditioned : PointStatus::Ok;
  } catch (const Error& e) {
    out.status = PointStatus::Failed;
    out.entanglement.reset();
    out.error = e.kind();
    out.message = e.what();
  }
  return out;
}

struct PointRecord {
  std::vector<double> coordinates;  // family value first (if any), then axes
  PointEvaluation result;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<std::string> coordinate_names;
  std::vector<PointRecord> records;
  std::string timestamp;
  std::string version;

  std::size_t axis_points(std::size_t k) const {
    return static_cast<std::size_t>(spec.axes.at(k).points);
  }
};

inline std::vector<std::string> coordinate_names(const SweepSpec& spec) {
  std::vector<std::string> names;
  if (spec.family) names.push_back(spec.family->name);
  for (const auto& axis : spec.axes) names.push_back(axis.name);
  return names;
}

// Enumerates grid coordinates in output order: family outermost, last axis
// fastest.
inline std::vector<std::vector<double>> grid_coordinates(const SweepSpec& spec) {
  std::vector<std::vector<double>> levels;
  if (spec.family) levels.push_back(spec.family->values);
  for (const auto& axis : spec.axes) levels.push_back(axis.values());
  std::vector<std::vector<double>> grid{{}};
  for (const auto& level : levels) {
    std::vector<std::vector<double>> next;
    next.reserve(grid.size() * level.size());
    for (const auto& prefix : grid) {
      for (double v : level) {
        auto row = prefix;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

inline PhysicalParams params_at(const SweepSpec& spec, const std::vector<std::string>& names,
                                const std::vector<double>& coordinates) {
  std::vector<std::pair<std::string, double>> assignments;
  for (std::size_t k = 0; k < names.size(); ++k) assignments.emplace_back(names[k], coordinates[k]);
  return apply_caption_values(spec.base, assignments);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Evaluates every grid point, optionally on several threads. Records are
/// stored by grid index, so the result does not depend on scheduling.
inline SweepResult run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
  validate_spec(spec);
  SweepResult result;
  result.spec = spec;
  result.coordinate_names = coordinate_names(spec);
  result.timestamp = utc_timestamp();
  result.version = std::string(kVersion);

  const auto grid = grid_coordinates(spec);
  result.records.resize(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      PointRecord& rec = result.records[i];
      rec.coordinates = grid[i];
      try {
        rec.result = evaluate_point(params_at(spec, result.coordinate_names, grid[i]),
                                    spec.numerics);
      } catch (const Error& e) {
        rec.result = PointEvaluation{};
        rec.result.error = e.kind();
        rec.result.message = e.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return result;
}

inline std::string_view phase_convention_name(PhaseConvention c) {
  return c == PhaseConvention::FactorTwo ? "factor-two" : "as-printed";
}

inline std::string describe_params(const PhysicalParams& p) {
  std::string out;
  for (const auto& f : kParamFields) {
    if (!out.empty()) out += ", ";
    out += std::string(f.name) + "=" + caption_text(f, p);
  }
  return out;
}

struct CsvOptions {
  bool include_timestamp = true;
};

inline std::string csv_column(std::string_view name) {
  return std::string(param_field(name).column);
}

/// CSV with '#' metadata lines, a header row, one row per grid point. Values
/// that do not exist (unstable or failed points) are written as "nan".
inline void write_csv(std::ostream& os, const SweepResult& result, const CsvOptions& options = {}) {
  const SweepSpec& spec = result.spec;
  os << "# optomech sweep\n";
  if (!spec.label.empty()) os << "# label: " << spec.label << '\n';
  os << "# version: " << result.version << '\n';
  if (options.include_timestamp) os << "# timestamp: " << result.timestamp << '\n';
  os << "# base: " << describe_params(spec.base) << '\n';
  os << "# numerics: stability_margin_rad_s=" << format_double(spec.numerics.stability_margin)
     << " condition_bound=" << format_double(spec.numerics.condition_bound)
     << " phase=" << phase_convention_name(spec.numerics.phase) << '\n';
  for (const auto& axis : spec.axes) {
    os << "# axis: " << axis.name << " min=" << format_double(axis.min)
       << " max=" << format_double(axis.max) << " points=" << axis.points << '\n';
  }
  if (spec.family) {
    os << "# family: " << spec.family->name << " values=";
    for (std::size_t k = 0; k < spec.family->values.size(); ++k) {
      os << (k ? "," : "") << format_double(spec.family->values[k]);
    }
    os << '\n';
  }

  for (const auto& name : result.coordinate_names) os << csv_column(name) << ',';
  os << "E_N,nu_minus,stable,residual,status\n";
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); };
  for (const auto& rec : result.records) {
    for (double c : rec.coordinates) os << format_double(c) << ',';
    const PointEvaluation& r = rec.result;
    const double nu = r.entanglement ? r.entanglement->nu_minus
                                     : std::numeric_limits<double>::quiet_NaN();
    os << num(r.log_negativity()) << ',' << num(nu) << ',' << (r.stable ? 1 : 0) << ','
       << num(r.residual) << ',' << to_string(r.status) << '\n';
  }
}

inline std::string csv_string(const SweepResult& result, const CsvOptions& options = {}) {
  std::ostringstream os;
  write_csv(os, result, options);
  return os.str();
}

// ---------------------------------------------------------------------------
// Threshold search

enum class ThresholdKind { Death, Birth };

constexpr std::string_view to_string(ThresholdKind k) {
  return k == ThresholdKind::Death ? "death" : "birth";
}

struct ThresholdReport {
  ThresholdKind kind = ThresholdKind::Death;
  std::string axis;
  double x_lo = 0.0, x_hi = 0.0;
  double en_lo = 0.0, en_hi = 0.0;
  double estimate = 0.0;
};

/// Shrinks [lo, hi], where pred(lo) != pred(hi), to width <= resolution.
/// Returns the final bracket; pred keeps its values at the two ends.
template <typename Pred>
std::pair<double, double> bisect_predicate(Pred&& pred, double lo, double hi, double resolution) {
  const bool at_lo = pred(lo);
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid) == at_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

// Restricts a family spec to one of its curves (the family value is folded
// into the base parameters).
inline SweepSpec restrict_to_family(const SweepSpec& spec, std::size_t index) {
  if (!spec.family) return spec;
  if (index >= spec.family->values.size()) {
    throw Error(ErrorKind::InvalidSpec, "family index out of range");
  }
  SweepSpec out = spec;
  const std::pair<std::string, double> assignment{spec.family->name, spec.family->values[index]};
  out.base = apply_caption_values(spec.base, std::span(&assignment, 1));
  out.family.reset();
  out.label = spec.label + "[" + spec.family->name + "=" +
              format_double(spec.family->values[index]) + "]";
  return out;
}

/// Locates where E_N > 0 switches off (death) or on (birth) along the single
/// axis of `spec`: a coarse scan over the axis grid finds the first bracket of
/// the requested kind, then bisection narrows it to `resolution` (axis units).
inline ThresholdReport find_threshold(const SweepSpec& spec, ThresholdKind kind,
                                      double resolution) {
  validate_spec(spec);
  if (spec.axes.size() != 1 || spec.family) {
    throw Error(ErrorKind::InvalidSpec,
                "threshold search needs exactly one axis and no family (restrict it first)");
  }
  if (!(resolution > 0.0)) throw Error(ErrorKind::InvalidSpec, "resolution must be > 0");
  const Axis& axis = spec.axes.front();
  const std::vector<std::string> names{axis.name};

  auto evaluate = [&](double x) {
    PointEvaluation r = evaluate_point(params_at(spec, names, {x}), spec.numerics);
    if (!r.has_value()) {
      throw Error(r.error.value_or(ErrorKind::UnstableSystem),
                  "threshold search hit a point without a steady state at " + axis.name + "=" +
                      format_double(x));
    }
    return r;
  };

  std::optional<std::pair<double, double>> bracket;
  std::optional<std::pair<double, bool>> previous;
  for (double x : axis.values()) {
    PointEvaluation r = evaluate_point(params_at(spec, names, {x}), spec.numerics);
    if (!r.has_value()) {
      previous.reset();
      continue;
    }
    const bool entangled = r.log_negativity() > 0.0;
    if (previous) {
      const bool is_death = previous->second && !entangled;
      const bool is_birth = !previous->second && entangled;
      if ((kind == ThresholdKind::Death && is_death) || (kind == ThresholdKind::Birth && is_birth)) {
        bracket.emplace(previous->first, x);
        break;
      }
    }
    previous.emplace(x, entangled);
  }
  if (!bracket) {
    throw Error(ErrorKind::NoCrossing, "no entanglement " + std::string(to_string(kind)) +
                                           " along " + axis.name + " in [" +
                                           format_double(axis.min) + ", " +
                                           format_double(axis.max) + "]");
  }

  auto entangled_at = [&](double x) { return evaluate(x).log_negativity() > 0.0; };
  const auto [lo, hi] = bisect_predicate(entangled_at, bracket->first, bracket->second, resolution);

  ThresholdReport report;
  report.kind = kind;
  report.axis = axis.name;
  report.x_lo = lo;
  report.x_hi = hi;
  const EntanglementResult at_lo = *evaluate(lo).entanglement;
  const EntanglementResult at_hi = *evaluate(hi).entanglement;
  report.en_lo = at_lo.log_negativity;
  report.en_hi = at_hi.log_negativity;
  // The unclamped -ln(2 nu_-) is smooth through the crossing.
  const double s_lo = signed_log_negativity(at_lo);
  const double s_hi = signed_log_negativity(at_hi);
  report.estimate = 0.5 * (lo + hi);
  if (s_lo != s_hi) {
    report.estimate = std::clamp(lo + (hi - lo) * s_lo / (s_lo - s_hi), lo, hi);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Figure presets

inline constexpr std::array<std::string_view, 4> kPresetNames{"fig2", "fig3", "fig4", "fig5"};

/// Fixed parameters of each published figure on top of the experimental
/// values. Axis ranges and family lists are suggestions and may be
/// overridden.
inline SweepSpec preset(std::string_view name) {
  SweepSpec spec;
  spec.label = std::string(name);
  spec.numerics.stability_margin = 1e-6 * spec.base.cavity_decay;
  using Assign = std::pair<std::string, double>;
  auto base_with = [](std::initializer_list<Assign> list) {
    const std::vector<Assign> v(list);
    return apply_caption_values(experimental_params(), v);
  };
  if (name == "fig2") {
    spec.base = base_with({{"r", 1.5}, {"theta", 0.0}, {"lambda", 0.2}, {"alpha", 0.0015}});
    spec.axes = {Axis{"T", 0.0, 0.06, 61}};
    spec.family = Family{"beta", {0.0002, 0.05, 0.1}};
  } else if (name == "fig3") {
    spec.base = base_with({{"r", 3.0}, {"theta", 0.0}, {"beta", 0.0002}, {"alpha", 0.0015}});
    spec.axes = {Axis{"lambda", 0.0, 0.24, 49}};
    spec.family = Family{"T", {0.005, 0.01, 0.02}};
  } else if (name == "fig4") {
    spec.base = base_with({{"T", 0.2}, {"theta", 0.0}, {"beta", 0.0002}, {"alpha", 0.0015}});
    spec.axes = {Axis{"r", 0.0, 4.0, 81}};
    spec.family = Family{"lambda", {0.05, 0.1, 0.2}};
  } else if (name == "fig5") {
    spec.base = base_with({{"r", 2.0}, {"theta", 0.0}, {"T", 0.02}, {"beta", 0.002}});
    spec.axes = {Axis{"alpha", 0.0, 0.3, 31}, Axis{"lambda", 0.0, 0.24, 25}};
  } else {
    throw Error(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) +
                                              "' (expected fig2, fig3, fig4 or fig5)");
  }
  return spec;
}

}  // namespace optomech
