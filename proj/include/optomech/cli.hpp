#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "optomech/config.hpp"
#include "optomech/dynamics.hpp"
#include "optomech/entanglement.hpp"
#include "optomech/error.hpp"
#include "optomech/matrix_io.hpp"
#include "optomech/params.hpp"
#include "optomech/plot.hpp"
#include "optomech/steady_state.hpp"
#include "optomech/sweep.hpp"
#include "optomech/validation.hpp"

namespace optomech::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;

struct RunConfig {
  std::string command;
  std::string config_path;
  std::string out_path;
  std::string preset_name;
  std::vector<std::string> overrides;
  bool plot = false;
  bool dump_config = false;
  bool matrices = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string threshold_kind = "death";
  double resolution = 1e-3;
};

namespace detail {

inline void error_line(std::ostream& err, ErrorKind kind, const std::string& message) {
  err << "error: " << to_string(kind) << ": " << message << '\n';
}

inline SweepSpec load_spec(const RunConfig& rc) {
  config::Tree tree;
  if (!rc.preset_name.empty()) {
    tree = config::tree_from_spec(preset(rc.preset_name));
    if (!rc.config_path.empty()) {
      // A config file given alongside a preset overlays it key by key.
      const config::Tree overlay = config::read_tree_file(rc.config_path);
      for (const auto& [section, body] : overlay) {
        for (const auto& [key, node] : body) {
          config::apply_override(tree, section + "." + key + "=" + node.data());
        }
      }
    }
  } else if (!rc.config_path.empty()) {
    tree = config::read_tree_file(rc.config_path);
  } else {
    tree = config::tree_from_spec(SweepSpec{});
  }
  for (const auto& o : rc.overrides) config::apply_override(tree, o);
  return config::interpret(tree);
}

// Writes to --out when given, else to `out`.
template <typename Writer>
void emit(const RunConfig& rc, std::ostream& out, Writer&& write) {
  if (rc.out_path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(rc.out_path, std::ios::binary);
  if (!file) throw Error(ErrorKind::IoError, "cannot write '" + rc.out_path + "'");
  write(file);
  if (!file) throw Error(ErrorKind::IoError, "failed writing '" + rc.out_path + "'");
}

inline std::string kv(const std::string& key, double v) {
  return key + " = " + format_double(v) + "\n";
}

inline int run_point(const RunConfig& rc, const SweepSpec& spec, std::ostream& out,
                     std::ostream& err) {
  const PhysicalParams& p = spec.base;
  const DerivedQuantities d = derive(p, spec.numerics.phase);
  const DriftMatrix drift = build_drift(d, p);
  const NoiseMatrix noise = build_noise(d, p);
  const StabilityReport stability = stability_check(drift, spec.numerics.stability_margin);

  std::string text = "# parameters\n";
  for (const auto& f : kParamFields) text += kv(std::string(f.column), to_caption_units(f, p));
  text += "# derived\n";
  text += kv("n_th", d.n_th) + kv("J_rad_s", d.coupling) +
          kv("J_Gamma", d.coupling / p.cavity_decay) + kv("phi_rad", d.phase) +
          kv("R", d.squeeze_r) + kv("V", d.squeeze_v) + kv("gamma_prime_rad_s", d.mech_noise) +
          kv("Gamma_prime_rad_s", d.optical_noise) + kv("Delta_eff_rad_s", d.delta_eff) +
          kv("rwa_ratio", rwa_ratio(p));
  text += std::string("rwa_valid = ") + (d.rwa_valid ? "true" : "false") + "\n";
  try {
    const MeanFields f = mean_fields(p, d.delta_eff, {.convention = spec.numerics.phase});
    text += kv("bare_detuning_rad_s", f.bare_detuning1) + kv("abs_c", std::abs(f.c1)) +
            kv("abs_a", std::abs(f.a1));
  } catch (const Error& e) {
    text += std::string("mean_fields = unavailable (") + e.what() + ")\n";
  }
  text += "# stability\n";
  text += std::string("stable = ") + (stability.stable ? "true" : "false") + "\n";
  text += kv("max_real_part_rad_s", stability.max_real_part);
  for (const auto& ev : stability.eigenvalues) {
    text += "eigenvalue_rad_s = " + format_double(ev.real()) + " " + format_double(ev.imag()) + "\n";
  }
  if (!d.rwa_valid) err << "warning: omega_M / Gamma <= 1, rotating-wave treatment is doubtful\n";

  std::string tail;
  int status = kExitOk;
  if (stability.stable) {
    const LyapunovSolution sol = solve_lyapunov(
        drift, noise, {.condition_bound = spec.numerics.condition_bound,
                       .stability_margin = spec.numerics.stability_margin});
    const EntanglementResult en = log_negativity(reduce_covariance(sol.covariance));
    tail += "# entanglement\n";
    tail += kv("E_N", en.log_negativity) + kv("nu_minus", en.nu_minus) + kv("psi", en.psi);
    tail += std::string("separable = ") + (en.separable ? "true" : "false") + "\n";
    tail += kv("residual", sol.relative_residual) + kv("condition", sol.condition_estimate);
    if (sol.ill_conditioned) err << "warning: Lyapunov system is ill-conditioned\n";
    if (rc.matrices) {
      std::ostringstream grids;
      grids << "# drift\n";
      write_grid(grids, drift.q);
      grids << "# noise\n";
      write_grid(grids, noise.omega);
      grids << "# covariance\n";
      write_grid(grids, sol.covariance.eta);
      tail += grids.str();
    }
  } else {
    tail += "# entanglement\nE_N = nan\n";
    status = kExitDomain;
  }
  emit(rc, out, [&](std::ostream& os) { os << text << tail; });
  if (status != kExitOk) {
    error_line(err, ErrorKind::UnstableSystem, "drift matrix is not Hurwitz at this point");
  }
  return status;
}

inline int run_sweep_command(const RunConfig& rc, const SweepSpec& spec, std::ostream& out,
                             std::ostream& err) {
  if (rc.plot && rc.out_path.empty()) {
    throw Error(ErrorKind::InvalidSpec, "--plot needs --out to name the CSV file");
  }
  validate_spec(spec);
  const SweepResult result = run_sweep(spec, rc.jobs);
  emit(rc, out, [&](std::ostream& os) { write_csv(os, result); });
  std::size_t failed = 0, unstable = 0;
  for (const auto& rec : result.records) {
    if (rec.result.status == PointStatus::Failed) ++failed;
    if (rec.result.status == PointStatus::Unstable) ++unstable;
  }
  if (rc.plot) {
    std::filesystem::path svg(rc.out_path);
    svg.replace_extension(".svg");
    std::ofstream file(svg);
    if (!file) throw Error(ErrorKind::IoError, "cannot write '" + svg.string() + "'");
    plot::write_svg(file, result);
  }
  if (!rc.out_path.empty()) {
    out << "wrote " << result.records.size() << " points to " << rc.out_path << " (" << unstable
        << " unstable, " << failed << " failed)\n";
  }
  for (const auto& rec : result.records) {
    if (rec.result.status != PointStatus::Failed) continue;
    std::string where;
    for (std::size_t k = 0; k < rec.coordinates.size(); ++k) {
      where += (k ? " " : "") + result.coordinate_names[k] + "=" +
               format_double(rec.coordinates[k]);
    }
    err << "warning: point " << where << " failed: " << rec.result.message << '\n';
  }
  return kExitOk;
}

inline int run_threshold(const RunConfig& rc, const SweepSpec& spec, std::ostream& out,
                         std::ostream& err) {
  ThresholdKind kind;
  if (rc.threshold_kind == "death") {
    kind = ThresholdKind::Death;
  } else if (rc.threshold_kind == "birth") {
    kind = ThresholdKind::Birth;
  } else {
    throw Error(ErrorKind::ConfigParseError, "--kind must be death or birth");
  }
  validate_spec(spec);
  std::vector<SweepSpec> curves;
  if (spec.family) {
    for (std::size_t k = 0; k < spec.family->values.size(); ++k) {
      curves.push_back(restrict_to_family(spec, k));
    }
  } else {
    curves.push_back(spec);
  }
  std::string text;
  int status = kExitOk;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    text += "# curve " + (curves[k].label.empty() ? std::to_string(k) : curves[k].label) + "\n";
    try {
      const ThresholdReport r = find_threshold(curves[k], kind, rc.resolution);
      text += "kind = " + std::string(to_string(r.kind)) + "\naxis = " + r.axis + "\n";
      text += kv("x_lo", r.x_lo) + kv("x_hi", r.x_hi) + kv("E_N_lo", r.en_lo) +
              kv("E_N_hi", r.en_hi) + kv("estimate", r.estimate);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoCrossing) throw;
      text += std::string("no_crossing = ") + e.what() + "\n";
      error_line(err, e.kind(), e.what());
      status = kExitDomain;
    }
  }
  emit(rc, out, [&](std::ostream& os) { os << text; });
  return status;
}

inline int run_validate(const RunConfig& rc, const SweepSpec& spec, std::ostream& out) {
  const auto results = validation::run_all(spec.base);
  std::size_t passed = 0;
  std::string text;
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
    text += std::string(r.passed ? "PASS " : "FAIL ") + r.name + " " + r.detail + "\n";
  }
  text += "passed " + std::to_string(passed) + "/" + std::to_string(results.size()) + "\n";
  emit(rc, out, [&](std::ostream& os) { os << text; });
  return passed == results.size() ? kExitOk : kExitDomain;
}

}  // namespace detail

inline int execute(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  try {
    const SweepSpec spec = detail::load_spec(rc);
    if (rc.dump_config) {
      detail::emit(rc, out, [&](std::ostream& os) { os << config::dump(spec); });
      return kExitOk;
    }
    if (rc.command == "point") return detail::run_point(rc, spec, out, err);
    if (rc.command == "sweep" || rc.command == "preset") {
      return detail::run_sweep_command(rc, spec, out, err);
    }
    if (rc.command == "threshold") return detail::run_threshold(rc, spec, out, err);
    if (rc.command == "validate") return detail::run_validate(rc, spec, out);
    throw Error(ErrorKind::ConfigParseError, "unknown command '" + rc.command + "'");
  } catch (const Error& e) {
    detail::error_line(err, e.kind(), e.what());
    return is_config_error(e.kind()) ? kExitConfig : kExitDomain;
  }
}

/// Parses the command line (args excludes the program name) and runs it.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady-state mirror-mirror entanglement of a two-cavity optomechanical system",
               "optomech"};
  app.require_subcommand(1);
  RunConfig rc;

  auto common = [&rc](CLI::App* sub, bool sweep_like) {
    sub->add_option("--config", rc.config_path, "INI configuration file");
    sub->add_option("--set", rc.overrides, "Override a config key: section.key=value")
        ->allow_extra_args(false);
    sub->add_option("--out", rc.out_path, "Write output to this file");
    sub->add_flag("--dump-config", rc.dump_config, "Print the effective configuration and exit");
    if (sweep_like) {
      sub->add_flag("--plot", rc.plot, "Also write an SVG plot next to --out");
      sub->add_option("--jobs", rc.jobs, "Worker threads")->check(CLI::PositiveNumber);
    }
  };

  CLI::App* point = app.add_subcommand("point", "Evaluate a single parameter set");
  common(point, false);
  point->add_flag("--matrices", rc.matrices, "Also print Q, Omega and eta as numeric grids");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the sweep described by --config");
  common(sweep, true);

  CLI::App* preset_cmd = app.add_subcommand("preset", "Run a figure preset sweep");
  common(preset_cmd, true);
  preset_cmd->add_option("name", rc.preset_name, "fig2 | fig3 | fig4 | fig5")->required();

  CLI::App* threshold = app.add_subcommand("threshold", "Locate entanglement death/birth");
  common(threshold, false);
  threshold->add_option("--preset", rc.preset_name, "Start from a figure preset");
  threshold->add_option("--kind", rc.threshold_kind, "death | birth")
      ->check(CLI::IsMember({"death", "birth"}));
  threshold->add_option("--resolution", rc.resolution, "Bracket width in axis units")
      ->check(CLI::PositiveNumber);

  CLI::App* validate_cmd = app.add_subcommand("validate", "Run the built-in invariant checks");
  common(validate_cmd, false);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    detail::error_line(err, ErrorKind::ConfigParseError, e.what());
    return kExitConfig;
  }
  rc.command = app.get_subcommands().front()->get_name();
  return execute(rc, out, err);
}

}  // namespace optomech::cli
