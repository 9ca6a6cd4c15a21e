#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "optomech/dynamics.hpp"
#include "optomech/entanglement.hpp"
#include "optomech/param_fields.hpp"
#include "optomech/params.hpp"
#include "optomech/steady_state.hpp"

// Self-checks run by `optomech validate` against one parameter set: closed
// forms, the time-integration oracle, physicality and symmetry invariants.
namespace optomech::validation {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Thresholds {
  double mean_field_residual = 1e-10;
  double lyapunov_residual = 1e-10;
  double oracle_relative = 1e-5;
  double oracle_tolerance = 1e-10;
  double physicality = 1e-9;
  double entanglement = 1e-10;
};

namespace detail {

inline CheckResult check(std::string name, const std::function<std::string(bool&)>& body) {
  CheckResult r{std::move(name), false, {}};
  try {
    r.detail = body(r.passed);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  return r;
}

inline std::string value(const char* label, double v) {
  return std::string(label) + "=" + format_double(v);
}

// Canonical two-mode squeezed vacuum covariance with squeezing s.
inline ReducedCovariance two_mode_squeezed(double s) {
  const double c = 0.5 * std::cosh(2.0 * s);
  const double sh = 0.5 * std::sinh(2.0 * s);
  Matrix2 z;
  z << sh, 0.0, 0.0, -sh;
  return make_reduced(c * Matrix2::Identity(), c * Matrix2::Identity(), z);
}

}  // namespace detail

inline std::vector<CheckResult> run_all(const PhysicalParams& p, const Thresholds& t = {}) {
  using detail::check;
  using detail::value;
  std::vector<CheckResult> out;

  out.push_back(check("squeeze_identity", [&](bool& ok) {
    const double r = squeeze_occupation(p.squeezing);
    const double v = squeeze_correlation(p.squeezing);
    const double gap = std::abs(v * v - r * (r + 1.0));
    ok = gap <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, v * v);
    return value("|V^2-R(R+1)|", gap);
  }));

  out.push_back(check("mean_field_fixed_point", [&](bool& ok) {
    const MeanFields f = mean_fields(p, -p.omega_m);
    const std::complex<double> i{0.0, 1.0};
    const double mu = f.single_photon_coupling;
    auto drive = [&](double u, double phase) { return i * u * std::exp(i * phase); };
    // dc/dt = B c_j + i alpha c_n - i upsilon e^{i phi} and
    // da/dt = -I a_j + i mu |c_j|^2 + i beta a_n, both zero at the fixed point.
    const double scale_c = std::max(f.drive1, std::numeric_limits<double>::min());
    const double scale_a = std::max(mu * std::norm(f.c1), std::numeric_limits<double>::min());
    const double rc1 =
        std::abs(f.optical_denominator * f.c1 + i * p.hopping * f.c2 - drive(f.drive1, f.phase1));
    const double rc2 =
        std::abs(f.optical_denominator * f.c2 + i * p.hopping * f.c1 - drive(f.drive2, f.phase2));
    const double ra1 = std::abs(-f.mech_denominator * f.a1 + i * mu * std::norm(f.c1) +
                                i * p.tunneling * f.a2);
    const double ra2 = std::abs(-f.mech_denominator * f.a2 + i * mu * std::norm(f.c2) +
                                i * p.tunneling * f.a1);
    const double worst = p.power > 0.0
                             ? std::max(std::max(rc1, rc2) / scale_c, std::max(ra1, ra2) / scale_a)
                             : std::max({rc1, rc2, ra1, ra2});
    ok = worst <= t.mean_field_residual;
    return value("relative_residual", worst);
  }));

  const DerivedQuantities d = derive(p);
  const DriftMatrix drift = build_drift(d, p);
  const NoiseMatrix noise = build_noise(d, p);

  out.push_back(check("noise_symmetric_psd", [&](bool& ok) {
    const bool symmetric = noise.omega == noise.omega.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix8> es(noise.omega, Eigen::EigenvaluesOnly);
    const double smallest = es.eigenvalues().minCoeff();
    ok = symmetric && smallest >= -1e-12 * p.cavity_decay;
    return value("min_eigenvalue_Gamma", smallest / p.cavity_decay);
  }));

  const StabilityReport stability = stability_check(drift);
  out.push_back(check("drift_stable", [&](bool& ok) {
    ok = stability.stable;
    return value("max_real_part_Gamma", stability.max_real_part / p.cavity_decay);
  }));
  if (!stability.stable) return out;

  const LyapunovSolution solution = solve_lyapunov(drift, noise);
  const CovarianceMatrix& cov = solution.covariance;

  out.push_back(check("lyapunov_residual", [&](bool& ok) {
    ok = solution.relative_residual <= t.lyapunov_residual && !solution.ill_conditioned;
    return value("relative_residual", solution.relative_residual) + " " +
           value("condition", solution.condition_estimate);
  }));

  out.push_back(check("ode_oracle_agreement", [&](bool& ok) {
    const CovarianceMatrix start{0.5 * Matrix8::Identity()};
    const IntegrationResult ode = integrate_to_steady_state(drift, noise, start,
                                                            t.oracle_tolerance);
    const double rel = (ode.covariance.eta - cov.eta).norm() / cov.eta.norm();
    ok = rel <= t.oracle_relative;
    return value("relative_difference", rel) + " steps=" + std::to_string(ode.steps);
  }));

  out.push_back(check("covariance_physical", [&](bool& ok) {
    const double nu = symplectic_eigenvalues<8>(cov.eta).front();
    ok = nu >= 0.5 - t.physicality;
    return value("min_symplectic", nu);
  }));

  out.push_back(check("linearity_in_noise", [&](bool& ok) {
    NoiseMatrix scaled{3.0 * noise.omega};
    const Matrix8 eta3 = solve_lyapunov(drift, scaled).covariance.eta;
    const double rel = (eta3 - 3.0 * cov.eta).norm() / (3.0 * cov.eta.norm());
    ok = rel <= 1e-12;
    return value("relative_difference", rel);
  }));

  const ReducedCovariance reduced = reduce_covariance(cov);
  out.push_back(check("partial_transpose_route", [&](bool& ok) {
    const EntanglementResult en = log_negativity(reduced);
    const double other = partial_transpose_nu_minus(reduced);
    const double diff = std::abs(en.nu_minus - other);
    ok = diff <= t.entanglement;
    return value("nu_minus", en.nu_minus) + " " + value("difference", diff) + " " +
           value("E_N", en.log_negativity);
  }));

  out.push_back(check("local_rotation_invariance", [&](bool& ok) {
    const EntanglementResult before = log_negativity(reduced);
    Matrix4 rot = Matrix4::Identity();
    const double a = 0.7, b = -1.3;
    rot.block<2, 2>(0, 0) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    rot.block<2, 2>(2, 2) << std::cos(b), -std::sin(b), std::sin(b), std::cos(b);
    ReducedCovariance rotated{rot * reduced.sigma * rot.transpose()};
    const EntanglementResult after = log_negativity(rotated);
    const double diff = std::max(std::abs(before.psi - after.psi),
                                 std::abs(before.log_negativity - after.log_negativity));
    ok = diff <= t.entanglement;
    return value("difference", diff);
  }));

  out.push_back(check("two_mode_squeezed_closed_form", [&](bool& ok) {
    double worst = 0.0;
    for (double s : {0.1, 0.5, 1.0}) {
      worst = std::max(worst, std::abs(log_negativity(detail::two_mode_squeezed(s)).log_negativity -
                                       2.0 * s));
    }
    ok = worst <= t.entanglement;
    return value("max_error", worst);
  }));

  out.push_back(check("vacuum_separable", [&](bool& ok) {
    const EntanglementResult en = log_negativity(ReducedCovariance{0.5 * Matrix4::Identity()});
    ok = en.log_negativity == 0.0 && en.separable;
    return value("E_N", en.log_negativity);
  }));

  return out;
}

}  // namespace optomech::validation
