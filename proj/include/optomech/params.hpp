#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "optomech/constants.hpp"
#include "optomech/error.hpp"

namespace optomech {

// Physical inputs of the symmetric two-cavity setup, all in SI units.
// Both cavities, mirrors and drives share the same values.
struct PhysicalParams {
  double mass = 145e-12;                              // m, kg
  double omega_m = constants::kTwoPi * 947e3;         // omega_M, rad/s
  double omega_c = constants::kTwoPi * 2.82e14;       // omega_c, rad/s
  double omega_l = constants::kTwoPi * 5.26e14;       // omega_l, rad/s
  double cavity_length = 25e-3;                       // L, m
  double power = 11e-3;                               // P, W
  double cavity_decay = constants::kTwoPi * 215e3;    // Gamma, rad/s
  double mech_damping = constants::kTwoPi * 140e3;    // gamma, rad/s
  double temperature = 0.0;                           // T, K
  double squeezing = 0.0;                             // r
  double pa_gain = 0.0;                               // lambda, rad/s
  double pa_phase = 0.0;                              // theta, rad
  double hopping = 0.0;                               // alpha, rad/s
  double tunneling = 0.0;                             // beta, rad/s

  bool operator==(const PhysicalParams&) const = default;
};

// Experimental values quoted for the movable-mirror setup; couplings off.
inline PhysicalParams experimental_params() { return PhysicalParams{}; }

// Throws InvalidParams on non-finite, non-positive or negative fields.
inline void validate(const PhysicalParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidParams, what);
  };
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(positive(p.mass), "m must be finite and > 0");
  require(positive(p.omega_m), "omega_M must be finite and > 0");
  require(positive(p.omega_c), "omega_c must be finite and > 0");
  require(positive(p.omega_l), "omega_l must be finite and > 0");
  require(positive(p.cavity_length), "L must be finite and > 0");
  require(positive(p.cavity_decay), "Gamma must be finite and > 0");
  require(positive(p.mech_damping), "gamma must be finite and > 0");
  require(nonneg(p.power), "P must be finite and >= 0");
  require(nonneg(p.temperature), "T must be finite and >= 0");
  require(nonneg(p.squeezing), "r must be finite and >= 0");
  require(nonneg(p.pa_gain), "lambda must be finite and >= 0");
  require(std::isfinite(p.pa_phase), "theta must be finite");
  require(nonneg(p.hopping), "alpha must be finite and >= 0");
  require(nonneg(p.tunneling), "beta must be finite and >= 0");
}

// The rotating-wave treatment assumes omega_M >> Gamma.
inline double rwa_ratio(const PhysicalParams& p) { return p.omega_m / p.cavity_decay; }
inline bool rwa_valid(const PhysicalParams& p) { return rwa_ratio(p) > 1.0; }

enum class PhaseConvention {
  AsPrinted,  // phi = -atan((Delta' + alpha) / Gamma)
  FactorTwo,  // phi = -atan(2 (Delta' + alpha) / Gamma)
};

struct DerivedQuantities {
  double n_th = 0.0;
  double coupling = 0.0;         // J, rad/s
  double phase = 0.0;            // phi, rad
  double squeeze_r = 0.0;        // R = sinh^2 r
  double squeeze_v = 0.0;        // V = sinh r cosh r
  double mech_noise = 0.0;       // gamma' = gamma (n_th + 1/2)
  double optical_noise = 0.0;    // Gamma' = Gamma (R + 1/2)
  double delta_eff = 0.0;        // Delta' = -omega_M (red sideband)
  bool rwa_valid = true;
};

/// Mean thermal phonon number of a bath at temperature T for a mode of
/// angular frequency omega. Exactly zero at T = 0.
inline double thermal_occupation(double temperature, double omega) {
  if (temperature <= 0.0) return 0.0;
  const double x = constants::kHbar * omega / (constants::kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

/// Many-photon optomechanical coupling J of each cavity.
inline double coupling_strength(const PhysicalParams& p) {
  const double shifted = p.omega_m + p.hopping;
  const double lorentz = shifted * shifted + 0.25 * p.cavity_decay * p.cavity_decay;
  const double numerator = 2.0 * p.omega_c * p.omega_c * p.cavity_decay * p.power;
  const double denominator =
      p.cavity_length * p.cavity_length * p.mass * p.omega_m * p.omega_l * lorentz;
  return std::sqrt(numerator / denominator);
}

inline double laser_phase(double delta_eff, double alpha, double gamma_cavity,
                          PhaseConvention convention = PhaseConvention::AsPrinted) {
  const double scale = convention == PhaseConvention::FactorTwo ? 2.0 : 1.0;
  return -std::atan(scale * (delta_eff + alpha) / gamma_cavity);
}

// Squeezed-bath correlation weights R = sinh^2 r and V = sinh r cosh r.
inline double squeeze_occupation(double r) {
  const double s = std::sinh(r);
  return s * s;
}
inline double squeeze_correlation(double r) { return std::sinh(r) * std::cosh(r); }

/// Computes every derived scalar used by the linearised dynamics. The
/// effective detuning is pinned to the red sideband, Delta' = -omega_M.
inline DerivedQuantities derive(const PhysicalParams& p,
                                PhaseConvention convention = PhaseConvention::AsPrinted) {
  validate(p);
  DerivedQuantities d;
  d.n_th = thermal_occupation(p.temperature, p.omega_m);
  d.coupling = coupling_strength(p);
  d.delta_eff = -p.omega_m;
  d.phase = laser_phase(d.delta_eff, p.hopping, p.cavity_decay, convention);
  d.squeeze_r = squeeze_occupation(p.squeezing);
  d.squeeze_v = squeeze_correlation(p.squeezing);
  d.mech_noise = p.mech_damping * (d.n_th + 0.5);
  d.optical_noise = p.cavity_decay * (d.squeeze_r + 0.5);
  d.rwa_valid = optomech::rwa_valid(p);
  return d;
}

// Steady-state classical amplitudes of the two mirrors and two cavity fields.
struct MeanFields {
  std::complex<double> a1, a2;  // <a_j>
  std::complex<double> c1, c2;  // <c_j>
  std::complex<double> mech_denominator;     // I = i omega_M + gamma / 2
  std::complex<double> optical_denominator;  // B = -Gamma / 2 + i Delta'
  double single_photon_coupling = 0.0;       // mu = (omega_c / L) sqrt(hbar / (m omega_M))
  double drive1 = 0.0, drive2 = 0.0;         // upsilon_j = sqrt(2 Gamma P_j / (hbar omega_l))
  double phase1 = 0.0, phase2 = 0.0;         // phi_j
  // Bare detunings implied by Delta' = Delta + mu (<a> + <a>^*).
  double bare_detuning1 = 0.0, bare_detuning2 = 0.0;
};

struct MeanFieldOptions {
  PhaseConvention convention = PhaseConvention::AsPrinted;
  // Per-cavity drive powers in W; negative means "use PhysicalParams::power".
  double power1 = -1.0;
  double power2 = -1.0;
  // A denominator is singular when |det| <= floor * (scale of its terms).
  double relative_floor = 1e-12;
};

inline double single_photon_coupling(const PhysicalParams& p) {
  return p.omega_c / p.cavity_length * std::sqrt(constants::kHbar / (p.mass * p.omega_m));
}

inline double drive_amplitude(const PhysicalParams& p, double power) {
  return std::sqrt(2.0 * p.cavity_decay * power / (constants::kHbar * p.omega_l));
}

/// Closed-form steady-state amplitudes of the coupled two-cavity system at the
/// given effective detuning. Throws SingularDenominator when either 2x2 system
/// degenerates.
inline MeanFields mean_fields(const PhysicalParams& p, double delta_eff,
                              const MeanFieldOptions& options = {}) {
  using cd = std::complex<double>;
  validate(p);
  const cd i{0.0, 1.0};
  const double alpha = p.hopping;
  const double beta = p.tunneling;

  MeanFields f;
  f.single_photon_coupling = single_photon_coupling(p);
  const double mu = f.single_photon_coupling;
  f.drive1 = drive_amplitude(p, options.power1 < 0.0 ? p.power : options.power1);
  f.drive2 = drive_amplitude(p, options.power2 < 0.0 ? p.power : options.power2);
  f.phase1 = laser_phase(delta_eff, alpha, p.cavity_decay, options.convention);
  f.phase2 = f.phase1;
  f.mech_denominator = i * p.omega_m + 0.5 * p.mech_damping;
  f.optical_denominator = -0.5 * p.cavity_decay + i * delta_eff;
  const cd I = f.mech_denominator;
  const cd B = f.optical_denominator;

  const cd optical_det = B * B + alpha * alpha;
  if (std::abs(optical_det) <= options.relative_floor * (std::norm(B) + alpha * alpha)) {
    throw Error(ErrorKind::SingularDenominator, "B1 B2 + alpha^2 vanishes");
  }
  const cd drive1 = f.drive1 * std::exp(i * f.phase1);
  const cd drive2 = f.drive2 * std::exp(i * f.phase2);
  f.c1 = (i * B * drive1 + alpha * drive2) / optical_det;
  f.c2 = (i * B * drive2 + alpha * drive1) / optical_det;

  const cd mech_det = I * I + beta * beta;
  if (std::abs(mech_det) <= options.relative_floor * (std::norm(I) + beta * beta)) {
    throw Error(ErrorKind::SingularDenominator, "I1 I2 + beta^2 vanishes");
  }
  const double n1 = std::norm(f.c1);
  const double n2 = std::norm(f.c2);
  f.a1 = (i * mu * I * n1 - beta * mu * n2) / mech_det;
  f.a2 = (i * mu * I * n2 - beta * mu * n1) / mech_det;

  f.bare_detuning1 = delta_eff - 2.0 * mu * f.a1.real();
  f.bare_detuning2 = delta_eff - 2.0 * mu * f.a2.real();
  return f;
}

}  // namespace optomech
