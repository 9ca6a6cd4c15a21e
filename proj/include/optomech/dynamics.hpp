#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "optomech/error.hpp"
#include "optomech/layout.hpp"
#include "optomech/params.hpp"

namespace optomech {

// Linear generator of the quadrature fluctuations, dZ/dt = Q Z + noise.
struct DriftMatrix {
  Matrix8 q = Matrix8::Zero();
};

// Stationary noise correlations of the input quadratures.
struct NoiseMatrix {
  Matrix8 omega = Matrix8::Zero();
};

struct StabilityReport {
  bool stable = false;
  double max_real_part = 0.0;
  // Sorted by decreasing real part, ties by decreasing imaginary part.
  std::vector<std::complex<double>> eigenvalues;
};

inline DriftMatrix build_drift(const DerivedQuantities& d, const PhysicalParams& p) {
  using namespace layout;
  DriftMatrix out;
  Matrix8& q = out.q;
  const double half_gamma = 0.5 * p.mech_damping;
  const double half_cavity = 0.5 * p.cavity_decay;
  const double j = d.coupling;
  const double beta = p.tunneling;
  const double alpha = p.hopping;
  const double pa_cos = 2.0 * p.pa_gain * std::cos(p.pa_phase);
  const double pa_sin = 2.0 * p.pa_gain * std::sin(p.pa_phase);

  for (int k = kQa1; k <= kPa2; ++k) q(k, k) = -half_gamma;

  // Phonon tunnelling between the mirrors.
  q(kQa1, kPa2) = -beta;
  q(kPa1, kQa2) = beta;
  q(kQa2, kPa1) = -beta;
  q(kPa2, kQa1) = beta;

  // Beam-splitter exchange between each mirror and its cavity field.
  for (int k = 0; k < 4; ++k) {
    q(kQa1 + k, kQc1 + k) = j;
    q(kQc1 + k, kQa1 + k) = -j;
  }

  // Intracavity parametric amplification.
  for (int qc : {kQc1, kQc2}) {
    q(qc, qc) = -half_cavity + pa_cos;
    q(qc, qc + 1) = pa_sin;
    q(qc + 1, qc) = pa_sin;
    q(qc + 1, qc + 1) = -half_cavity - pa_cos;
  }

  // Photon hopping between the cavities.
  q(kQc1, kPc2) = -alpha;
  q(kPc1, kQc2) = alpha;
  q(kQc2, kPc1) = -alpha;
  q(kPc2, kQc1) = alpha;
  return out;
}

inline NoiseMatrix build_noise(const DerivedQuantities& d, const PhysicalParams& p) {
  using namespace layout;
  NoiseMatrix out;
  Matrix8& w = out.omega;
  for (int k = kQa1; k <= kPa2; ++k) w(k, k) = d.mech_noise;
  for (int k = kQc1; k <= kPc2; ++k) w(k, k) = d.optical_noise;
  const double cross = d.squeeze_v * p.cavity_decay;
  w(kQc1, kQc2) = w(kQc2, kQc1) = cross;
  w(kPc1, kPc2) = w(kPc2, kPc1) = -cross;
  return out;
}

/// Eigenvalue-based stability test: stable iff every eigenvalue of Q has real
/// part below -margin.
inline StabilityReport stability_check(const DriftMatrix& drift, double margin = 0.0) {
  Eigen::EigenSolver<Matrix8> solver(drift.q, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigendecompositionFailure,
                "eigenvalue iteration for the drift matrix did not converge");
  }
  StabilityReport report;
  const auto values = solver.eigenvalues();
  report.eigenvalues.assign(values.data(), values.data() + values.size());
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  report.max_real_part = report.eigenvalues.front().real();
  report.stable = report.max_real_part < -margin;
  return report;
}

}  // namespace optomech
