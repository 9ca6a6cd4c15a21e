#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "optomech/error.hpp"
#include "optomech/layout.hpp"
#include "optomech/steady_state.hpp"

namespace optomech {

// Two-mirror covariance sigma = [[X, Z], [Z^T, Y]].
struct ReducedCovariance {
  Matrix4 sigma = Matrix4::Zero();

  Matrix2 x() const { return sigma.block<2, 2>(0, 0); }
  Matrix2 y() const { return sigma.block<2, 2>(2, 2); }
  Matrix2 z() const { return sigma.block<2, 2>(0, 2); }
};

struct EntanglementResult {
  double psi = 0.0;        // det X + det Y - 2 det Z
  double nu_minus = 0.0;   // smallest partially transposed symplectic eigenvalue
  double log_negativity = 0.0;
  bool separable = true;
};

inline ReducedCovariance reduce_covariance(const CovarianceMatrix& cov) {
  ReducedCovariance out;
  out.sigma = cov.eta.block<layout::kMechanicalSize, layout::kMechanicalSize>(
      layout::kMechanicalBegin, layout::kMechanicalBegin);
  return out;
}

inline ReducedCovariance make_reduced(const Matrix2& x, const Matrix2& y, const Matrix2& z) {
  ReducedCovariance out;
  out.sigma.block<2, 2>(0, 0) = x;
  out.sigma.block<2, 2>(2, 2) = y;
  out.sigma.block<2, 2>(0, 2) = z;
  out.sigma.block<2, 2>(2, 0) = z.transpose();
  return out;
}

// Rounding slack for the discriminant and the radicand, relative to psi^2
// and psi respectively (both are O(1) for states near the vacuum).
inline constexpr double kRadicandTolerance = 1e-12;

/// Logarithmic negativity of the two-mirror state,
///   nu_- = sqrt((psi - sqrt(psi^2 - 4 det sigma)) / 2),
///   E_N  = max(0, -ln(2 nu_-)).
/// The boundary nu_- = 1/2 counts as separable.
inline EntanglementResult log_negativity(const ReducedCovariance& reduced) {
  EntanglementResult out;
  out.psi = reduced.x().determinant() + reduced.y().determinant() -
            2.0 * reduced.z().determinant();
  const double det_sigma = reduced.sigma.determinant();

  double discriminant = out.psi * out.psi - 4.0 * det_sigma;
  if (discriminant < 0.0) {
    if (discriminant < -kRadicandTolerance * std::max(1.0, out.psi * out.psi)) {
      throw Error(ErrorKind::UnphysicalCovariance,
                  "psi^2 - 4 det sigma is negative: " + std::to_string(discriminant));
    }
    discriminant = 0.0;
  }
  double radicand = 0.5 * (out.psi - std::sqrt(discriminant));
  if (radicand < 0.0) {
    if (radicand < -kRadicandTolerance * std::max(1.0, std::abs(out.psi))) {
      throw Error(ErrorKind::UnphysicalCovariance,
                  "symplectic radicand is negative: " + std::to_string(radicand));
    }
    radicand = 0.0;
  }
  out.nu_minus = std::sqrt(radicand);
  if (!(out.nu_minus > 0.0)) {
    throw Error(ErrorKind::UnphysicalCovariance, "smallest symplectic eigenvalue is zero");
  }
  out.separable = out.nu_minus >= 0.5;
  out.log_negativity = out.separable ? 0.0 : -std::log(2.0 * out.nu_minus);
  return out;
}

// -ln(2 nu_-) without the clamp at zero. Changes sign at the separability
// boundary, which makes it the natural quantity to interpolate across it.
inline double signed_log_negativity(const EntanglementResult& r) {
  return -std::log(2.0 * r.nu_minus);
}

/// Independent route to nu_-: flip P of the second mode and take the smallest
/// symplectic eigenvalue of the result from the spectrum of Sigma sigma~.
inline double partial_transpose_nu_minus(const ReducedCovariance& reduced) {
  Matrix4 flip = Matrix4::Identity();
  flip(3, 3) = -1.0;
  const Matrix4 transposed = flip * reduced.sigma * flip;
  return symplectic_eigenvalues<4>(transposed).front();
}

}  // namespace optomech
