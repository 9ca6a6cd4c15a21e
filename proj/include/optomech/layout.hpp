#pragma once

#include <Eigen/Dense>

namespace optomech {

using Matrix8 = Eigen::Matrix<double, 8, 8>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;
using Matrix2 = Eigen::Matrix<double, 2, 2>;

// Quadrature ordering shared by every matrix in the model:
// (Q_a1, P_a1, Q_a2, P_a2, Q_c1, P_c1, Q_c2, P_c2).
// Mechanical quadratures come first so the mirror-mirror block is the
// leading 4x4 corner.
namespace layout {

inline constexpr int kDim = 8;
inline constexpr int kQa1 = 0;
inline constexpr int kPa1 = 1;
inline constexpr int kQa2 = 2;
inline constexpr int kPa2 = 3;
inline constexpr int kQc1 = 4;
inline constexpr int kPc1 = 5;
inline constexpr int kQc2 = 6;
inline constexpr int kPc2 = 7;

inline constexpr int kMechanicalBegin = 0;
inline constexpr int kMechanicalSize = 4;
inline constexpr int kOpticalBegin = 4;

}  // namespace layout

// Block-diagonal symplectic form with one [[0, 1], [-1, 0]] block per mode.
template <int N>
Eigen::Matrix<double, N, N> symplectic_form() {
  static_assert(N % 2 == 0);
  Eigen::Matrix<double, N, N> sigma = Eigen::Matrix<double, N, N>::Zero();
  for (int k = 0; k < N; k += 2) {
    sigma(k, k + 1) = 1.0;
    sigma(k + 1, k) = -1.0;
  }
  return sigma;
}

}  // namespace optomech
