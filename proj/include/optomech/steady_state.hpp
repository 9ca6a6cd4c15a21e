#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "optomech/dynamics.hpp"
#include "optomech/error.hpp"
#include "optomech/layout.hpp"

namespace optomech {

// Symmetrised quadrature covariances, vacuum variance 1/2.
struct CovarianceMatrix {
  Matrix8 eta = Matrix8::Zero();
};

struct LyapunovOptions {
  double condition_bound = 1e12;
  double stability_margin = 0.0;
};

struct LyapunovSolution {
  CovarianceMatrix covariance;
  double condition_estimate = 0.0;  // 1-norm estimate for the 64x64 system
  double relative_residual = 0.0;
  bool ill_conditioned = false;
};

/// ||Q eta + eta Q^T + Omega||_F / ||Omega||_F
inline double lyapunov_residual(const Matrix8& q, const Matrix8& eta, const Matrix8& omega) {
  const double scale = omega.norm();
  const double r = (q * eta + eta * q.transpose() + omega).norm();
  return scale > 0.0 ? r / scale : r;
}

/// Steady-state covariance from Q eta + eta Q^T = -Omega, solved as the dense
/// 64x64 system (I (x) Q + Q (x) I) vec(eta) = -vec(Omega).
///
/// Throws UnstableSystem if Q is not Hurwitz. A condition estimate above
/// `condition_bound` does not throw; the solution comes back flagged.
inline LyapunovSolution solve_lyapunov(const DriftMatrix& drift, const NoiseMatrix& noise,
                                       const LyapunovOptions& options = {}) {
  constexpr int n = layout::kDim;
  const StabilityReport stability = stability_check(drift, options.stability_margin);
  if (!stability.stable) {
    throw Error(ErrorKind::UnstableSystem,
                "drift matrix has an eigenvalue with non-negative real part");
  }
  const Matrix8& q = drift.q;

  Eigen::Matrix<double, n * n, n * n> kron_sum = Eigen::Matrix<double, n * n, n * n>::Zero();
  // Column-major vec: vec(Q X) = (I (x) Q) vec X, vec(X Q^T) = (Q (x) I) vec X.
  for (int blk = 0; blk < n; ++blk) {
    kron_sum.block<n, n>(blk * n, blk * n) += q;
    for (int col = 0; col < n; ++col) {
      kron_sum.block<n, n>(blk * n, col * n).diagonal().array() += q(blk, col);
    }
  }
  Eigen::Matrix<double, n * n, 1> rhs;
  Eigen::Map<Matrix8>(rhs.data()) = -noise.omega;

  Eigen::PartialPivLU<Eigen::Matrix<double, n * n, n * n>> lu(kron_sum);
  Eigen::Matrix<double, n * n, 1> x = lu.solve(rhs);

  LyapunovSolution out;
  const Matrix8 eta = Eigen::Map<const Matrix8>(x.data());
  out.covariance.eta = 0.5 * (eta + eta.transpose());
  const double rcond = lu.rcond();
  out.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.condition_estimate <= options.condition_bound);
  out.relative_residual = lyapunov_residual(q, out.covariance.eta, noise.omega);
  return out;
}

/// Symplectic eigenvalues of a 2n x 2n covariance matrix in ascending order,
/// obtained from the spectrum of Sigma V, which is {+i nu_k, -i nu_k}.
template <int N>
std::vector<double> symplectic_eigenvalues(const Eigen::Matrix<double, N, N>& v) {
  const Eigen::Matrix<double, N, N> m = symplectic_form<N>() * v;
  Eigen::EigenSolver<Eigen::Matrix<double, N, N>> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigendecompositionFailure,
                "symplectic spectrum did not converge");
  }
  std::vector<double> magnitudes;
  for (int k = 0; k < N; ++k) magnitudes.push_back(std::abs(solver.eigenvalues()[k].imag()));
  std::sort(magnitudes.begin(), magnitudes.end());
  std::vector<double> nu;
  // Each value appears twice (+/- pair).
  for (int k = 0; k < N; k += 2) nu.push_back(0.5 * (magnitudes[k] + magnitudes[k + 1]));
  return nu;
}

/// Smallest symplectic eigenvalue minus 1/2 >= -tolerance is the Heisenberg
/// bound for a Gaussian state.
inline bool is_physical(const CovarianceMatrix& cov, double tolerance = 1e-9) {
  return symplectic_eigenvalues<8>(cov.eta).front() >= 0.5 - tolerance;
}

struct IntegrationOptions {
  std::size_t max_steps = 5'000'000;
  double abs_tolerance = 1e-12;
  double rel_tolerance = 1e-12;
};

struct IntegrationResult {
  CovarianceMatrix covariance;
  double time = 0.0;            // s
  std::size_t steps = 0;
  double relative_residual = 0.0;
};

/// Integrates d eta/dt = Q eta + eta Q^T + Omega from eta0 with an adaptive
/// Dormand-Prince stepper until the stationary residual drops below `tol`.
///
/// The first trial step is set from the fastest decay rate of Q and the
/// residual is checked once per slowest relaxation time, so the number of
/// checks scales with the stiffness ratio max|Re l| / min|Re l|. Throws
/// NoConvergence when the step budget runs out.
inline IntegrationResult integrate_to_steady_state(const DriftMatrix& drift,
                                                   const NoiseMatrix& noise,
                                                   const CovarianceMatrix& eta0, double tol,
                                                   const IntegrationOptions& options = {}) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 64>;

  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidSpec, "tolerance must be positive");
  const StabilityReport stability = stability_check(drift);
  if (!stability.stable) {
    throw Error(ErrorKind::UnstableSystem, "cannot integrate an unstable drift matrix");
  }
  double fastest = 0.0;
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& ev : stability.eigenvalues) {
    fastest = std::max(fastest, std::abs(ev));
    slowest = std::min(slowest, -ev.real());
  }

  const Matrix8 q = drift.q;
  const Matrix8 omega = noise.omega;
  auto rhs = [&q, &omega](const State& x, State& dxdt, double /*t*/) {
    const Eigen::Map<const Matrix8> eta(x.data());
    Eigen::Map<Matrix8>(dxdt.data()) = q * eta + eta * q.transpose() + omega;
  };

  State state;
  Eigen::Map<Matrix8>(state.data()) = eta0.eta;
  auto residual_of = [&](const State& x) {
    return lyapunov_residual(q, Eigen::Map<const Matrix8>(x.data()), omega);
  };

  IntegrationResult out;
  double residual = residual_of(state);
  const double chunk = 1.0 / slowest;
  const double dt = 0.01 / fastest;
  auto stepper = ode::make_controlled(options.abs_tolerance, options.rel_tolerance,
                                      ode::runge_kutta_dopri5<State>());
  while (residual > tol) {
    if (out.steps >= options.max_steps) {
      throw Error(ErrorKind::NoConvergence,
                  "covariance ODE did not reach the requested residual within the step budget");
    }
    const std::size_t taken =
        ode::integrate_adaptive(stepper, rhs, state, out.time, out.time + chunk, dt);
    out.steps += taken;
    out.time += chunk;
    residual = residual_of(state);
  }
  const Matrix8 eta = Eigen::Map<const Matrix8>(state.data());
  out.covariance.eta = 0.5 * (eta + eta.transpose());
  out.relative_residual = lyapunov_residual(q, out.covariance.eta, omega);
  return out;
}

}  // namespace optomech
