// Model fixtures used across the test suites.

#pragma once

#include <sbscan/model.hpp>

namespace sbscan::testing {

// Qubit system in equal superposition, single qubit environment with
// diagonal asymmetric coupling V^1 = diag(0, 1) and rho0 = diag(0.3, 0.7).
inline DephasingModel reference_model() {
  DephasingModel m;
  m.d_q = 2;
  m.eps = {0.0, 0.0};
  Vec a(2);
  a << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  m.amplitudes = a;
  EnvironmentSpec env;
  env.dim = 2;
  env.couplings.push_back(Mat::Zero(2, 2));
  Mat v1 = Mat::Zero(2, 2);
  v1(1, 1) = 1.0;
  env.couplings.push_back(v1);
  env.rho0 = Mat::Zero(2, 2);
  env.rho0(0, 0) = 0.3;
  env.rho0(1, 1) = 0.7;
  m.environments.push_back(std::move(env));
  return m;
}

// Same shape but with unbalanced amplitudes (0.8 / 0.2 populations); never
// reaches a glimpse.
inline DephasingModel unbalanced_model() {
  DephasingModel m = reference_model();
  Vec a(2);
  a << std::sqrt(0.8), std::sqrt(0.2);
  m.amplitudes = a;
  return m;
}

// Qubit system, four-level environment, V^1 = diag(0, 1, 2, 3) with
// asymmetric coupling and nondegenerate rho0 spectrum.
inline DephasingModel ladder_model() {
  DephasingModel m;
  m.d_q = 2;
  m.eps = {0.0, 0.0};
  Vec a(2);
  a << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  m.amplitudes = a;
  EnvironmentSpec env;
  env.dim = 4;
  env.couplings.push_back(Mat::Zero(4, 4));
  Mat v1 = Mat::Zero(4, 4);
  v1.diagonal() << 0.0, 1.0, 2.0, 3.0;
  env.couplings.push_back(v1);
  env.rho0 = Mat::Zero(4, 4);
  env.rho0.diagonal() << 0.4, 0.3, 0.2, 0.1;
  m.environments.push_back(std::move(env));
  return m;
}

// Asymmetric separable model with exactly two distinct V^1 eigenvalues and
// equal-superposition amplitudes; its glimpse times have the closed form
// (2m+1) pi / |v_a - v_b|.
inline DephasingModel random_two_level_phase_model(uint64_t seed, int env_dim) {
  Rng rng(seed);
  DephasingModel m;
  m.d_q = 2;
  m.eps = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  Vec a(2);
  a << std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * kPi))) / std::sqrt(2.0),
      std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * kPi))) / std::sqrt(2.0);
  m.amplitudes = a;

  EnvironmentSpec env;
  env.dim = env_dim;
  const Mat basis = rng.haar_unitary(env_dim);
  const auto probs = rng.random_probs(env_dim, 0.05);
  Vec p(env_dim);
  for (int n = 0; n < env_dim; ++n) p(n) = probs[n];
  env.rho0 = basis * p.asDiagonal() * basis.adjoint();

  const double v_lo = rng.uniform(-1.0, 1.0);
  const double v_hi = v_lo + rng.uniform(0.5, 3.0);
  Vec v(env_dim);
  v(0) = v_lo;
  v(env_dim - 1) = v_hi;
  for (int n = 1; n + 1 < env_dim; ++n)
    v(n) = rng.uniform() < 0.5 ? v_lo : v_hi;
  env.couplings.push_back(Mat::Zero(env_dim, env_dim));
  env.couplings.push_back(basis * v.asDiagonal() * basis.adjoint());
  m.environments.push_back(std::move(env));
  return m;
}

// Two-environment asymmetric separable model whose conditional phases are
// integer multiples of t, so the system side aligns into two orthogonal
// groups at t = pi. Environment 1 always carries both parities.
inline DephasingModel random_aligned_two_env_model(uint64_t seed) {
  Rng rng(seed);
  DephasingModel m;
  m.d_q = 2;
  m.eps = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  Vec a(2);
  a << std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * kPi))) / std::sqrt(2.0),
      std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * kPi))) / std::sqrt(2.0);
  m.amplitudes = a;

  for (int q = 0; q < 2; ++q) {
    const int dim = 2 + static_cast<int>(rng.uniform() * 3.0);  // 2..4
    EnvironmentSpec env;
    env.dim = dim;
    const Mat basis = rng.haar_unitary(dim);
    const auto probs = rng.random_probs(dim, 0.05);
    Vec p(dim);
    for (int n = 0; n < dim; ++n) p(n) = probs[n];
    env.rho0 = basis * p.asDiagonal() * basis.adjoint();

    Vec v(dim);
    for (int n = 0; n < dim; ++n)
      v(n) = std::floor(rng.uniform(0.0, 5.0));
    if (q == 0) {
      v(0) = 1.0;  // force mixed parity so two groups exist at t = pi
      v(dim - 1) = 2.0;
    }
    env.couplings.push_back(Mat::Zero(dim, dim));
    env.couplings.push_back(basis * v.asDiagonal() * basis.adjoint());
    m.environments.push_back(std::move(env));
  }
  return m;
}

}  // namespace sbscan::testing
