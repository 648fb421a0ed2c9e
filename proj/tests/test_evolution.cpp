#include <sbscan/evolution.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "test_helpers.hpp"

using namespace sbscan;
using sbscan::testing::basis_state;
using sbscan::testing::reference_model;
using sbscan::testing::TestRng;

TEST_CASE("conditional_propagator: identity cases") {
  const auto m = reference_model();
  REQUIRE((conditional_propagator(m, 0, 0, 0.0) - identity(2))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
  // asymmetric coupling: w_0(t) = 1 for all t
  for (double t : {0.3, 1.7, 9.2})
    REQUIRE((conditional_propagator(m, 0, 0, t) - identity(2))
                .cwiseAbs()
                .maxCoeff() < 1e-14);
}

TEST_CASE("conditional_propagator: diagonal exponentiation") {
  const auto m = reference_model();
  Mat expected(2, 2);
  expected << 1, 0, 0, -1;
  REQUIRE((conditional_propagator(m, 0, 1, kPi) - expected)
              .cwiseAbs()
              .maxCoeff() < 1e-13);
  REQUIRE_THROWS_AS(conditional_propagator(m, 1, 0, 0.0), std::out_of_range);
}

TEST_CASE("conditional_env: frozen and invariant cases") {
  auto m = reference_model();
  // asymmetric model: rho_00(t) = rho(0) for all t
  for (double t : {0.0, 0.4, 2.9, 11.0}) {
    const auto c = conditional_env(m, 0, 0, 0, t);
    REQUIRE((c.op - m.environments[0].rho0).cwiseAbs().maxCoeff() < 1e-14);
  }
  // maximally mixed initial state is invariant under any unitary
  m.environments[0].rho0 = 0.5 * identity(2);
  for (double t : {0.7, 3.1}) {
    const auto c = conditional_env(m, 0, 1, 1, t);
    REQUIRE(trace_distance(c.op, 0.5 * identity(2)) < 1e-13);
  }
}

TEST_CASE("conditional_env: diagonal blocks are states, off-diagonal adjoint") {
  TestRng rng(61);
  const auto m = random_model(5, 3, {3});
  for (double t : {0.5, 1.9}) {
    for (int i = 0; i < 3; ++i) {
      const auto c = conditional_env(m, 0, i, i, t);
      REQUIRE(is_positive_semidefinite(c.op, 1e-10));
      REQUIRE(is_trace_one(c.op, 1e-10));
    }
    const auto c01 = conditional_env(m, 0, 0, 1, t);
    const auto c10 = conditional_env(m, 0, 1, 0, t);
    REQUIRE((c01.op.adjoint() - c10.op).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("joint_state_factorized: initial product form") {
  const auto m = reference_model();
  const auto s = joint_state_factorized(m, 0.0);
  const auto init = initial_joint_state(m);
  REQUIRE(trace_distance(s.sigma, init.sigma) < 1e-13);
}

TEST_CASE("joint_state_factorized: reference model at t = pi") {
  const auto m = reference_model();
  const auto s = joint_state_factorized(m, kPi);

  Vec plus(2), minus(2);
  plus << 1, 1;
  minus << 1, -1;
  plus = normalized_state(plus);
  minus = normalized_state(minus);
  const Mat expected =
      0.3 * tensor(plus * plus.adjoint(),
                   basis_state(2, 0) * basis_state(2, 0).adjoint()) +
      0.7 * tensor(minus * minus.adjoint(),
                   basis_state(2, 1) * basis_state(2, 1).adjoint());
  REQUIRE(trace_distance(s.sigma, expected) < 1e-13);
}

TEST_CASE("joint_state_direct: free evolution rotates the coherence") {
  auto m = reference_model();
  const double omega = 1.3;
  m.eps = {0.0, omega};
  m.environments[0].couplings[1] = Mat::Zero(2, 2);
  const double t = 0.9;
  const auto s = joint_state_direct(m, t);
  // reduced system coherence: a_0 a_1^* e^{-i(eps_0 - eps_1)t} = 0.5 e^{i w t}
  const Mat sys = partial_trace(s.sigma, s.dims, {0});
  const Complex expected = 0.5 * std::exp(Complex(0.0, omega * t));
  REQUIRE(std::abs(sys(0, 1) - expected) < 1e-12);
  // environment untouched
  REQUIRE(trace_distance(partial_trace(s.sigma, s.dims, {1}),
                         m.environments[0].rho0) < 1e-12);
}

TEST_CASE("factorized equals direct on random models and times") {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const int d_q = 2 + static_cast<int>(seed % 3);
    const auto m = (seed % 2 == 0)
                       ? random_model(seed, d_q, {2, 3})
                       : random_model(seed, d_q, {4}, seed % 4 == 1);
    TestRng rng(seed + 1000);
    const Propagators props(m);
    for (int rep = 0; rep < 3; ++rep) {
      const double t = rng.uniform(0.0, 6.0);
      const auto fac = joint_state_factorized(m, t, props);
      const auto dir = joint_state_direct(m, t);
      REQUIRE(trace_distance(fac.sigma, dir.sigma) <= 1e-10);
    }
  }
}

TEST_CASE("direct evolution preserves trace, hermiticity, positivity") {
  for (uint64_t seed = 200; seed < 220; ++seed) {
    const auto m = random_model(seed, 2, {3});
    TestRng rng(seed);
    for (int rep = 0; rep < 5; ++rep) {
      const double t = rng.uniform(0.0, 8.0);
      // make_joint_state enforces all three invariants at 1e-9
      REQUIRE_NOTHROW(joint_state_direct(m, t));
    }
  }
}

TEST_CASE("system_populations: conserved and equal to |a_i|^2") {
  const auto m = reference_model();
  for (double t : {0.0, 0.8, kPi, 7.3}) {
    const auto pops = system_populations(joint_state_factorized(m, t));
    REQUIRE(pops.size() == 2);
    REQUIRE(std::abs(pops[0] - 0.5) < 1e-12);
    REQUIRE(std::abs(pops[1] - 0.5) < 1e-12);
  }

  auto m2 = sbscan::testing::unbalanced_model();
  for (double t : {0.0, 1.1, 4.9}) {
    const auto pops = system_populations(joint_state_factorized(m2, t));
    REQUIRE(std::abs(pops[0] - 0.8) < 1e-12);
    REQUIRE(std::abs(pops[1] - 0.2) < 1e-12);
  }
}

TEST_CASE("system_populations: random models over a time grid") {
  for (uint64_t seed = 300; seed < 310; ++seed) {
    const auto m = random_model(seed, 3, {2, 2});
    const Propagators props(m);
    std::vector<double> expected(m.d_q);
    for (int i = 0; i < m.d_q; ++i) expected[i] = std::norm(m.amplitudes(i));
    for (int g = 0; g < 20; ++g) {
      const double t = 8.0 * g / 19.0;
      const auto pops = system_populations(joint_state_factorized(m, t, props));
      for (int i = 0; i < m.d_q; ++i)
        REQUIRE(std::abs(pops[i] - expected[i]) < 1e-10);
    }
  }
}

TEST_CASE("make_joint_state rejects invalid operators") {
  REQUIRE_THROWS_AS(make_joint_state(identity(4), {2, 3}, 0.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(make_joint_state(2.0 * identity(4), {2, 2}, 0.0),
                    std::invalid_argument);
  Mat notpsd = identity(4) / 2.0;
  notpsd(3, 3) = -0.5;
  REQUIRE_THROWS_AS(make_joint_state(notpsd, {2, 2}, 0.0),
                    std::invalid_argument);
}
