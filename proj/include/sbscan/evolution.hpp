// evolution.hpp — exact joint states of the dephasing model. The factorized
// path assembles the state block by block from conditional environment
// operators and scales with the environment dimensions; the direct path
// exponentiates the full Hamiltonian and exists as an independent oracle.

#pragma once

#include <sbscan/model.hpp>

#include <optional>
#include <vector>

namespace sbscan {

/// Joint density operator on system (x) environments with its factor
/// dimensions and the time it belongs to. Construction via make_joint_state
/// enforces hermiticity, positivity and unit trace at 1e-9.
struct JointState {
  Mat sigma;
  std::vector<int> dims;  // [d_q, d_1, ..., d_N]
  double t = 0.0;
};

inline JointState make_joint_state(Mat sigma, std::vector<int> dims, double t,
                                   double tol = 1e-9) {
  if (detail::dim_product(dims) != sigma.rows() || sigma.rows() != sigma.cols())
    throw std::invalid_argument("joint state: dims do not match operator");
  if (!is_hermitian(sigma, tol))
    throw std::invalid_argument("joint state: not Hermitian");
  if (!is_trace_one(sigma, tol))
    throw std::invalid_argument("joint state: trace differs from one");
  if (!is_positive_semidefinite(sigma, tol))
    throw std::invalid_argument("joint state: not positive semidefinite");
  return JointState{std::move(sigma), std::move(dims), t};
}

/// Conditional operator rho^k_ij(t) = w^k_i(t) rho^k(0) w^k_j(t)^dag. For
/// i = j it is a density operator; off-diagonal blocks satisfy
/// rho_ij^dag = rho_ji.
struct ConditionalEnvOperator {
  int env = 0;
  int i = 0;
  int j = 0;
  double t = 0.0;
  Mat op;
};

/// Per-model cache of coupling eigendecompositions. Conditional propagators
/// at any time are then a diagonal phase rotation; nothing is re-solved on
/// the time grid. Immutable after construction, safe to share across
/// workers.
class Propagators {
 public:
  explicit Propagators(const DephasingModel& m) {
    require_valid(m);
    eig_.resize(m.env_count());
    for (int k = 0; k < m.env_count(); ++k) {
      eig_[k].reserve(m.d_q);
      for (int i = 0; i < m.d_q; ++i) {
        const Mat& v = m.environments[k].couplings[i];
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (v + v.adjoint()));
        eig_[k].push_back({es.eigenvalues(), es.eigenvectors()});
      }
    }
  }

  int env_count() const { return static_cast<int>(eig_.size()); }
  int pointer_count() const { return eig_.empty() ? 0 : static_cast<int>(eig_[0].size()); }

  /// w^k_i(t) = e^{-i V^i_k t}
  Mat propagator(int k, int i, double t) const {
    check(k, i);
    const auto& e = eig_[k][i];
    Vec phases(e.evals.size());
    for (Eigen::Index n = 0; n < e.evals.size(); ++n)
      phases(n) = std::exp(Complex(0.0, -e.evals(n) * t));
    return e.evecs * phases.asDiagonal() * e.evecs.adjoint();
  }

  /// Eigenvalues of V^i_k, ascending.
  const Eigen::VectorXd& coupling_eigenvalues(int k, int i) const {
    check(k, i);
    return eig_[k][i].evals;
  }

 private:
  struct Eig {
    Eigen::VectorXd evals;
    Mat evecs;
  };

  void check(int k, int i) const {
    if (k < 0 || k >= env_count() || i < 0 || i >= static_cast<int>(eig_[k].size()))
      throw std::out_of_range("propagator index out of range");
  }

  std::vector<std::vector<Eig>> eig_;
};

inline Mat conditional_propagator(const DephasingModel& m, int k, int i,
                                  double t) {
  require_valid(m);
  if (k < 0 || k >= m.env_count() || i < 0 || i >= m.d_q)
    throw std::out_of_range("conditional_propagator: index out of range");
  return exp_hermitian(m.environments[k].couplings[i], t);
}

inline ConditionalEnvOperator conditional_env(const DephasingModel& m, int k,
                                              int i, int j, double t) {
  require_valid(m);
  if (k < 0 || k >= m.env_count() || i < 0 || i >= m.d_q || j < 0 || j >= m.d_q)
    throw std::out_of_range("conditional_env: index out of range");
  const Mat wi = exp_hermitian(m.environments[k].couplings[i], t);
  const Mat wj = exp_hermitian(m.environments[k].couplings[j], t);
  return {k, i, j, t, wi * m.environments[k].rho0 * wj.adjoint()};
}

/// a_i(t) = a_i e^{-i eps_i t}
inline Vec evolved_amplitudes(const DephasingModel& m, double t) {
  Vec a(m.d_q);
  for (int i = 0; i < m.d_q; ++i)
    a(i) = m.amplitudes(i) * std::exp(Complex(0.0, -m.eps[i] * t));
  return a;
}

inline JointState initial_joint_state(const DephasingModel& m) {
  require_valid(m);
  Mat sigma = m.amplitudes * m.amplitudes.adjoint();
  for (const auto& env : m.environments) sigma = tensor(sigma, env.rho0);
  return make_joint_state(std::move(sigma), m.dims(), 0.0);
}

/// Joint state assembled block by block: block (i, j) carries
/// a_i(t) a_j(t)^* times the tensor product over environments of
/// rho^k_ij(t).
inline JointState joint_state_factorized(const DephasingModel& m, double t,
                                         const Propagators& props) {
  require_valid(m);
  const int env_dim = m.env_dim_product();
  const Vec a = evolved_amplitudes(m, t);

  // All conditional propagators once per (k, i).
  std::vector<std::vector<Mat>> w(m.env_count());
  for (int k = 0; k < m.env_count(); ++k)
    for (int i = 0; i < m.d_q; ++i) w[k].push_back(props.propagator(k, i, t));

  Mat sigma(m.total_dim(), m.total_dim());
  for (int i = 0; i < m.d_q; ++i)
    for (int j = 0; j < m.d_q; ++j) {
      Mat block = Mat::Identity(1, 1);
      for (int k = 0; k < m.env_count(); ++k) {
        const Mat rho_ij =
            w[k][i] * m.environments[k].rho0 * w[k][j].adjoint();
        block = tensor(block, rho_ij);
      }
      sigma.block(i * env_dim, j * env_dim, env_dim, env_dim) =
          a(i) * std::conj(a(j)) * block;
    }
  return make_joint_state(std::move(sigma), m.dims(), t);
}

inline JointState joint_state_factorized(const DephasingModel& m, double t) {
  return joint_state_factorized(m, t, Propagators(m));
}

/// Independent oracle: conjugate the initial product state with
/// e^{-iHt} for the full Hamiltonian.
inline JointState joint_state_direct(const DephasingModel& m, double t) {
  const JointState init = initial_joint_state(m);
  const Mat u = exp_hermitian(total_hamiltonian(m), t);
  return make_joint_state(u * init.sigma * u.adjoint(), m.dims(), t);
}

/// Diagonal of the reduced system state. Pure dephasing keeps these equal to
/// |a_i(0)|^2 at all times.
inline std::vector<double> system_populations(const JointState& s) {
  const Mat reduced = partial_trace(s.sigma, s.dims, {0});
  std::vector<double> pops(reduced.rows());
  for (Eigen::Index i = 0; i < reduced.rows(); ++i)
    pops[i] = reduced(i, i).real();
  return pops;
}

}  // namespace sbscan
