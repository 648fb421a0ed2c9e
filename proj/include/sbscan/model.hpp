// model.hpp — declarative description of a pure-dephasing model: pointer
// energies, per-environment coupling operators, initial states, and scan
// settings. Units follow hbar = 1: energies and coupling eigenvalues are
// angular frequencies, times their inverses.

#pragma once

#include <sbscan/qcore.hpp>

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sbscan {

/// One environment: its dimension, one Hermitian coupling operator per
/// system pointer index, and its initial density operator.
struct EnvironmentSpec {
  int dim = 0;
  std::vector<Mat> couplings;  // couplings[i] pairs with pointer state |i>
  Mat rho0;
};

/// Pure-dephasing model: the Hamiltonian couples each pointer projector
/// |i><i| to one coupling operator per environment, so populations in the
/// pointer basis are conserved and the environments never talk to each other
/// directly.
struct DephasingModel {
  int d_q = 0;
  std::vector<double> eps;  // pointer energies
  Vec amplitudes;           // initial pure system state, dim d_q
  std::vector<EnvironmentSpec> environments;

  int env_count() const { return static_cast<int>(environments.size()); }

  int env_dim_product() const {
    int p = 1;
    for (const auto& e : environments) p *= e.dim;
    return p;
  }

  std::vector<int> dims() const {
    std::vector<int> d{d_q};
    for (const auto& e : environments) d.push_back(e.dim);
    return d;
  }

  int total_dim() const { return d_q * env_dim_product(); }
};

struct ScanSettings {
  double t_max = 2.0 * kPi;
  int grid_points = 2048;
  double tol_orth = 1e-8;
  double tol_sep = 1e-9;
  int refine_iters = 64;
};

using ValidationReport = std::vector<std::string>;

inline ValidationReport validate(const DephasingModel& m) {
  ValidationReport out;
  const auto fail = [&out](const std::string& msg) { out.push_back(msg); };

  if (m.d_q < 2) fail("system dimension must be at least 2");
  if (static_cast<int>(m.eps.size()) != m.d_q)
    fail("pointer energy count does not match system dimension");
  if (m.amplitudes.size() != m.d_q) {
    fail("amplitude count does not match system dimension");
  } else if (std::abs(m.amplitudes.norm() - 1.0) > 1e-10) {
    fail("amplitudes not normalized");
  }
  if (m.environments.empty()) fail("model has no environments");

  for (int k = 0; k < m.env_count(); ++k) {
    const auto& env = m.environments[k];
    const std::string tag = "environment " + std::to_string(k) + ": ";
    if (env.dim < 1) {
      fail(tag + "dimension must be positive");
      continue;
    }
    if (static_cast<int>(env.couplings.size()) != m.d_q)
      fail(tag + "coupling count does not match system dimension");
    for (size_t i = 0; i < env.couplings.size(); ++i) {
      const Mat& v = env.couplings[i];
      if (v.rows() != env.dim || v.cols() != env.dim)
        fail(tag + "coupling " + std::to_string(i) + " dimension mismatch");
      else if (!is_hermitian(v, 1e-10))
        fail(tag + "coupling " + std::to_string(i) + " not Hermitian");
    }
    if (env.rho0.rows() != env.dim || env.rho0.cols() != env.dim)
      fail(tag + "initial state dimension mismatch");
    else {
      if (!is_positive_semidefinite(env.rho0, 1e-10))
        fail(tag + "initial state not positive semidefinite");
      if (!is_trace_one(env.rho0, 1e-10))
        fail(tag + "initial state trace differs from one");
    }
  }
  return out;
}

inline bool is_valid(const DephasingModel& m) { return validate(m).empty(); }

inline void require_valid(const DephasingModel& m) {
  const auto report = validate(m);
  if (report.empty()) return;
  std::ostringstream os;
  os << "invalid model:";
  for (const auto& v : report) os << " [" << v << "]";
  throw std::invalid_argument(os.str());
}

/// Full Hamiltonian on d_Q * prod(d_k) dimensions:
///   H = sum_i eps_i |i><i| (x) 1  +  sum_i |i><i| (x) sum_k V^i_k,
/// with each V^i_k padded by identities on the other environments. Used by
/// the direct-evolution oracle; the factorized path never forms it.
inline Mat total_hamiltonian(const DephasingModel& m) {
  require_valid(m);
  const int env_dim = m.env_dim_product();
  Mat h = Mat::Zero(m.total_dim(), m.total_dim());
  for (int i = 0; i < m.d_q; ++i) {
    Mat env_part = m.eps[i] * identity(env_dim);
    for (int k = 0; k < m.env_count(); ++k) {
      int before = 1, after = 1;
      for (int q = 0; q < k; ++q) before *= m.environments[q].dim;
      for (int q = k + 1; q < m.env_count(); ++q) after *= m.environments[q].dim;
      env_part += tensor({identity(before), m.environments[k].couplings[i],
                          identity(after)});
    }
    h.block(i * env_dim, i * env_dim, env_dim, env_dim) = env_part;
  }
  return h;
}

/// Removes environment k from the model, e.g. to declare it unobserved and
/// analyze the rest.
inline DephasingModel drop_environment(DephasingModel m, int k) {
  if (k < 0 || k >= m.env_count())
    throw std::out_of_range("drop_environment: bad index");
  m.environments.erase(m.environments.begin() + k);
  return m;
}

/// Deterministic random source for model generation. Raw mt19937_64 bits are
/// mapped to doubles directly so streams are identical across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  Complex cgaussian() { return {gaussian(), gaussian()}; }

  Mat ginibre(int n) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = cgaussian();
    return g;
  }

  Mat random_hermitian(int n, double scale = 1.0) {
    Mat g = ginibre(n);
    return scale * 0.5 * (g + g.adjoint());
  }

  Mat haar_unitary(int n) {
    Eigen::HouseholderQR<Mat> qr(ginibre(n));
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
      const Complex d = r(j, j);
      q.col(j) *= (std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0, 0.0));
    }
    return q;
  }

  Vec random_state(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = cgaussian();
    return normalized_state(v);
  }

  /// Probability vector with every entry at least `floor`.
  std::vector<double> random_probs(int n, double floor = 0.02) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& x : p) {
      x = -std::log(1.0 - uniform());
      sum += x;
    }
    for (double& x : p) x = (1.0 - n * floor) * (x / sum) + floor;
    return p;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Reproducible random model. With `separable_family` set, all couplings of
/// an environment are drawn simultaneously diagonal in one random basis and
/// rho0 diagonal in that same basis, which keeps the joint evolution
/// separable at every time. With `asymmetric` set, every V^0_k is the zero
/// operator, so the environment dynamics conditional on pointer state |0>
/// is frozen.
inline DephasingModel random_model(uint64_t seed, int d_q,
                                   const std::vector<int>& env_dims,
                                   bool separable_family = false,
                                   bool asymmetric = false) {
  Rng rng(seed);
  DephasingModel m;
  m.d_q = d_q;
  m.eps.resize(d_q);
  for (double& e : m.eps) e = rng.uniform(-1.0, 1.0);
  m.amplitudes = rng.random_state(d_q);

  for (int dk : env_dims) {
    EnvironmentSpec env;
    env.dim = dk;
    if (separable_family) {
      const Mat basis = rng.haar_unitary(dk);
      const auto probs = rng.random_probs(dk);
      Vec p(dk);
      for (int n = 0; n < dk; ++n) p(n) = probs[n];
      env.rho0 = basis * p.asDiagonal() * basis.adjoint();
      for (int i = 0; i < d_q; ++i) {
        if (asymmetric && i == 0) {
          env.couplings.push_back(Mat::Zero(dk, dk));
          continue;
        }
        Vec v(dk);
        for (int n = 0; n < dk; ++n) v(n) = rng.uniform(-2.0, 2.0);
        env.couplings.push_back(basis * v.asDiagonal() * basis.adjoint());
      }
    } else {
      env.rho0 = [&] {
        Mat g = rng.ginibre(dk);
        Mat rho = g * g.adjoint() + 0.05 * identity(dk);
        return Mat(rho / rho.trace().real());
      }();
      for (int i = 0; i < d_q; ++i) {
        if (asymmetric && i == 0) {
          env.couplings.push_back(Mat::Zero(dk, dk));
          continue;
        }
        env.couplings.push_back(rng.random_hermitian(dk));
      }
    }
    m.environments.push_back(std::move(env));
  }
  return m;
}

}  // namespace sbscan
