// analysis.hpp — separability certification, canonical branch decomposition
// of separable dephasing states, and the structural tests that certify or
// refute momentary broadcast structure: branch clustering, mutual
// unbiasedness, negativity, measurement-disturbance discord residuals, and
// the trace distance to the reconstructed broadcast state.

#pragma once

#include <sbscan/evolution.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace sbscan {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SeparabilityResult {
  bool holds = false;
  double deviation = 0.0;
};

/// Separability criterion for pure-dephasing evolutions: all diagonal
/// conditional operators of each environment must coincide, and beyond a
/// qubit system the conditional propagator products must commute pairwise.
/// The reported deviation is the worst trace norm over both families; the
/// evolution is certified separable at t iff it stays below tol_sep. For
/// systems larger than a qubit a failed check means "not certified", not
/// necessarily entangled.
inline SeparabilityResult check_separability(const DephasingModel& m, double t,
                                             double tol_sep,
                                             const Propagators& props) {
  require_valid(m);
  double deviation = 0.0;
  for (int k = 0; k < m.env_count(); ++k) {
    std::vector<Mat> w(m.d_q);
    for (int i = 0; i < m.d_q; ++i) w[i] = props.propagator(k, i, t);

    std::vector<Mat> diag(m.d_q);
    for (int i = 0; i < m.d_q; ++i)
      diag[i] = w[i] * m.environments[k].rho0 * w[i].adjoint();
    for (int i = 0; i < m.d_q; ++i)
      for (int j = i + 1; j < m.d_q; ++j)
        deviation = std::max(deviation, trace_norm(diag[i] - diag[j]));

    if (m.d_q > 2) {
      std::vector<Mat> products;
      products.reserve(m.d_q * m.d_q);
      for (int i = 0; i < m.d_q; ++i)
        for (int j = 0; j < m.d_q; ++j) products.push_back(w[i] * w[j].adjoint());
      for (size_t a = 0; a < products.size(); ++a)
        for (size_t b = a + 1; b < products.size(); ++b)
          deviation = std::max(
              deviation, trace_norm(products[a] * products[b] -
                                    products[b] * products[a]));
    }
  }
  return {deviation <= tol_sep, deviation};
}

inline SeparabilityResult check_separability(const DephasingModel& m, double t,
                                             double tol_sep = 1e-9) {
  return check_separability(m, t, tol_sep, Propagators(m));
}

/// Entanglement oracle: sum of the absolute negative eigenvalues of the
/// partial transpose over the factors listed in `cut`. Zero on every
/// separable state, and zero exactly on separable states when both sides are
/// qubits.
inline double negativity(const JointState& s, const std::vector<int>& cut) {
  if (cut.empty() || cut.size() >= s.dims.size())
    throw std::invalid_argument("negativity: cut must be a proper nonempty subset");
  const Mat pt = partial_transpose(s.sigma, s.dims, cut);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pt + pt.adjoint()),
                                        Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Eigen::Index n = 0; n < es.eigenvalues().size(); ++n)
    neg += std::max(0.0, -es.eigenvalues()(n));
  return neg;
}

/// One branch of the canonical separable decomposition: probability,
/// system branch state, environment eigenstate, and the conditional phases
/// phi^i relative to pointer state 0 (phi^0 = 0).
struct Branch {
  double probability = 0.0;
  Vec system_state;
  Vec env_state;
  std::vector<double> phases;
};

struct BranchDecomposition {
  std::vector<Branch> branches;
  double t = 0.0;
  int env = 0;
};

namespace detail {

// Clusters sorted values into runs of adjacent gaps below tol; returns
// [start, end) ranges.
inline std::vector<std::pair<int, int>> cluster_sorted(
    const Eigen::VectorXd& vals, double tol) {
  std::vector<std::pair<int, int>> out;
  int start = 0;
  for (int n = 1; n <= vals.size(); ++n) {
    if (n == vals.size() || vals(n) - vals(n - 1) > tol) {
      out.emplace_back(start, n);
      start = n;
    }
  }
  return out;
}

// Refines `basis` so that the normal operator `op` becomes diagonal on each
// listed block, assuming op is block-invariant there. Splits each block by
// the eigenvalues of the Hermitian and anti-Hermitian parts in turn and
// returns the refined block list.
inline std::vector<std::pair<int, int>> refine_blocks_with(
    Mat& basis, const Mat& op, const std::vector<std::pair<int, int>>& blocks,
    double cluster_tol) {
  std::vector<std::pair<int, int>> refined;
  for (const auto& [lo, hi] : blocks) {
    const int b = hi - lo;
    if (b == 1) {
      refined.emplace_back(lo, hi);
      continue;
    }
    Mat sub = basis.middleCols(lo, b);
    Mat restricted = sub.adjoint() * op * sub;

    Eigen::SelfAdjointEigenSolver<Mat> es1(
        0.5 * (restricted + restricted.adjoint()));
    sub = sub * es1.eigenvectors();
    const auto h1_blocks = cluster_sorted(es1.eigenvalues(), cluster_tol);

    for (const auto& [l2, h2] : h1_blocks) {
      const int b2 = h2 - l2;
      if (b2 == 1) {
        refined.emplace_back(lo + l2, lo + h2);
        continue;
      }
      Mat sub2 = sub.middleCols(l2, b2);
      Mat r2 = sub2.adjoint() * op * sub2;
      Mat h2m = (r2 - r2.adjoint()) / Complex(0.0, 2.0);
      Eigen::SelfAdjointEigenSolver<Mat> es2(0.5 * (h2m + h2m.adjoint()));
      sub.middleCols(l2, b2) = sub2 * es2.eigenvectors();
      for (const auto& [l3, h3] : cluster_sorted(es2.eigenvalues(), cluster_tol))
        refined.emplace_back(lo + l2 + l3, lo + l2 + h3);
    }
    basis.middleCols(lo, b) = sub;
  }
  return refined;
}

}  // namespace detail

/// Canonical separable decomposition of the single-environment state at time
/// t. The environment basis diagonalizes rho_00(t) together with every
/// conditional propagator product; degenerate probability blocks are broken
/// by re-diagonalizing the products inside each block, taking the products
/// against pointer state 0 in index order (they generate all others).
/// Branches with vanishing probability (< 1e-12) carry no state and are
/// dropped. Throws std::domain_error when separability does not hold at t
/// and std::runtime_error when a degenerate block cannot be diagonalized.
inline BranchDecomposition branch_decomposition(const DephasingModel& m,
                                                double t, double tol_sep,
                                                const Propagators& props) {
  require_valid(m);
  if (m.env_count() != 1)
    throw std::invalid_argument(
        "branch_decomposition: single-environment models only; reduce or use "
        "the multi-environment path");
  const auto sep = check_separability(m, t, tol_sep, props);
  if (!sep.holds)
    throw std::domain_error(
        "branch_decomposition: state not certified separable at t");

  const int d = m.environments[0].dim;
  std::vector<Mat> w(m.d_q);
  for (int i = 0; i < m.d_q; ++i) w[i] = props.propagator(0, i, t);
  const Mat rho00 = w[0] * m.environments[0].rho0 * w[0].adjoint();

  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho00 + rho00.adjoint()));
  Mat basis = es.eigenvectors();
  auto blocks = detail::cluster_sorted(es.eigenvalues(), 1e-9);

  std::vector<Mat> products(m.d_q);
  for (int i = 1; i < m.d_q; ++i) products[i] = w[0] * w[i].adjoint();
  for (int i = 1; i < m.d_q; ++i)
    blocks = detail::refine_blocks_with(basis, products[i], blocks, 1e-8);

  // The refined basis must now diagonalize every product.
  for (int i = 1; i < m.d_q; ++i) {
    Mat diag = basis.adjoint() * products[i] * basis;
    diag.diagonal().setZero();
    if (diag.cwiseAbs().maxCoeff() > 1e-7)
      throw std::runtime_error(
          "branch_decomposition: degenerate-block diagonalization failed");
  }

  const Vec a = evolved_amplitudes(m, t);
  BranchDecomposition out;
  out.t = t;
  out.env = 0;
  for (int n = 0; n < d; ++n) {
    const Vec env_state = basis.col(n);
    const double p =
        (env_state.adjoint() * rho00 * env_state)(0, 0).real();
    if (p < 1e-12) continue;
    Branch br;
    br.probability = p;
    br.env_state = env_state;
    br.phases.assign(m.d_q, 0.0);
    Vec psi(m.d_q);
    psi(0) = a(0);
    for (int i = 1; i < m.d_q; ++i) {
      const Complex lambda =
          (env_state.adjoint() * products[i] * env_state)(0, 0);
      br.phases[i] = std::arg(lambda);
      psi(i) = a(i) * std::exp(Complex(0.0, -br.phases[i]));
    }
    br.system_state = psi;
    out.branches.push_back(std::move(br));
  }
  return out;
}

inline BranchDecomposition branch_decomposition(const DephasingModel& m,
                                                double t,
                                                double tol_sep = 1e-9) {
  return branch_decomposition(m, t, tol_sep, Propagators(m));
}

/// Rebuilds the joint state from a branch decomposition,
/// sum_n p_n |psi_n><psi_n| (x) |n><n|. Test oracle for the decomposition.
inline Mat reconstruct_from_branches(const BranchDecomposition& bd) {
  if (bd.branches.empty())
    throw std::invalid_argument("reconstruct_from_branches: no branches");
  const int dq = static_cast<int>(bd.branches[0].system_state.size());
  const int de = static_cast<int>(bd.branches[0].env_state.size());
  Mat sigma = Mat::Zero(dq * de, dq * de);
  for (const auto& br : bd.branches)
    sigma += br.probability *
             tensor(br.system_state * br.system_state.adjoint(),
                    br.env_state * br.env_state.adjoint());
  return sigma;
}

struct GlimpseResiduals {
  double orthogonality = kNaN;   // worst cross-group fidelity
  double equality = kNaN;        // worst within-group fidelity defect
  double worst_overlap = kNaN;   // worst pairwise distance from {0, 1}
  double sep = kNaN;
  double discord_system = kNaN;
  double discord_env = kNaN;
  double negativity = kNaN;
  double sbs_trace_distance = kNaN;
};

/// Certified-or-refuted broadcast structure at one instant: grouping of
/// branches, representative system states, group probabilities and
/// conditional environment operators, plus the residual ledger. detect_sbs
/// fills the structural entries; scan-level certification fills the rest.
struct GlimpseReport {
  bool is_glimpse = false;
  std::vector<std::vector<int>> groups;
  std::vector<Vec> group_states;
  std::vector<double> group_probs;
  std::vector<Mat> group_env_ops;
  GlimpseResiduals residuals;
  bool mub_ok = false;
};

namespace detail {

// Strips the global phase: first amplitude of nonnegligible modulus is made
// real positive.
inline Vec strip_global_phase(Vec v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-9) {
      v *= std::conj(v(i)) / std::abs(v(i));
      break;
    }
  }
  return v;
}

}  // namespace detail

/// Clusters branches by pairwise fidelity: same group at fidelity >= 1 -
/// tol_orth, separate at <= tol_orth, anything in between refutes the
/// structure outright. A glimpse requires consistent clustering into exactly
/// d_Q groups whose representatives are pairwise orthogonal, each with
/// positive probability.
inline GlimpseReport detect_sbs(const BranchDecomposition& bd,
                                double tol_orth = 1e-8) {
  GlimpseReport report;
  const int nb = static_cast<int>(bd.branches.size());
  if (nb == 0) return report;
  const int dq = static_cast<int>(bd.branches[0].system_state.size());

  Eigen::MatrixXd fid = Eigen::MatrixXd::Ones(nb, nb);
  for (int n = 0; n < nb; ++n)
    for (int mth = n + 1; mth < nb; ++mth) {
      const double f = std::abs(
          (Complex)(bd.branches[n].system_state.adjoint() *
                    bd.branches[mth].system_state)(0, 0));
      fid(n, mth) = fid(mth, n) = f;
    }

  double worst = 0.0;
  bool consistent = true;
  for (int n = 0; n < nb; ++n)
    for (int mth = n + 1; mth < nb; ++mth) {
      const double dist = std::min(fid(n, mth), 1.0 - fid(n, mth));
      worst = std::max(worst, dist);
      if (dist > tol_orth) consistent = false;
    }
  report.residuals.worst_overlap = worst;

  // Union-find on near-unit fidelity edges.
  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&parent](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int n = 0; n < nb; ++n)
    for (int mth = n + 1; mth < nb; ++mth)
      if (fid(n, mth) >= 1.0 - tol_orth) parent[find(n)] = find(mth);

  std::vector<int> roots;
  std::vector<std::vector<int>> groups;
  for (int n = 0; n < nb; ++n) {
    const int r = find(n);
    auto it = std::find(roots.begin(), roots.end(), r);
    if (it == roots.end()) {
      roots.push_back(r);
      groups.push_back({n});
    } else {
      groups[it - roots.begin()].push_back(n);
    }
  }

  double orthogonality = 0.0, equality = 0.0;
  for (size_t g = 0; g < groups.size(); ++g)
    for (size_t h = g; h < groups.size(); ++h)
      for (int n : groups[g])
        for (int mth : groups[h]) {
          if (g == h) {
            if (n < mth) equality = std::max(equality, 1.0 - fid(n, mth));
          } else {
            orthogonality = std::max(orthogonality, fid(n, mth));
          }
        }
  report.residuals.orthogonality = orthogonality;
  report.residuals.equality = equality;

  report.groups = groups;
  const int de = static_cast<int>(bd.branches[0].env_state.size());
  for (const auto& grp : groups) {
    double pg = 0.0;
    Mat rho_g = Mat::Zero(de, de);
    for (int n : grp) {
      pg += bd.branches[n].probability;
      rho_g += bd.branches[n].probability * bd.branches[n].env_state *
               bd.branches[n].env_state.adjoint();
    }
    report.group_probs.push_back(pg);
    report.group_env_ops.push_back(rho_g / pg);
    report.group_states.push_back(
        detail::strip_global_phase(bd.branches[grp[0]].system_state));
  }

  bool positive = true;
  for (double p : report.group_probs) positive = positive && p > 0.0;
  report.is_glimpse = consistent && positive &&
                      static_cast<int>(groups.size()) == dq &&
                      orthogonality <= tol_orth && equality <= tol_orth;
  return report;
}

/// True iff every group representative is unbiased against every pointer
/// state: |<i|psi_G>|^2 = 1/d_Q. Throws when called on a non-glimpse.
inline bool mub_check(const GlimpseReport& report, int d_q, double tol = 1e-9) {
  if (!report.is_glimpse)
    throw std::logic_error("mub_check: report does not certify a glimpse");
  for (const Vec& psi : report.group_states)
    for (int i = 0; i < d_q; ++i)
      if (std::abs(std::norm(psi(i)) - 1.0 / d_q) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Discord residual: minimal measurement disturbance on one side.

enum class Side { system, environment };

struct DiscordOptions {
  int grid_points = 10000;  // Bloch-sphere grid for a two-level side
  int random_bases = 2000;  // Haar grid for larger sides
  int refine_iters = 400;
  int refine_rounds = 2;
  uint64_t seed = 12345;
};

namespace detail {

// Dephases the bipartite state in the basis given by the columns of u on the
// chosen side (factor 0 = system, factor 1 = environment).
inline Mat dephase_in_basis(const Mat& sigma, int da, int db, Side side,
                            const Mat& u) {
  Mat rot;
  if (side == Side::system)
    rot = tensor(u.adjoint(), identity(db));
  else
    rot = tensor(identity(da), u.adjoint());
  Mat r = rot * sigma * rot.adjoint();
  const int dm = (side == Side::system) ? da : db;
  const int dother = (side == Side::system) ? db : da;
  for (Eigen::Index row = 0; row < r.rows(); ++row)
    for (Eigen::Index col = 0; col < r.cols(); ++col) {
      const int mrow = (side == Side::system)
                           ? static_cast<int>(row) / dother
                           : static_cast<int>(row) % dm;
      const int mcol = (side == Side::system)
                           ? static_cast<int>(col) / dother
                           : static_cast<int>(col) % dm;
      if (mrow != mcol) r(row, col) = 0.0;
    }
  return rot.adjoint() * r * rot;
}

inline Mat bloch_basis(double theta, double phi) {
  Mat u(2, 2);
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  const Complex e = std::exp(Complex(0.0, phi));
  u(0, 0) = c;
  u(1, 0) = e * s;
  u(0, 1) = -std::conj(e) * s;
  u(1, 1) = c;
  return u;
}

// Hermitian matrix with zero diagonal from packed off-diagonal coordinates.
inline Mat hermitian_from_offdiag(int d, const std::vector<double>& x) {
  Mat h = Mat::Zero(d, d);
  int idx = 0;
  for (int p = 0; p < d; ++p)
    for (int q = p + 1; q < d; ++q) {
      h(p, q) = Complex(x[idx], x[idx + 1]);
      h(q, p) = std::conj(h(p, q));
      idx += 2;
    }
  return h;
}

// Nelder–Mead on R^n. Deterministic; good enough for the smooth, low-dim
// disturbance objectives here.
template <typename F>
double nelder_mead(F&& f, std::vector<double>& x, double step, int iters) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> simplex(n + 1, x);
  std::vector<double> fx(n + 1);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += step;
  for (int i = 0; i <= n; ++i) fx[i] = f(simplex[i]);

  for (int it = 0; it < iters; ++it) {
    std::vector<int> order(n + 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&fx](int a, int b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (int i = 0; i <= n; ++i) {
      s2[i] = simplex[order[i]];
      f2[i] = fx[order[i]];
    }
    simplex = std::move(s2);
    fx = std::move(f2);

    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;

    const auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (int j = 0; j < n; ++j)
        p[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
      return p;
    };

    auto reflected = blend(-1.0);
    const double fr = f(reflected);
    if (fr < fx[0]) {
      auto expanded = blend(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[n] = std::move(expanded);
        fx[n] = fe;
      } else {
        simplex[n] = std::move(reflected);
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      simplex[n] = std::move(reflected);
      fx[n] = fr;
    } else {
      auto contracted = blend(0.5);
      const double fc = f(contracted);
      if (fc < fx[n]) {
        simplex[n] = std::move(contracted);
        fx[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int j = 0; j < n; ++j)
            simplex[i][j] = 0.5 * (simplex[i][j] + simplex[0][j]);
          fx[i] = f(simplex[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fx[i] < fx[best]) best = i;
  x = simplex[best];
  return fx[best];
}

}  // namespace detail

/// Minimal disturbance caused by a von Neumann measurement on the chosen
/// side: min over orthonormal bases of trace_distance(state, dephased
/// state). Zero within tolerance certifies classicality of that side. The
/// minimizer seeds with the reduced-state eigenbasis and the computational
/// basis, adds a Bloch-sphere grid (two-level side) or a seeded Haar grid
/// (larger sides), and polishes with Nelder–Mead on the basis manifold.
inline double discord_residual(const JointState& s, Side side,
                               const DiscordOptions& opts = {}) {
  if (s.dims.size() != 2)
    throw std::invalid_argument(
        "discord_residual: bipartite states only; trace down to one "
        "environment first");
  const int da = s.dims[0], db = s.dims[1];
  const int dm = (side == Side::system) ? da : db;

  const auto objective = [&](const Mat& u) {
    return trace_distance(s.sigma,
                          detail::dephase_in_basis(s.sigma, da, db, side, u));
  };

  // Informed seeds: local eigenbasis and the computational basis.
  const Mat reduced =
      partial_trace(s.sigma, s.dims, {side == Side::system ? 0 : 1});
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (reduced + reduced.adjoint()));
  Mat best_u = es.eigenvectors();
  double best = objective(best_u);
  if (const double f = objective(identity(dm)); f < best) {
    best = f;
    best_u = identity(dm);
  }

  if (dm == 2) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int g = 0; g < opts.grid_points; ++g) {
      const double z = 1.0 - 2.0 * (g + 0.5) / opts.grid_points;
      const Mat u = detail::bloch_basis(std::acos(z), golden * g);
      if (const double f = objective(u); f < best) {
        best = f;
        best_u = u;
      }
    }
    // Recover Bloch angles of the best basis and polish.
    double theta = 2.0 * std::atan2(std::abs(best_u(1, 0)), std::abs(best_u(0, 0)));
    double phi = std::arg(best_u(1, 0) * std::conj(best_u(0, 0)));
    std::vector<double> x{theta, phi};
    best = std::min(
        best, detail::nelder_mead(
                  [&](const std::vector<double>& p) {
                    return objective(detail::bloch_basis(p[0], p[1]));
                  },
                  x, 0.15, opts.refine_iters));
  } else {
    Rng rng(opts.seed);
    for (int g = 0; g < opts.random_bases; ++g) {
      const Mat u = rng.haar_unitary(dm);
      if (const double f = objective(u); f < best) {
        best = f;
        best_u = u;
      }
    }
    for (int round = 0; round < opts.refine_rounds; ++round) {
      std::vector<double> x(static_cast<size_t>(dm) * (dm - 1), 0.0);
      const Mat center = best_u;
      const double r = detail::nelder_mead(
          [&](const std::vector<double>& p) {
            const Mat h = detail::hermitian_from_offdiag(dm, p);
            return objective(center * exp_hermitian(h, 1.0));
          },
          x, 0.2 / (round + 1), opts.refine_iters);
      if (r < best) {
        best = r;
        best_u = center * exp_hermitian(detail::hermitian_from_offdiag(dm, x), 1.0);
      }
    }
  }
  return best;
}

/// Trace distance from the state to the broadcast reconstruction built from
/// the report: orthonormalized group representatives paired with the group
/// conditional operators. At a certified glimpse this is numerically zero;
/// elsewhere it quantifies how far the instant is from objectivity. When the
/// report carries more groups than the system dimension, the closest groups
/// (by representative fidelity) are merged first so the target is a valid
/// broadcast state.
inline double sbs_distance(const JointState& s, const GlimpseReport& report) {
  if (s.dims.size() != 2)
    throw std::invalid_argument("sbs_distance: bipartite states only");
  if (report.groups.empty())
    throw std::invalid_argument("sbs_distance: report has no groups");
  const int dq = s.dims[0];

  std::vector<Vec> reps = report.group_states;
  std::vector<double> probs = report.group_probs;
  std::vector<Mat> ops = report.group_env_ops;

  while (static_cast<int>(reps.size()) > dq) {
    size_t ma = 0, mb = 1;
    double best_f = -1.0;
    for (size_t a = 0; a < reps.size(); ++a)
      for (size_t b = a + 1; b < reps.size(); ++b) {
        const double f = std::abs((Complex)(reps[a].adjoint() * reps[b])(0, 0));
        if (f > best_f) {
          best_f = f;
          ma = a;
          mb = b;
        }
      }
    const double pa = probs[ma], pb = probs[mb];
    ops[ma] = (pa * ops[ma] + pb * ops[mb]) / (pa + pb);
    if (pb > pa) reps[ma] = reps[mb];
    probs[ma] = pa + pb;
    reps.erase(reps.begin() + mb);
    probs.erase(probs.begin() + mb);
    ops.erase(ops.begin() + mb);
  }

  // Symmetric (minimal-change) orthonormalization of the representatives.
  const int g = static_cast<int>(reps.size());
  Mat mcols(dq, g);
  for (int c = 0; c < g; ++c) mcols.col(c) = normalized_state(reps[c]);
  Eigen::SelfAdjointEigenSolver<Mat> gram(mcols.adjoint() * mcols);
  Eigen::VectorXd vals = gram.eigenvalues().cwiseMax(1e-12);
  const Mat inv_sqrt = gram.eigenvectors() *
                       vals.cwiseSqrt().cwiseInverse().asDiagonal() *
                       gram.eigenvectors().adjoint();
  const Mat ortho = mcols * inv_sqrt;

  const int de = s.dims[1];
  Mat target = Mat::Zero(dq * de, dq * de);
  for (int c = 0; c < g; ++c)
    target += probs[c] *
              tensor(Mat(ortho.col(c) * ortho.col(c).adjoint()), ops[c]);
  return trace_distance(s.sigma, target);
}

}  // namespace sbscan
