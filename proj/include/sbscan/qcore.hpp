// qcore.hpp — dense complex linear-algebra kernels shared by all modules:
// tensor products, partial trace/transpose, Hermitian propagators, trace
// distance. Everything is dimension-aware and dense; the scenarios handled
// by this library stay below ~64 total dimensions.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbscan {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Default tolerance ledger. Hermiticity/unitarity checks at 1e-10, operator
/// equality at 1e-9, overlap orthogonality at 1e-8; callers may override any
/// of them per call.
struct Tolerances {
  double hermiticity = 1e-10;
  double unitarity = 1e-10;
  double op_equality = 1e-9;
  double orthogonality = 1e-8;
};

inline bool is_hermitian(const Mat& a, double tol = 1e-10) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const Mat& a, double tol = 1e-10) {
  if (a.rows() != a.cols()) return false;
  Mat g = a * a.adjoint();
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff() <= tol;
}

inline bool is_positive_semidefinite(const Mat& a, double tol = 1e-10) {
  if (!is_hermitian(a, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

inline bool is_trace_one(const Mat& a, double tol = 1e-10) {
  return std::abs(a.trace() - Complex(1.0, 0.0)) <= tol;
}

/// Normalizes a state vector to unit norm. Throws on (near-)zero input.
inline Vec normalized_state(Vec v) {
  const double n = v.norm();
  if (n < 1e-300) throw std::invalid_argument("cannot normalize zero vector");
  return v / n;
}

inline Mat identity(int dim) { return Mat::Identity(dim, dim); }

/// Kronecker product, row-major index convention: (a ⊗ b) acts on the
/// composite space with the a-factor as the slower index.
inline Mat tensor(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// N-factor Kronecker product, folded left to right.
inline Mat tensor(std::span<const Mat> factors) {
  if (factors.empty()) return Mat::Identity(1, 1);
  Mat out = factors[0];
  for (size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
  return out;
}

inline Mat tensor(std::initializer_list<Mat> factors) {
  std::vector<Mat> fs(factors);
  return tensor(std::span<const Mat>(fs));
}

namespace detail {

inline int dim_product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

// Flat offsets of every multi-index over the chosen factors, using the
// row-major strides of the full dims list.
inline std::vector<Eigen::Index> subsystem_offsets(
    const std::vector<int>& dims, const std::vector<int>& factors) {
  std::vector<Eigen::Index> strides(dims.size(), 1);
  for (int f = static_cast<int>(dims.size()) - 2; f >= 0; --f)
    strides[f] = strides[f + 1] * dims[f + 1];

  std::vector<Eigen::Index> offsets{0};
  for (int f : factors) {
    std::vector<Eigen::Index> next;
    next.reserve(offsets.size() * dims[f]);
    for (Eigen::Index base : offsets)
      for (int x = 0; x < dims[f]; ++x) next.push_back(base + x * strides[f]);
    offsets = std::move(next);
  }
  return offsets;
}

}  // namespace detail

/// Partial trace over the factors not listed in `keep`. `dims` lists every
/// factor dimension; their product must equal the operator dimension.
inline Mat partial_trace(const Mat& op, const std::vector<int>& dims,
                         const std::vector<int>& keep) {
  if (op.rows() != op.cols())
    throw std::invalid_argument("partial_trace: operator not square");
  if (detail::dim_product(dims) != op.rows())
    throw std::invalid_argument("partial_trace: dims do not match operator");
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  for (int f : keep)
    if (f < 0 || f >= static_cast<int>(dims.size()))
      throw std::invalid_argument("partial_trace: keep index out of range");

  std::vector<int> traced;
  for (int f = 0; f < static_cast<int>(dims.size()); ++f)
    if (std::find(keep.begin(), keep.end(), f) == keep.end())
      traced.push_back(f);

  const auto kept_off = detail::subsystem_offsets(dims, keep);
  const auto traced_off = detail::subsystem_offsets(dims, traced);

  Mat out = Mat::Zero(kept_off.size(), kept_off.size());
  for (size_t r = 0; r < kept_off.size(); ++r)
    for (size_t c = 0; c < kept_off.size(); ++c) {
      Complex sum = 0.0;
      for (Eigen::Index e : traced_off)
        sum += op(kept_off[r] + e, kept_off[c] + e);
      out(r, c) = sum;
    }
  return out;
}

/// Partial transpose on the listed factors.
inline Mat partial_transpose(const Mat& op, const std::vector<int>& dims,
                             const std::vector<int>& transposed) {
  if (op.rows() != op.cols())
    throw std::invalid_argument("partial_transpose: operator not square");
  if (detail::dim_product(dims) != op.rows())
    throw std::invalid_argument("partial_transpose: dims do not match operator");
  for (int f : transposed)
    if (f < 0 || f >= static_cast<int>(dims.size()))
      throw std::invalid_argument("partial_transpose: index out of range");

  std::vector<Eigen::Index> strides(dims.size(), 1);
  for (int f = static_cast<int>(dims.size()) - 2; f >= 0; --f)
    strides[f] = strides[f + 1] * dims[f + 1];

  const Eigen::Index total = op.rows();
  Mat out(total, total);
  for (Eigen::Index r = 0; r < total; ++r)
    for (Eigen::Index c = 0; c < total; ++c) {
      Eigen::Index rr = r, cc = c;
      for (int f : transposed) {
        const Eigen::Index rd = (r / strides[f]) % dims[f];
        const Eigen::Index cd = (c / strides[f]) % dims[f];
        rr += (cd - rd) * strides[f];
        cc += (rd - cd) * strides[f];
      }
      out(rr, cc) = op(r, c);
    }
  return out;
}

/// Unitary propagator e^{-iHt} of a Hermitian generator, via
/// eigendecomposition (never series truncation), so the result is unitary up
/// to eigensolver error.
inline Mat exp_hermitian(const Mat& h, double t, double herm_tol = 1e-10) {
  if (h.rows() != h.cols())
    throw std::invalid_argument("exp_hermitian: generator not square");
  if (!is_hermitian(h, herm_tol))
    throw std::invalid_argument("exp_hermitian: generator not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd& w = es.eigenvalues();
  Vec phases(w.size());
  for (Eigen::Index n = 0; n < w.size(); ++n)
    phases(n) = std::exp(Complex(0.0, -w(n) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Trace norm (sum of singular values) of a general matrix.
inline double trace_norm(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().sum();
}

/// Trace distance between Hermitian operators: half the sum of absolute
/// eigenvalues of the difference.
inline double trace_distance(const Mat& a, const Mat& b,
                             double herm_tol = 1e-8) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  if (!is_hermitian(a, herm_tol) || !is_hermitian(b, herm_tol))
    throw std::invalid_argument("trace_distance: operands not Hermitian");
  Mat d = a - b;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d + d.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace sbscan
