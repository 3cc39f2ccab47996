#pragma once

// Dense complex Hermitian linear algebra on top of Eigen: tensor products,
// partial traces, subsystem permutations, a cyclic Jacobi eigensolver and the
// PSD projection.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace unext {

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Thrown when a numerical routine fails to reach its contract (should not
/// happen on valid input).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every numerical tolerance used by the library, in one place.
struct Tolerances {
  double hermiticity = 1e-12;
  double eig_residual = 1e-10;
  double trace = 1e-10;
  double psd = 1e-10;
  double commutation = 1e-10;
  // Eigenvalues below this are treated as exact zeros when comparing supports.
  double zero_eigenvalue = 1e-12;
};

inline constexpr Tolerances default_tolerances{};

/// Ordered local dimensions of a multipartite system, e.g. [d_A, d_B1, ..., d_Bk].
class SubsystemDims {
 public:
  SubsystemDims() = default;
  SubsystemDims(std::initializer_list<int> dims) : dims_(dims) { validate(); }
  explicit SubsystemDims(std::vector<int> dims) : dims_(std::move(dims)) { validate(); }

  /// [d_a, d_b, d_b, ..., d_b] with `copies` copies of d_b.
  static SubsystemDims extension(int d_a, int d_b, int copies) {
    std::vector<int> dims{d_a};
    dims.insert(dims.end(), static_cast<std::size_t>(copies), d_b);
    return SubsystemDims(std::move(dims));
  }

  std::size_t size() const { return dims_.size(); }
  int operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<int>& values() const { return dims_; }

  Eigen::Index total() const {
    return std::accumulate(dims_.begin(), dims_.end(), Eigen::Index{1},
                           [](Eigen::Index acc, int d) { return acc * d; });
  }

  friend bool operator==(const SubsystemDims&, const SubsystemDims&) = default;

 private:
  void validate() const {
    if (dims_.empty()) throw std::invalid_argument("SubsystemDims: empty dimension list");
    for (int d : dims_)
      if (d < 1) throw std::invalid_argument("SubsystemDims: dimensions must be >= 1");
  }

  std::vector<int> dims_;
};

template <typename Derived>
typename Derived::RealScalar max_abs_entry(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = default_tolerances.hermiticity) {
  if (m.rows() != m.cols()) return false;
  return max_abs_entry(m - m.adjoint()) <= tol;
}

/// (m + m†)/2, removing round-off anti-Hermitian parts.
template <typename Derived>
CMatrix<typename Derived::RealScalar> hermitize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.adjoint()) / typename Derived::RealScalar(2);
}

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Result = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Result out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// n-fold tensor power of a square matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron_power(
    const Eigen::MatrixBase<Derived>& a, int n) {
  using Result = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (n < 0) throw std::invalid_argument("kron_power: negative exponent");
  Result out = Result::Identity(1, 1);
  for (int i = 0; i < n; ++i) out = kron(out, a);
  return out;
}

namespace detail {

inline std::vector<Eigen::Index> strides(const SubsystemDims& dims) {
  std::vector<Eigen::Index> s(dims.size());
  Eigen::Index acc = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    s[i] = acc;
    acc *= dims[i];
  }
  return s;
}

// Offsets of every multi-index over `subsystems` (lexicographic, first one most
// significant), expressed in the flat index of the full system.
inline std::vector<Eigen::Index> offsets(const SubsystemDims& dims, const std::vector<int>& subsystems) {
  const auto st = strides(dims);
  std::vector<Eigen::Index> out{0};
  for (int s : subsystems) {
    std::vector<Eigen::Index> next;
    next.reserve(out.size() * static_cast<std::size_t>(dims[s]));
    for (Eigen::Index base : out)
      for (int v = 0; v < dims[s]; ++v) next.push_back(base + v * st[s]);
    out = std::move(next);
  }
  return out;
}

// Flat index map of the subsystem permutation perm (subsystem j moves to slot perm[j]).
inline std::vector<Eigen::Index> permutation_index_map(const SubsystemDims& dims, const std::vector<int>& perm) {
  const std::size_t k = dims.size();
  if (perm.size() != k) throw std::invalid_argument("permutation size does not match subsystem count");
  std::vector<int> seen(k, 0);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= k || seen[p]++)
      throw std::invalid_argument("not a permutation");
  }
  std::vector<int> out_dims(k);
  for (std::size_t j = 0; j < k; ++j) out_dims[perm[j]] = dims[j];
  const auto in_st = strides(dims);
  const auto out_st = strides(SubsystemDims(out_dims));
  const Eigen::Index n = dims.total();
  std::vector<Eigen::Index> map(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index target = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::Index digit = (r / in_st[j]) % dims[j];
      target += digit * out_st[perm[j]];
    }
    map[static_cast<std::size_t>(r)] = target;
  }
  return map;
}

}  // namespace detail

/// Reduction onto the subsystems listed in `keep` (kept in ascending order).
template <typename Derived>
CMatrix<typename Derived::RealScalar> partial_trace(const Eigen::MatrixBase<Derived>& m, const SubsystemDims& dims,
                                                    std::vector<int> keep) {
  using Scalar = typename Derived::RealScalar;
  if (m.rows() != m.cols() || m.rows() != dims.total())
    throw std::invalid_argument("partial_trace: matrix dimension does not match subsystem dims");
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set must be nonempty");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  std::vector<int> traced;
  for (int i = 0; i < static_cast<int>(dims.size()); ++i) {
    if (std::binary_search(keep.begin(), keep.end(), i)) continue;
    traced.push_back(i);
  }
  for (int k : keep)
    if (k < 0 || k >= static_cast<int>(dims.size()))
      throw std::invalid_argument("partial_trace: subsystem index out of range");

  const auto kept_off = detail::offsets(dims, keep);
  const auto traced_off = detail::offsets(dims, traced);
  const auto n_out = static_cast<Eigen::Index>(kept_off.size());
  CMatrix<Scalar> out = CMatrix<Scalar>::Zero(n_out, n_out);
  for (Eigen::Index a = 0; a < n_out; ++a)
    for (Eigen::Index b = 0; b < n_out; ++b) {
      std::complex<Scalar> acc(0);
      for (Eigen::Index t : traced_off) acc += m(kept_off[a] + t, kept_off[b] + t);
      out(a, b) = acc;
    }
  return out;
}

/// W m W† where W moves subsystem j to slot perm[j].
template <typename Derived>
CMatrix<typename Derived::RealScalar> permute_subsystems(const Eigen::MatrixBase<Derived>& m,
                                                         const SubsystemDims& dims, const std::vector<int>& perm) {
  using Scalar = typename Derived::RealScalar;
  if (m.rows() != m.cols() || m.rows() != dims.total())
    throw std::invalid_argument("permute_subsystems: matrix dimension does not match subsystem dims");
  const auto map = detail::permutation_index_map(dims, perm);
  const Eigen::Index n = m.rows();
  CMatrix<Scalar> out(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(map[r], map[c]) = m(r, c);
  return out;
}

/// Unitary representation W(π) of a permutation of k copies of a d-dimensional
/// factor: W(π)|x_1..x_k> = |y> with y_{π(j)} = x_j, so W(π₁)W(π₂) = W(π₁∘π₂).
template <typename Scalar = double>
CMatrix<Scalar> permutation_operator(int d, int k, const std::vector<int>& perm) {
  const SubsystemDims dims(std::vector<int>(static_cast<std::size_t>(k), d));
  const auto map = detail::permutation_index_map(dims, perm);
  const Eigen::Index n = dims.total();
  CMatrix<Scalar> w = CMatrix<Scalar>::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) w(map[r], r) = Scalar(1);
  return w;
}

template <typename Scalar>
struct EigenDecomposition {
  RVector<Scalar> eigenvalues;   // ascending
  CMatrix<Scalar> eigenvectors;  // columns, unitary
};

/// Cyclic Jacobi with complex rotations. Accepts any Hermitian matrix (within
/// the hermiticity tolerance); eigenvalues are returned in ascending order.
template <typename Derived>
EigenDecomposition<typename Derived::RealScalar> eig_hermitian(const Eigen::MatrixBase<Derived>& h,
                                                              const Tolerances& tol = default_tolerances) {
  using Scalar = typename Derived::RealScalar;
  using Complex = std::complex<Scalar>;
  if (h.rows() != h.cols()) throw std::invalid_argument("eig_hermitian: matrix is not square");
  const Scalar scale = std::max(Scalar(1), static_cast<Scalar>(max_abs_entry(h)));
  if (max_abs_entry(h - h.adjoint()) > tol.hermiticity * scale)
    throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");

  const Eigen::Index n = h.rows();
  CMatrix<Scalar> a = hermitize(h);
  CMatrix<Scalar> v = CMatrix<Scalar>::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = Complex(std::real(a(i, i)), 0);

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar frob = std::max(a.norm(), std::numeric_limits<Scalar>::min());
  constexpr int max_sweeps = 100;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(Scalar(2) * off) <= eps * frob) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const Scalar mag = std::abs(apq);
        if (mag == Scalar(0)) continue;
        const Scalar app = std::real(a(p, p));
        const Scalar aqq = std::real(a(q, q));
        const Complex w = apq / mag;
        const Scalar theta = (aqq - app) / (Scalar(2) * mag);
        Scalar t = Scalar(1) / (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        if (theta < 0) t = -t;
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        const Complex sw = s * w;
        const Complex swc = s * std::conj(w);

        // a <- a J with J(p,p)=J(q,q)=c, J(p,q)=s w, J(q,p)=-s conj(w).
        for (Eigen::Index i = 0; i < n; ++i) {
          const Complex aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - swc * aiq;
          a(i, q) = sw * aip + c * aiq;
        }
        // a <- J† a.
        for (Eigen::Index j = 0; j < n; ++j) {
          const Complex apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - sw * aqj;
          a(q, j) = swc * apj + c * aqj;
        }
        a(p, p) = Complex(app - t * mag, 0);
        a(q, q) = Complex(aqq + t * mag, 0);
        a(p, q) = a(q, p) = Complex(0);
        for (Eigen::Index i = 0; i < n; ++i) {
          const Complex vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - swc * viq;
          v(i, q) = sw * vip + c * viq;
        }
      }
    }
  }
  if (sweep == max_sweeps) throw NumericalError("eig_hermitian: Jacobi sweeps did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return std::real(a(x, x)) < std::real(a(y, y)); });
  EigenDecomposition<Scalar> out{RVector<Scalar>(n), CMatrix<Scalar>(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = std::real(a(order[i], order[i]));
    out.eigenvectors.col(i) = v.col(order[i]);
  }
  return out;
}

/// V f(Λ) V† for a real function applied to the spectrum.
template <typename Scalar, typename F>
CMatrix<Scalar> spectral_map(const EigenDecomposition<Scalar>& e, F&& f) {
  RVector<Scalar> mapped = e.eigenvalues.unaryExpr(f);
  return hermitize(e.eigenvectors * mapped.asDiagonal() * e.eigenvectors.adjoint());
}

/// Frobenius-nearest positive semidefinite matrix: negative eigenvalues clamped to zero.
template <typename Derived>
CMatrix<typename Derived::RealScalar> psd_project(const Eigen::MatrixBase<Derived>& h,
                                                  const Tolerances& tol = default_tolerances) {
  using Scalar = typename Derived::RealScalar;
  return spectral_map(eig_hermitian(h, tol), [](Scalar x) { return std::max(x, Scalar(0)); });
}

/// Frobenius norm of the negative part, i.e. ‖h − psd_project(h)‖_F.
template <typename Scalar>
Scalar negative_part_norm(const EigenDecomposition<Scalar>& e) {
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i)
    if (e.eigenvalues(i) < 0) acc += e.eigenvalues(i) * e.eigenvalues(i);
  return std::sqrt(acc);
}

/// Projector |ψ><ψ|.
template <typename Derived>
CMatrix<typename Derived::RealScalar> projector(const Eigen::MatrixBase<Derived>& psi) {
  return psi * psi.adjoint();
}

}  // namespace unext
