#pragma once

// Named bipartite states and qubit channels: maximally entangled, isotropic,
// Bell-diagonal, depolarizing Choi and erasure outputs, plus fidelity and the
// action of local channels given by Kraus operators.

#include "unext/linalg.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace unext {

/// Unit-trace PSD matrix with a declared tensor factorization.
template <typename Scalar>
class DensityMatrix {
 public:
  DensityMatrix(CMatrix<Scalar> m, SubsystemDims dims, const Tolerances& tol = default_tolerances)
      : matrix_(std::move(m)), dims_(std::move(dims)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() != dims_.total())
      throw std::invalid_argument("DensityMatrix: matrix size does not match subsystem dims");
    if (!is_hermitian(matrix_, tol.hermiticity)) throw std::invalid_argument("DensityMatrix: not Hermitian");
    matrix_ = hermitize(matrix_);
    if (std::abs(matrix_.trace() - std::complex<Scalar>(1)) > tol.trace)
      throw std::invalid_argument("DensityMatrix: trace is not 1");
    // Cholesky of m + tol·I succeeds iff every eigenvalue exceeds -tol.
    const CMatrix<Scalar> shifted =
        matrix_ + Scalar(tol.psd) * CMatrix<Scalar>::Identity(matrix_.rows(), matrix_.cols());
    if (Eigen::LLT<CMatrix<Scalar>>(shifted).info() != Eigen::Success)
      throw std::invalid_argument("DensityMatrix: not positive semidefinite");
  }

  const CMatrix<Scalar>& matrix() const { return matrix_; }
  const SubsystemDims& dims() const { return dims_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  /// Marginal on the listed subsystems.
  DensityMatrix reduce(std::vector<int> keep) const {
    std::sort(keep.begin(), keep.end());
    std::vector<int> out_dims;
    for (int k : keep) out_dims.push_back(dims_[static_cast<std::size_t>(k)]);
    return DensityMatrix(partial_trace(matrix_, dims_, keep), SubsystemDims(out_dims));
  }

 private:
  CMatrix<Scalar> matrix_;
  SubsystemDims dims_;
};

using DensityMatrixd = DensityMatrix<double>;

enum class ChannelKind { Depolarizing, Erasure };

struct ChannelSpec {
  ChannelKind kind;
  double p;

  ChannelSpec(ChannelKind k, double prob) : kind(k), p(prob) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ChannelSpec: p must lie in [0,1]");
  }
};

namespace detail {

inline void require_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(what) + ": parameter must lie in [0,1]");
}

}  // namespace detail

/// (|00>+|11>+...)/sqrt(d) as a vector on dims [d, d].
template <typename Scalar = double>
CVector<Scalar> max_entangled_vector(int d) {
  if (d < 1) throw std::invalid_argument("max_entangled_vector: d must be >= 1");
  CVector<Scalar> v = CVector<Scalar>::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = Scalar(1) / std::sqrt(Scalar(d));
  return v;
}

template <typename Scalar = double>
DensityMatrix<Scalar> max_entangled(int m) {
  if (m < 1) throw std::invalid_argument("max_entangled: Schmidt rank must be >= 1");
  return DensityMatrix<Scalar>(projector(max_entangled_vector<Scalar>(m)), SubsystemDims{m, m});
}

/// t·Φ_d + (1−t)(I−Φ_d)/(d²−1).
template <typename Scalar = double>
DensityMatrix<Scalar> isotropic(Scalar t, int d) {
  detail::require_probability(static_cast<double>(t), "isotropic");
  if (d < 2) throw std::invalid_argument("isotropic: d must be >= 2");
  const auto n = static_cast<Eigen::Index>(d) * d;
  const CMatrix<Scalar> phi = projector(max_entangled_vector<Scalar>(d));
  const CMatrix<Scalar> rest = CMatrix<Scalar>::Identity(n, n) - phi;
  return DensityMatrix<Scalar>(t * phi + (Scalar(1) - t) / Scalar(n - 1) * rest, SubsystemDims{d, d});
}

/// Bell vectors in the order Φ+, Φ−, Ψ+, Ψ−.
template <typename Scalar = double>
std::array<CVector<Scalar>, 4> bell_vectors() {
  const Scalar h = Scalar(1) / std::sqrt(Scalar(2));
  std::array<CVector<Scalar>, 4> out;
  for (auto& v : out) v = CVector<Scalar>::Zero(4);
  out[0](0) = h, out[0](3) = h;
  out[1](0) = h, out[1](3) = -h;
  out[2](1) = h, out[2](2) = h;
  out[3](1) = h, out[3](2) = -h;
  return out;
}

/// Σ λ_i |β_i><β_i| over the Bell basis (Φ+, Φ−, Ψ+, Ψ−).
template <typename Scalar = double>
DensityMatrix<Scalar> bell_diagonal(const std::array<Scalar, 4>& spectrum) {
  Scalar total = 0;
  for (Scalar x : spectrum) {
    if (x < Scalar(0)) throw std::invalid_argument("bell_diagonal: negative weight");
    total += x;
  }
  if (std::abs(total - Scalar(1)) > Scalar(1e-12)) throw std::invalid_argument("bell_diagonal: weights must sum to 1");
  const auto bell = bell_vectors<Scalar>();
  CMatrix<Scalar> m = CMatrix<Scalar>::Zero(4, 4);
  for (int i = 0; i < 4; ++i) m += spectrum[i] * projector(bell[i]);
  return DensityMatrix<Scalar>(m, SubsystemDims{2, 2});
}

/// (id ⊗ D^p)(Φ₂): Bell spectrum (1−p, p/3, p/3, p/3).
template <typename Scalar = double>
DensityMatrix<Scalar> depolarizing_choi(Scalar p) {
  detail::require_probability(static_cast<double>(p), "depolarizing_choi");
  const Scalar q = p / Scalar(3);
  return bell_diagonal<Scalar>({Scalar(1) - p, q, q, q});
}

/// (1−q)Φ + q(I_A/2 ⊗ |e><e|) on dims [2,3]; the flag |e> is the third basis vector of B.
template <typename Scalar = double>
DensityMatrix<Scalar> erasure_family(Scalar q) {
  detail::require_probability(static_cast<double>(q), "erasure_family");
  CVector<Scalar> phi = CVector<Scalar>::Zero(6);
  phi(0) = phi(4) = Scalar(1) / std::sqrt(Scalar(2));
  CMatrix<Scalar> flag = CMatrix<Scalar>::Zero(3, 3);
  flag(2, 2) = Scalar(1);
  const CMatrix<Scalar> erased = kron(CMatrix<Scalar>(CMatrix<Scalar>::Identity(2, 2) / Scalar(2)), flag);
  return DensityMatrix<Scalar>((Scalar(1) - q) * projector(phi) + q * erased, SubsystemDims{2, 3});
}

// Qubit channels as Kraus operator lists.

template <typename Scalar = double>
std::array<CMatrix<Scalar>, 4> pauli_matrices() {
  using C = std::complex<Scalar>;
  std::array<CMatrix<Scalar>, 4> s;
  for (auto& m : s) m = CMatrix<Scalar>::Zero(2, 2);
  s[0](0, 0) = s[0](1, 1) = C(1);
  s[1](0, 1) = s[1](1, 0) = C(1);
  s[2](0, 1) = C(0, -1), s[2](1, 0) = C(0, 1);
  s[3](0, 0) = C(1), s[3](1, 1) = C(-1);
  return s;
}

/// ρ ↦ (1−p)ρ + (p/3)(XρX + YρY + ZρZ).
template <typename Scalar = double>
std::vector<CMatrix<Scalar>> depolarizing_kraus(Scalar p) {
  detail::require_probability(static_cast<double>(p), "depolarizing_kraus");
  const auto s = pauli_matrices<Scalar>();
  return {std::sqrt(Scalar(1) - p) * s[0], std::sqrt(p / 3) * s[1], std::sqrt(p / 3) * s[2],
          std::sqrt(p / 3) * s[3]};
}

/// Qubit-to-qutrit erasure: ρ ↦ (1−p)ρ ⊕ p|e><e|.
template <typename Scalar = double>
std::vector<CMatrix<Scalar>> erasure_kraus(Scalar p) {
  detail::require_probability(static_cast<double>(p), "erasure_kraus");
  CMatrix<Scalar> keep = CMatrix<Scalar>::Zero(3, 2);
  keep(0, 0) = keep(1, 1) = std::sqrt(Scalar(1) - p);
  CMatrix<Scalar> e0 = CMatrix<Scalar>::Zero(3, 2), e1 = CMatrix<Scalar>::Zero(3, 2);
  e0(2, 0) = e1(2, 1) = std::sqrt(p);
  return {keep, e0, e1};
}

/// Extends a qubit channel to a qubit-plus-flag input, leaving |e> untouched.
template <typename Scalar = double>
std::vector<CMatrix<Scalar>> flag_preserving(const std::vector<CMatrix<Scalar>>& qubit_kraus) {
  std::vector<CMatrix<Scalar>> out;
  for (const auto& k : qubit_kraus) {
    if (k.rows() != 2 || k.cols() != 2) throw std::invalid_argument("flag_preserving: expects qubit-to-qubit Kraus operators");
    CMatrix<Scalar> ext = CMatrix<Scalar>::Zero(3, 3);
    ext.topLeftCorner(2, 2) = k;
    out.push_back(ext);
  }
  CMatrix<Scalar> flag = CMatrix<Scalar>::Zero(3, 3);
  flag(2, 2) = Scalar(1);
  out.push_back(flag);
  return out;
}

/// Applies a channel (Kraus operators of shape d_out × d_in) to one subsystem.
template <typename Scalar>
DensityMatrix<Scalar> apply_local_channel(const DensityMatrix<Scalar>& rho, const std::vector<CMatrix<Scalar>>& kraus,
                                          std::size_t subsystem) {
  if (kraus.empty()) throw std::invalid_argument("apply_local_channel: no Kraus operators");
  const auto& dims = rho.dims();
  if (subsystem >= dims.size()) throw std::invalid_argument("apply_local_channel: subsystem out of range");
  const int d_in = dims[subsystem];
  const auto d_out = static_cast<int>(kraus.front().rows());
  Eigen::Index left = 1, right = 1;
  for (std::size_t i = 0; i < subsystem; ++i) left *= dims[i];
  for (std::size_t i = subsystem + 1; i < dims.size(); ++i) right *= dims[i];
  std::vector<int> out_dims = dims.values();
  out_dims[subsystem] = d_out;

  CMatrix<Scalar> out = CMatrix<Scalar>::Zero(left * d_out * right, left * d_out * right);
  for (const auto& k : kraus) {
    if (k.cols() != d_in || k.rows() != d_out) throw std::invalid_argument("apply_local_channel: Kraus shape mismatch");
    const CMatrix<Scalar> full =
        kron(kron(CMatrix<Scalar>(CMatrix<Scalar>::Identity(left, left)), k), CMatrix<Scalar>(CMatrix<Scalar>::Identity(right, right)));
    out += full * rho.matrix() * full.adjoint();
  }
  return DensityMatrix<Scalar>(out, SubsystemDims(out_dims));
}

/// (id ⊗ E^p)(Φ₂) built from the erasure Kraus operators.
template <typename Scalar = double>
DensityMatrix<Scalar> erasure_output(Scalar p) {
  return apply_local_channel(max_entangled<Scalar>(2), erasure_kraus<Scalar>(p), 1);
}

template <typename Scalar>
DensityMatrix<Scalar> tensor(const DensityMatrix<Scalar>& a, const DensityMatrix<Scalar>& b) {
  std::vector<int> dims = a.dims().values();
  dims.insert(dims.end(), b.dims().values().begin(), b.dims().values().end());
  return DensityMatrix<Scalar>(kron(a.matrix(), b.matrix()), SubsystemDims(dims));
}

template <typename Scalar>
DensityMatrix<Scalar> tensor_power(const DensityMatrix<Scalar>& a, int n) {
  if (n < 1) throw std::invalid_argument("tensor_power: n must be >= 1");
  DensityMatrix<Scalar> out = a;
  for (int i = 1; i < n; ++i) out = tensor(out, a);
  return out;
}

/// F(ρ,σ) = ‖√ρ √σ‖₁², evaluated as (Tr √(√ρ σ √ρ))².
template <typename Scalar>
Scalar fidelity(const DensityMatrix<Scalar>& rho, const DensityMatrix<Scalar>& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const CMatrix<Scalar> sqrt_rho =
      spectral_map(eig_hermitian(rho.matrix()), [](Scalar x) { return std::sqrt(std::max(x, Scalar(0))); });
  const CMatrix<Scalar> inner = hermitize(sqrt_rho * sigma.matrix() * sqrt_rho);
  const auto e = eig_hermitian(inner);
  Scalar root_sum = 0;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) root_sum += std::sqrt(std::max(e.eigenvalues(i), Scalar(0)));
  return std::clamp(root_sum * root_sum, Scalar(0), Scalar(1));
}

/// <Φ_d|ρ|Φ_d> for ρ on dims [d, d].
template <typename Scalar>
Scalar entanglement_fidelity(const DensityMatrix<Scalar>& rho) {
  const auto& dims = rho.dims();
  if (dims.size() != 2 || dims[0] != dims[1]) throw std::invalid_argument("entanglement_fidelity: needs dims [d, d]");
  const CVector<Scalar> phi = max_entangled_vector<Scalar>(dims[0]);
  return std::real(phi.dot(rho.matrix() * phi));
}

}  // namespace unext
