#pragma once

// Dense linear algebra over spin spaces of at most three qubits.
//
// Conventions used throughout the library:
//   * |0> is spin-up (sigma_z = +1), |1> is spin-down.
//   * Labels are stored leftmost first; the leftmost label is the most
//     significant bit of the amplitude index. |0>_2 |0>_1 |1>_0 with labels
//     {"P2", "P1", "P0"} is amplitude index 0b001.
//   * A "qubit index" is the bit position in the amplitude index, so qubit 0
//     is the rightmost label. Use SpinState::qubit_index(label) to translate.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spinscatter/errors.hpp"
#include "spinscatter/tolerances.hpp"

namespace spinscatter {

using complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr int max_qubits = 3;

namespace detail {

inline int qubits_for_dim(Eigen::Index dim) {
  switch (dim) {
    case 2: return 1;
    case 4: return 2;
    case 8: return 3;
    default: return -1;
  }
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.adjoint()) <= tol * scale;
}

// Sorted (descending), deduplicated copy of a qubit index set, validated
// against the register width.
inline std::vector<int> normalize_qubit_set(std::span<const int> qubits, int num_qubits,
                                            std::string_view what) {
  std::vector<int> out(qubits.begin(), qubits.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw InputError(std::string(what) + ": repeated qubit index");
  for (int q : out)
    if (q < 0 || q >= num_qubits)
      throw InputError(std::string(what) + ": qubit index " + std::to_string(q) + " out of range");
  return out;
}

inline std::vector<int> complement(const std::vector<int>& kept, int num_qubits) {
  std::vector<int> out;
  for (int q = num_qubits - 1; q >= 0; --q)
    if (std::find(kept.begin(), kept.end(), q) == kept.end()) out.push_back(q);
  return out;
}

// Scatter the bits of `local` (MSB first over `qubits`) into a full index.
inline std::size_t scatter_bits(std::size_t local, const std::vector<int>& qubits) {
  std::size_t idx = 0;
  const std::size_t n = qubits.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bit = (local >> (n - 1 - i)) & 1u;
    idx |= bit << qubits[i];
  }
  return idx;
}

}  // namespace detail

/// Unit vector on the Bloch sphere; measurement and impurity direction.
class Axis {
 public:
  Axis(double x, double y, double z) : n_(x, y, z) {
    if (!n_.allFinite()) throw InputError("axis: non-finite component");
    if (n_.norm() == 0.0) throw InputError("axis: zero vector");
    if (std::abs(n_.norm() - 1.0) > tolerances.axis_norm)
      throw InputError("axis: not normalized");
  }

  static Axis normalized(double x, double y, double z) {
    Eigen::Vector3d v(x, y, z);
    if (!v.allFinite()) throw InputError("axis: non-finite component");
    const double len = v.norm();
    if (len == 0.0) throw InputError("axis: zero vector");
    return Axis(x / len, y / len, z / len);
  }

  static Axis spherical(double theta, double phi) {
    return Axis(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  }

  static Axis x_axis() { return {1.0, 0.0, 0.0}; }
  static Axis y_axis() { return {0.0, 1.0, 0.0}; }
  static Axis z_axis() { return {0.0, 0.0, 1.0}; }

  double x() const { return n_.x(); }
  double y() const { return n_.y(); }
  double z() const { return n_.z(); }
  const Eigen::Vector3d& vector() const { return n_; }

  /// n . sigma as a 2x2 matrix.
  ComplexMatrix dot_sigma() const {
    ComplexMatrix m(2, 2);
    m << complex(n_.z(), 0.0), complex(n_.x(), -n_.y()),
         complex(n_.x(), n_.y()), complex(-n_.z(), 0.0);
    return m;
  }

 private:
  Eigen::Vector3d n_;
};

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, complex(0.0, -1.0), complex(0.0, 1.0), 0.0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

/// Pure (possibly unnormalized) state of 1..3 qubits.
class SpinState {
 public:
  SpinState(ComplexVector amplitudes, std::vector<std::string> labels = {})
      : amplitudes_(std::move(amplitudes)), labels_(std::move(labels)) {
    num_qubits_ = detail::qubits_for_dim(amplitudes_.size());
    if (num_qubits_ < 1)
      throw InputError("state: amplitude count " + std::to_string(amplitudes_.size()) +
                       " is not 2, 4 or 8");
    if (!amplitudes_.allFinite()) throw InputError("state: non-finite amplitude");
    if (labels_.empty()) {
      for (int q = num_qubits_ - 1; q >= 0; --q) labels_.push_back("q" + std::to_string(q));
    }
    if (static_cast<int>(labels_.size()) != num_qubits_)
      throw InputError("state: label count does not match qubit count");
    normalized_ = std::abs(amplitudes_.squaredNorm() - 1.0) < tolerances.normalization;
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  complex amplitude(Eigen::Index i) const { return amplitudes_(i); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool normalized() const { return normalized_; }
  double norm_squared() const { return amplitudes_.squaredNorm(); }

  int qubit_index(std::string_view label) const {
    for (std::size_t p = 0; p < labels_.size(); ++p)
      if (labels_[p] == label) return num_qubits_ - 1 - static_cast<int>(p);
    throw InputError("state: no qubit labelled '" + std::string(label) + "'");
  }

  const std::string& label_of(int qubit) const {
    if (qubit < 0 || qubit >= num_qubits_) throw InputError("state: qubit index out of range");
    return labels_[static_cast<std::size_t>(num_qubits_ - 1 - qubit)];
  }

 private:
  ComplexVector amplitudes_;
  std::vector<std::string> labels_;
  int num_qubits_ = 0;
  bool normalized_ = false;
};

/// Square operator on 1..3 qubits.
class SpinOperator {
 public:
  explicit SpinOperator(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InputError("operator: not square");
    if (detail::qubits_for_dim(m_.rows()) < 1)
      throw InputError("operator: dimension " + std::to_string(m_.rows()) + " is not 2, 4 or 8");
    if (!m_.allFinite()) throw InputError("operator: non-finite entry");
  }

  static SpinOperator identity(Eigen::Index dim) { return SpinOperator(ComplexMatrix::Identity(dim, dim)); }
  static SpinOperator zero(Eigen::Index dim) { return SpinOperator(ComplexMatrix::Zero(dim, dim)); }

  Eigen::Index dim() const { return m_.rows(); }
  int num_qubits() const { return detail::qubits_for_dim(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  bool is_hermitian(double tol = tolerances.hermiticity) const { return detail::is_hermitian(m_, tol); }
  SpinOperator adjoint() const { return SpinOperator(m_.adjoint()); }

  friend SpinOperator operator*(const SpinOperator& a, const SpinOperator& b) {
    if (a.dim() != b.dim()) throw InputError("operator product: dimension mismatch");
    return SpinOperator(a.m_ * b.m_);
  }

 private:
  ComplexMatrix m_;
};

/// Hermitian, positive semidefinite matrix with positive real trace.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || detail::qubits_for_dim(m_.rows()) < 1)
      throw InputError("density matrix: dimension must be 2, 4 or 8");
    if (!m_.allFinite()) throw InputError("density matrix: non-finite entry");
    if (!detail::is_hermitian(m_, tolerances.hermiticity))
      throw InputError("density matrix: not Hermitian");
    if (!(m_.trace().real() > 0.0)) throw InputError("density matrix: trace must be positive");
  }

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }

 private:
  ComplexMatrix m_;
};

inline SpinState make_state(std::span<const complex> amplitudes, std::vector<std::string> labels = {}) {
  ComplexVector v(static_cast<Eigen::Index>(amplitudes.size()));
  for (std::size_t i = 0; i < amplitudes.size(); ++i) v(static_cast<Eigen::Index>(i)) = amplitudes[i];
  return SpinState(std::move(v), std::move(labels));
}

inline SpinState make_state(std::initializer_list<complex> amplitudes, std::vector<std::string> labels = {}) {
  return make_state(std::span<const complex>(amplitudes.begin(), amplitudes.size()), std::move(labels));
}

/// Computational basis ket from a bit string, leftmost character = leftmost label.
inline SpinState basis_state(std::string_view bits, std::vector<std::string> labels = {}) {
  const int n = static_cast<int>(bits.size());
  if (n < 1 || n > max_qubits) throw InputError("basis state: need 1 to 3 bits");
  std::size_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw InputError("basis state: bits must be '0' or '1'");
    idx = (idx << 1) | static_cast<std::size_t>(c - '0');
  }
  ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << n);
  v(static_cast<Eigen::Index>(idx)) = 1.0;
  return SpinState(std::move(v), std::move(labels));
}

inline SpinState normalize(const SpinState& s) {
  const double n = std::sqrt(s.norm_squared());
  if (n == 0.0) throw InputError("normalize: zero state");
  return SpinState(s.amplitudes() / n, s.labels());
}

inline SpinState tensor(const SpinState& a, const SpinState& b) {
  if (a.num_qubits() + b.num_qubits() > max_qubits)
    throw InputError("tensor: combined register exceeds 3 qubits");
  ComplexVector v(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) v.segment(i * b.dim(), b.dim()) = a.amplitude(i) * b.amplitudes();
  std::vector<std::string> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return SpinState(std::move(v), std::move(labels));
}

inline SpinState apply(const SpinOperator& op, const SpinState& s) {
  if (op.dim() != s.dim()) throw InputError("apply: dimension mismatch");
  return SpinState(op.matrix() * s.amplitudes(), s.labels());
}

inline complex inner_product(const SpinState& a, const SpinState& b) {
  if (a.dim() != b.dim()) throw InputError("inner product: dimension mismatch");
  return a.amplitudes().dot(b.amplitudes());  // conjugates the first argument
}

/// |<a|b>|^2 / (<a|a><b|b>).
inline double fidelity(const SpinState& a, const SpinState& b) {
  const double na = a.norm_squared();
  const double nb = b.norm_squared();
  if (na == 0.0 || nb == 0.0) throw InputError("fidelity: zero state");
  return std::norm(inner_product(a, b)) / (na * nb);
}

/// Reduced density matrix of the kept qubits. Kept qubits keep their relative
/// significance; the reduced trace equals the squared norm of `s`.
inline DensityMatrix partial_trace(const SpinState& s, std::span<const int> keep) {
  const int n = s.num_qubits();
  const auto kept = detail::normalize_qubit_set(keep, n, "partial trace");
  if (kept.empty() || static_cast<int>(kept.size()) == n)
    throw InputError("partial trace: keep set must be a nonempty proper subset");
  const auto traced = detail::complement(kept, n);
  const std::size_t dk = std::size_t{1} << kept.size();
  const std::size_t dt = std::size_t{1} << traced.size();
  if (s.norm_squared() == 0.0) throw InputError("partial trace: zero state");

  ComplexMatrix rho = ComplexMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  const auto& psi = s.amplitudes();
  for (std::size_t r = 0; r < dk; ++r) {
    for (std::size_t c = 0; c < dk; ++c) {
      complex acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t) {
        const auto tb = detail::scatter_bits(t, traced);
        acc += psi(static_cast<Eigen::Index>(detail::scatter_bits(r, kept) | tb)) *
               std::conj(psi(static_cast<Eigen::Index>(detail::scatter_bits(c, kept) | tb)));
      }
      rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return DensityMatrix(std::move(rho));
}

inline DensityMatrix partial_trace(const SpinState& s, std::initializer_list<int> keep) {
  return partial_trace(s, std::span<const int>(keep.begin(), keep.size()));
}

struct HermitianEigensystem {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns, same order as values
};

inline HermitianEigensystem hermitian_eigensystem(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > 8)
    throw InputError("hermitian eigensolver: need a square matrix of dimension 1..8");
  if (!detail::is_hermitian(m, tolerances.hermiticity))
    throw InputError("hermitian eigensolver: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw InternalFault("hermitian eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return {std::vector<double>(ev.data(), ev.data() + ev.size()), solver.eigenvectors()};
}

inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
  return hermitian_eigensystem(m).values;
}

inline std::vector<double> hermitian_eigenvalues(const DensityMatrix& rho) {
  return hermitian_eigenvalues(rho.matrix());
}

/// -sum p log2 p over the spectrum, in bits. Requires unit trace.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  if (std::abs(rho.trace() - 1.0) > tolerances.normalization)
    throw InputError("entropy: density matrix trace is not 1");
  double h = 0.0;
  for (double p : hermitian_eigenvalues(rho)) {
    if (p < -tolerances.eigenvalue_clip) throw InputError("entropy: negative eigenvalue");
    if (p <= 0.0) continue;
    h -= p * std::log2(p);
  }
  const double hmax = std::log2(static_cast<double>(rho.dim()));
  return std::clamp(h, 0.0, hmax);
}

/// Entropy of the kept qubits for the normalized version of a pure state.
inline double entanglement_entropy(const SpinState& s, std::span<const int> keep) {
  return von_neumann_entropy(partial_trace(normalize(s), keep));
}

inline double entanglement_entropy(const SpinState& s, std::initializer_list<int> keep) {
  return entanglement_entropy(s, std::span<const int>(keep.begin(), keep.size()));
}

/// 2|c00 c11 - c01 c10| for a normalized two-qubit state.
inline double concurrence(const SpinState& s) {
  if (s.num_qubits() != 2) throw InputError("concurrence: state must have exactly two qubits");
  if (!s.normalized()) throw InputError("concurrence: state is not normalized");
  const auto& c = s.amplitudes();
  return std::min(1.0, 2.0 * std::abs(c(0) * c(3) - c(1) * c(2)));
}

/// Schmidt coefficients across `subsystem | rest`, descending.
inline std::vector<double> schmidt_coefficients(const SpinState& s, std::span<const int> subsystem) {
  const int n = s.num_qubits();
  const auto a = detail::normalize_qubit_set(subsystem, n, "schmidt");
  if (a.empty() || static_cast<int>(a.size()) == n)
    throw InputError("schmidt: bipartition must be a nonempty proper subset");
  if (!s.normalized()) throw InputError("schmidt: state is not normalized");
  const auto b = detail::complement(a, n);
  const std::size_t da = std::size_t{1} << a.size();
  const std::size_t db = std::size_t{1} << b.size();
  ComplexMatrix psi(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(db));
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < db; ++j)
      psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          s.amplitude(static_cast<Eigen::Index>(detail::scatter_bits(i, a) | detail::scatter_bits(j, b)));
  Eigen::JacobiSVD<ComplexMatrix> svd(psi);
  const auto& sv = svd.singularValues();
  std::vector<double> out(sv.data(), sv.data() + sv.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline std::vector<double> schmidt_coefficients(const SpinState& s, std::initializer_list<int> subsystem) {
  return schmidt_coefficients(s, std::span<const int>(subsystem.begin(), subsystem.size()));
}

enum class Outcome { plus, minus };

struct Projection {
  SpinState state;     // unnormalized post-measurement state
  double probability;  // relative to the squared norm of the input
};

/// Projects one qubit onto the +/- eigenspace of n . sigma. For the z axis,
/// Outcome::plus is |0>.
inline Projection project(const SpinState& s, int qubit, const Axis& axis, Outcome outcome) {
  if (qubit < 0 || qubit >= s.num_qubits()) throw InputError("project: qubit index out of range");
  const double total = s.norm_squared();
  if (total == 0.0) throw InputError("project: zero state");
  const double sign = outcome == Outcome::plus ? 1.0 : -1.0;
  const ComplexMatrix p = 0.5 * (ComplexMatrix::Identity(2, 2) + sign * axis.dot_sigma());
  const std::size_t mask = std::size_t{1} << qubit;
  const auto& psi = s.amplitudes();
  ComplexVector out(psi.size());
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i) {
    if (i & mask) continue;
    const auto i0 = static_cast<Eigen::Index>(i);
    const auto i1 = static_cast<Eigen::Index>(i | mask);
    out(i0) = p(0, 0) * psi(i0) + p(0, 1) * psi(i1);
    out(i1) = p(1, 0) * psi(i0) + p(1, 1) * psi(i1);
  }
  SpinState post(std::move(out), s.labels());
  const double prob = post.norm_squared() / total;
  return {std::move(post), prob};
}

/// Drops one qubit by keeping only the amplitudes where it equals `bit`.
/// Used after a z-basis measurement to read off the remaining register.
inline SpinState condition_on(const SpinState& s, int qubit, int bit) {
  if (s.num_qubits() < 2) throw InputError("condition: need at least two qubits");
  if (qubit < 0 || qubit >= s.num_qubits()) throw InputError("condition: qubit index out of range");
  if (bit != 0 && bit != 1) throw InputError("condition: bit must be 0 or 1");
  const std::size_t low_mask = (std::size_t{1} << qubit) - 1;
  ComplexVector v(s.dim() / 2);
  for (std::size_t r = 0; r < static_cast<std::size_t>(v.size()); ++r) {
    const std::size_t full = ((r & ~low_mask) << 1) | (static_cast<std::size_t>(bit) << qubit) | (r & low_mask);
    v(static_cast<Eigen::Index>(r)) = s.amplitude(static_cast<Eigen::Index>(full));
  }
  std::vector<std::string> labels = s.labels();
  labels.erase(labels.begin() + (s.num_qubits() - 1 - qubit));
  return SpinState(std::move(v), std::move(labels));
}

}  // namespace spinscatter
