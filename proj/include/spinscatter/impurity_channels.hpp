#pragma once

// Channel operators for the two impurity kinds:
//
//   fixed impurity   r delta(x) (1 - n.sigma)      spin filter, dim 2
//   Kondo impurity   r delta(x) sigma_1 . sigma_0  exchange scatterer, dim 4
//
// The Kondo channel is built in the exchange eigenbasis
//   |l1> = |00>, |l2> = |11>, |l3> = (|01> + |10>)/sqrt2, |l4> = (|01> - |10>)/sqrt2
// with one scalar amplitude S_i = 1 / (1 + i r l_i / k) per eigenstate. On the
// computational basis this gives
//   |01> -> (S3+S4)/2 |01> + (S3-S4)/2 |10>
//   |10> -> (S3-S4)/2 |01> + (S3+S4)/2 |10>
// The sign on the last term is +; it reduces to the identity at r = 0.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>

#include "spinscatter/errors.hpp"
#include "spinscatter/scattering.hpp"
#include "spinscatter/spin_hilbert.hpp"

namespace spinscatter {

struct KondoEigenvalues {
  double l1 = 1.0;
  double l2 = 1.0;
  double l3 = -2.0;
  double l4 = 0.0;

  /// Default set: (1, 1, -2, 0).
  static KondoEigenvalues paper() { return {1.0, 1.0, -2.0, 0.0}; }
  /// Spectrum of sigma_1 . sigma_0: triplet +1, singlet -3.
  static KondoEigenvalues standard_pauli() { return {1.0, 1.0, 1.0, -3.0}; }

  static KondoEigenvalues from_preset(std::string_view name) {
    if (name == "paper") return paper();
    if (name == "standard-pauli") return standard_pauli();
    throw InputError("unknown eigenvalue preset '" + std::string(name) + "' (expected paper or standard-pauli)");
  }

  std::array<double, 4> as_array() const { return {l1, l2, l3, l4}; }

  void validate() const {
    for (double l : as_array())
      if (!std::isfinite(l)) throw InputError("Kondo eigenvalues must be finite");
  }
};

struct ExchangeEigenbasis {
  std::array<SpinState, 4> states;
  std::array<double, 4> eigenvalues;

  /// sum_i l_i |l_i><l_i|
  SpinOperator spectral_sum(std::span<const complex, 4> weights) const {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& v = states[i].amplitudes();
      m += weights[i] * (v * v.adjoint());
    }
    return SpinOperator(std::move(m));
  }
};

inline ExchangeEigenbasis exchange_eigenbasis(const KondoEigenvalues& ev) {
  ev.validate();
  const double h = 1.0 / std::numbers::sqrt2;
  const std::vector<std::string> labels{"particle", "impurity"};
  return {{make_state({1.0, 0.0, 0.0, 0.0}, labels),
           make_state({0.0, 0.0, 0.0, 1.0}, labels),
           make_state({0.0, h, h, 0.0}, labels),
           make_state({0.0, h, -h, 0.0}, labels)},
          ev.as_array()};
}

struct FixedImpuritySpec {
  Coupling r{0.0};
  Axis axis = Axis::z_axis();
};

/// r (I - n.sigma): zero along +n, 2r along -n.
inline SpinOperator fixed_potential(const FixedImpuritySpec& spec) {
  return SpinOperator(spec.r.value() * (ComplexMatrix::Identity(2, 2) - spec.axis.dot_sigma()));
}

/// T = P+ + S P-, with P+- the projectors onto +-n and S at xi = 2r/k.
inline OperatorAmplitudes fixed_filter_operators(const FixedImpuritySpec& spec, WaveNumber k) {
  const complex s = scalar_amplitudes(Coupling(2.0 * spec.r.value()), k).S;
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix ns = spec.axis.dot_sigma();
  const ComplexMatrix p_plus = 0.5 * (id + ns);
  const ComplexMatrix p_minus = 0.5 * (id - ns);
  ComplexMatrix t = p_plus + s * p_minus;
  ComplexMatrix r = (s - 1.0) * p_minus;
  return {SpinOperator(std::move(t)), SpinOperator(std::move(r))};
}

struct KondoImpuritySpec {
  Coupling r{0.0};
  KondoEigenvalues eigenvalues = KondoEigenvalues::paper();
};

/// Per-channel transmission amplitudes S_1..S_4.
struct KondoChannelAmplitudes {
  std::array<complex, 4> S;

  complex symmetric() const { return 0.5 * (S[2] + S[3]); }      // (S3 + S4) / 2
  complex antisymmetric() const { return 0.5 * (S[2] - S[3]); }  // (S3 - S4) / 2
};

inline KondoChannelAmplitudes kondo_channel_amplitudes(const KondoImpuritySpec& spec, WaveNumber k) {
  spec.eigenvalues.validate();
  KondoChannelAmplitudes out{};
  const auto ev = spec.eigenvalues.as_array();
  for (std::size_t i = 0; i < 4; ++i) out.S[i] = scalar_amplitudes(Coupling(spec.r.value() * ev[i]), k).S;
  return out;
}

/// r sum_i l_i |l_i><l_i| on (particle, impurity).
inline SpinOperator exchange_potential(const KondoImpuritySpec& spec) {
  const auto basis = exchange_eigenbasis(spec.eigenvalues);
  std::array<complex, 4> w{};
  for (std::size_t i = 0; i < 4; ++i) w[i] = spec.r.value() * basis.eigenvalues[i];
  return basis.spectral_sum(w);
}

inline OperatorAmplitudes kondo_operators(const KondoImpuritySpec& spec, WaveNumber k) {
  const auto basis = exchange_eigenbasis(spec.eigenvalues);
  const auto amps = kondo_channel_amplitudes(spec, k);
  std::array<complex, 4> reflect{};
  for (std::size_t i = 0; i < 4; ++i) reflect[i] = amps.S[i] - 1.0;
  return {basis.spectral_sum(amps.S), basis.spectral_sum(reflect)};
}

/// Lifts `op` onto `targets` of a `total_qubits` register, identity elsewhere.
/// targets[0] carries the operator's most significant bit.
inline SpinOperator embed(const SpinOperator& op, int total_qubits, std::span<const int> targets) {
  if (total_qubits < 1 || total_qubits > max_qubits) throw InputError("embed: register must have 1 to 3 qubits");
  const std::vector<int> tq(targets.begin(), targets.end());
  detail::normalize_qubit_set(targets, total_qubits, "embed");
  if (op.dim() != (Eigen::Index{1} << tq.size())) throw InputError("embed: operator dimension does not match target count");

  std::vector<int> sorted(tq);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto rest = detail::complement(sorted, total_qubits);
  const std::size_t dt = std::size_t{1} << tq.size();
  const std::size_t dr = std::size_t{1} << rest.size();
  const Eigen::Index dim = Eigen::Index{1} << total_qubits;

  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t e = 0; e < dr; ++e) {
    const std::size_t eb = detail::scatter_bits(e, rest);
    for (std::size_t r = 0; r < dt; ++r)
      for (std::size_t c = 0; c < dt; ++c)
        m(static_cast<Eigen::Index>(detail::scatter_bits(r, tq) | eb),
          static_cast<Eigen::Index>(detail::scatter_bits(c, tq) | eb)) =
            op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return SpinOperator(std::move(m));
}

inline SpinOperator embed(const SpinOperator& op, int total_qubits, std::initializer_list<int> targets) {
  return embed(op, total_qubits, std::span<const int>(targets.begin(), targets.size()));
}

inline OperatorAmplitudes embed(const OperatorAmplitudes& amps, int total_qubits, std::span<const int> targets) {
  return {embed(amps.T, total_qubits, targets), embed(amps.R, total_qubits, targets)};
}

inline OperatorAmplitudes embed(const OperatorAmplitudes& amps, int total_qubits, std::initializer_list<int> targets) {
  return embed(amps, total_qubits, std::span<const int>(targets.begin(), targets.size()));
}

}  // namespace spinscatter
