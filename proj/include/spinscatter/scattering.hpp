#pragma once

// Plane-wave scattering off delta potentials, hbar = m = 1.
//
// With H = -1/2 d^2/dx^2 + M delta(x - x0) the wave function is continuous at
// x0 and its derivative jumps by
//
//     psi'(x0+) - psi'(x0-) = 2 M psi(x0).
//
// The factor 2 comes from the 1/2 in the kinetic term. For a scalar strength g
// this gives S = 1 / (1 + i g / k) and R = S - 1.

#include <cmath>
#include <complex>
#include <span>
#include <string>

#include "spinscatter/errors.hpp"
#include "spinscatter/spin_hilbert.hpp"
#include "spinscatter/tolerances.hpp"

namespace spinscatter {

class WaveNumber {
 public:
  explicit WaveNumber(double k) : k_(k) {
    if (!std::isfinite(k)) throw InputError("k must be finite");
    if (!(k > 0.0)) throw InputError("k must be positive");
  }
  double value() const { return k_; }

 private:
  double k_;
};

/// Delta strength seen by one channel; negative values are attractive.
/// Bound states of attractive potentials are not modeled.
class Coupling {
 public:
  explicit Coupling(double g) : g_(g) {
    if (!std::isfinite(g)) throw InputError("coupling must be finite");
  }
  double value() const { return g_; }

 private:
  double g_;
};

struct ScalarAmplitudes {
  complex S;  // transmission
  complex R;  // reflection, always S - 1
  double xi;  // g / k
};

inline ScalarAmplitudes scalar_amplitudes(Coupling g, WaveNumber k) {
  const double xi = g.value() / k.value();
  const complex s = 1.0 / complex(1.0, xi);
  return {s, s - 1.0, xi};
}

/// Operator-valued transmission T and reflection R = T - I on spin space.
struct OperatorAmplitudes {
  SpinOperator T;
  SpinOperator R;

  Eigen::Index dim() const { return T.dim(); }
};

/// Solves (I + i M / k) T = I by dense LU. M must be Hermitian.
inline OperatorAmplitudes matrix_amplitudes(const SpinOperator& potential, WaveNumber k) {
  if (!potential.is_hermitian()) throw InputError("matrix amplitudes: potential is not Hermitian");
  const Eigen::Index n = potential.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix system = id + complex(0.0, 1.0 / k.value()) * potential.matrix();
  Eigen::FullPivLU<ComplexMatrix> lu(system);
  if (!lu.isInvertible()) throw InternalFault("matrix amplitudes: singular scattering system");
  ComplexMatrix t = lu.solve(id);
  ComplexMatrix r = t - id;
  return {SpinOperator(std::move(t)), SpinOperator(std::move(r))};
}

/// Two spin-dependent deltas at x = -a (M1) and x = +a (M2).
struct TwoImpurityGeometry {
  double half_separation;
  WaveNumber k;
  SpinOperator m1;
  SpinOperator m2;

  void validate() const {
    if (!std::isfinite(half_separation) || !(half_separation > 0.0))
      throw InputError("two-impurity geometry: half separation must be positive");
    if (m1.dim() != m2.dim()) throw InputError("two-impurity geometry: potential dimensions differ");
    if (!m1.is_hermitian() || !m2.is_hermitian())
      throw InputError("two-impurity geometry: potentials must be Hermitian");
  }
};

/// Exact outgoing amplitudes. Both operators refer to plane waves written as
/// e^{+ikx} (transmitted, x > a) and e^{-ikx} (reflected, x < -a), i.e. phases
/// are referenced to x = 0.
struct TwoImpurityAmplitudes {
  SpinOperator transmission;
  SpinOperator reflection;
};

/// Full multiple-scattering solution of the two-delta problem.
///
/// Unknown spinors (each of the potential's dimension d):
///   x < -a      : e^{ikx} chi + e^{-ikx} rho
///   -a < x < a  : e^{ikx} A   + e^{-ikx} B
///   x > a       : e^{ikx} tau
/// Continuity and the derivative jump at both deltas give 4d equations in
/// (rho, A, B, tau), solved for every incident basis spinor at once.
inline TwoImpurityAmplitudes two_impurity_exact(const TwoImpurityGeometry& geom) {
  geom.validate();
  const Eigen::Index d = geom.m1.dim();
  const double k = geom.k.value();
  const double a = geom.half_separation;
  const complex i1(0.0, 1.0);
  const complex ep = std::exp(i1 * k * a);
  const complex em = std::exp(-i1 * k * a);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  // Jump conditions divided by k so entries stay O(1) for any k.
  const ComplexMatrix v1 = 2.0 * geom.m1.matrix() / k;
  const ComplexMatrix v2 = 2.0 * geom.m2.matrix() / k;

  ComplexMatrix sys = ComplexMatrix::Zero(4 * d, 4 * d);
  ComplexMatrix rhs = ComplexMatrix::Zero(4 * d, d);
  auto blk = [&](Eigen::Index row, Eigen::Index col) { return sys.block(row * d, col * d, d, d); };

  // x = -a, continuity:  e rho - e^- A - e B = -e^- chi
  blk(0, 0) = ep * id;
  blk(0, 1) = -em * id;
  blk(0, 2) = -ep * id;
  rhs.block(0, 0, d, d) = -em * id;
  // x = -a, jump:  (i - V1) e rho + i e^- A - i e B = (i + V1) e^- chi
  blk(1, 0) = ep * (i1 * id - v1);
  blk(1, 1) = i1 * em * id;
  blk(1, 2) = -i1 * ep * id;
  rhs.block(d, 0, d, d) = em * (i1 * id + v1);
  // x = +a, continuity:  e A + e^- B - e tau = 0
  blk(2, 1) = ep * id;
  blk(2, 2) = em * id;
  blk(2, 3) = -ep * id;
  // x = +a, jump:  -i e A + i e^- B + (i - V2) e tau = 0
  blk(3, 1) = -i1 * ep * id;
  blk(3, 2) = i1 * em * id;
  blk(3, 3) = ep * (i1 * id - v2);

  Eigen::FullPivLU<ComplexMatrix> lu(sys);
  if (!lu.isInvertible()) throw InternalFault("two-impurity solve: singular matching system");
  const ComplexMatrix sol = lu.solve(rhs);
  const double residual = (sys * sol - rhs).cwiseAbs().maxCoeff();
  if (residual > tolerances.solver) throw InternalFault("two-impurity solve: residual above tolerance");

  return {SpinOperator(sol.block(3 * d, 0, d, d)), SpinOperator(sol.block(0, 0, d, d))};
}

struct ScatteredState {
  SpinState transmitted;
  SpinState reflected;
};

inline ScatteredState two_impurity_exact(const TwoImpurityGeometry& geom, const SpinState& incident) {
  if (incident.dim() != geom.m1.dim()) throw InputError("two-impurity solve: incident spin dimension mismatch");
  const auto amps = two_impurity_exact(geom);
  return {apply(amps.transmission, incident), apply(amps.reflection, incident)};
}

/// Product T_n ... T_2 T_1 of transmission operators in scattering order,
/// neglecting reflections between scatterers. The free propagation phase
/// between scatterers is common to every spin component and is dropped.
inline SpinOperator first_order_composition(std::span<const OperatorAmplitudes> ops) {
  if (ops.empty()) throw InputError("first-order composition: empty scatterer list");
  ComplexMatrix total = ops.front().T.matrix();
  for (std::size_t i = 1; i < ops.size(); ++i) {
    if (ops[i].dim() != ops.front().dim()) throw InputError("first-order composition: dimension mismatch");
    total = ops[i].T.matrix() * total;
  }
  return SpinOperator(std::move(total));
}

}  // namespace spinscatter
