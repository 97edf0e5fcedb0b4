#pragma once

namespace spinscatter {

/// Every numeric tolerance used by the library lives here.
struct Tolerances {
  double algebraic = 1e-12;       // exact identities (R = S - 1, unitarity of closed forms)
  double solver = 1e-10;          // residuals of dense solves and the two-impurity system
  double normalization = 1e-10;   // |<psi|psi> - 1| for a state to count as normalized
  double hermiticity = 1e-12;     // max |A - A^dagger| entry for Hermitian inputs
  double eigenvalue_clip = 1e-12; // negative density eigenvalues above -clip are set to 0
  double axis_norm = 1e-10;       // | |n| - 1 | for measurement / impurity axes
};

inline constexpr Tolerances tolerances{};

}  // namespace spinscatter
