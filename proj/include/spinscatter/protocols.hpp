#pragma once

// Entanglement protocols built from single scattering events plus projective
// measurement. Every protocol enumerates its full event tree (transmit/reflect
// at each scatterer, then each measurement outcome) so that branch
// probabilities are absolute with respect to the normalized initial state and
// sum to one.

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spinscatter/errors.hpp"
#include "spinscatter/impurity_channels.hpp"
#include "spinscatter/scattering.hpp"
#include "spinscatter/spin_hilbert.hpp"
#include "spinscatter/tolerances.hpp"

namespace spinscatter {

/// a|00> + b|11> with |a|^2 + |b|^2 = 1.
struct Coefficients {
  complex a;
  complex b;

  static Coefficients polar(double mag_a, double phase_a, double mag_b, double phase_b) {
    return {std::polar(mag_a, phase_a), std::polar(mag_b, phase_b)};
  }

  void validate() const {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(b.real()) || !std::isfinite(b.imag()))
      throw InputError("coefficients must be finite");
    if (std::abs(std::norm(a) + std::norm(b) - 1.0) > tolerances.normalization)
      throw InputError("coefficients: |a|^2 + |b|^2 must equal 1");
  }
};

struct EventBranch {
  std::vector<std::string> path;  // e.g. {"P1 transmitted", "P2 reflected", "P0 measured |0>"}
  double probability;             // absolute
  SpinState state;                // unnormalized full register at the leaf

  std::string label() const {
    std::string out;
    for (const auto& step : path) {
      if (!out.empty()) out += ", ";
      out += step;
    }
    return out;
  }
};

struct EventTree {
  std::vector<EventBranch> branches;

  double total_probability() const {
    double sum = 0.0;
    for (const auto& b : branches) sum += b.probability;
    return sum;
  }

  bool complete(double tol = tolerances.solver) const { return std::abs(total_probability() - 1.0) <= tol; }
};

struct ProtocolOutcome {
  std::string branch_label;
  SpinState post_state;            // two-party register; normalized whenever probability > 0
  double probability;              // absolute branch probability
  double conditional_probability;  // measurement probability given the scattering path (1 when unmeasured)
  double entropy_bits;             // entanglement between the two parties of post_state
  std::optional<double> concurrence;

  /// Mean number of attempts until this branch occurs, repeating on failure.
  double expected_attempts() const {
    return probability > 0.0 ? 1.0 / probability : std::numeric_limits<double>::infinity();
  }
};

struct ProtocolResult {
  std::vector<ProtocolOutcome> outcomes;  // one per event-tree leaf, same order
  EventTree tree;
  std::size_t success = 0;                // index of the post-selected branch

  const ProtocolOutcome& success_outcome() const { return outcomes.at(success); }

  const ProtocolOutcome& find(std::string_view label) const {
    for (const auto& o : outcomes)
      if (o.branch_label == label) return o;
    throw InputError("no branch labelled '" + std::string(label) + "'");
  }
};

struct KondoConcentration : ProtocolResult {
  double condition_residual = 0.0;  // | |a S1| - |b (S3+S4)/2| |
};

enum class ImpurityMode { first_order, exact };

inline ImpurityMode parse_impurity_mode(std::string_view s) {
  if (s == "first-order") return ImpurityMode::first_order;
  if (s == "exact") return ImpurityMode::exact;
  throw InputError("unknown mode '" + std::string(s) + "' (expected first-order or exact)");
}

inline std::string_view to_string(ImpurityMode m) { return m == ImpurityMode::exact ? "exact" : "first-order"; }

namespace detail {

inline ProtocolOutcome make_outcome(std::string label, const SpinState& pair, double probability,
                                    double conditional) {
  const double n2 = pair.norm_squared();
  if (n2 == 0.0) {
    return {std::move(label), pair, probability, conditional, 0.0, 0.0};
  }
  SpinState post = normalize(pair);
  const double h = entanglement_entropy(post, {0});
  const double c = concurrence(post);
  return {std::move(label), std::move(post), probability, conditional, h, c};
}

struct Step {
  std::string name;
  SpinOperator op;
};

// Applies each chain of steps to `initial`, then measures `measured` in the
// z basis. Leaves are ordered chain-major, outcome |0> before |1>.
inline ProtocolResult branch_and_measure(const SpinState& initial, const std::vector<std::vector<Step>>& chains,
                                         int measured, const std::string& measured_name,
                                         const std::vector<std::string>& success_path) {
  ProtocolResult result;
  for (const auto& chain : chains) {
    SpinState s = initial;
    std::vector<std::string> path;
    for (const auto& step : chain) {
      s = apply(step.op, s);
      path.push_back(step.name);
    }
    const double reached = s.norm_squared();
    for (int bit = 0; bit < 2; ++bit) {
      auto leaf_path = path;
      leaf_path.push_back(measured_name + " measured |" + std::to_string(bit) + ">");
      SpinState leaf = s;
      double p = 0.0;
      if (reached > 0.0) {
        auto proj = project(s, measured, Axis::z_axis(), bit == 0 ? Outcome::plus : Outcome::minus);
        leaf = std::move(proj.state);
        p = leaf.norm_squared();
      }
      const double cond = reached > 0.0 ? p / reached : 0.0;
      const SpinState pair = condition_on(leaf, measured, bit);
      EventBranch br{leaf_path, p, leaf};
      if (leaf_path == success_path) result.success = result.outcomes.size();
      result.outcomes.push_back(make_outcome(br.label(), pair, p, cond));
      result.tree.branches.push_back(std::move(br));
    }
  }
  if (!result.tree.complete())
    throw InternalFault("event tree probabilities sum to " + std::to_string(result.tree.total_probability()));
  return result;
}

inline void require_normalized(const SpinState& s, std::string_view what) {
  if (!s.normalized()) throw InputError(std::string(what) + ": initial state is not normalized");
}

// Bracketed root of f on [lo, hi] (sign change required).
template <class F>
double bracketed_root(F f, double lo, double hi) {
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (a + b);
}

}  // namespace detail

/// Filters particle 1 of a|00> + b|11> through a fixed impurity. Leaves:
/// transmitted (success) and reflected.
inline ProtocolResult concentrate_fixed(const Coefficients& c, WaveNumber k, const FixedImpuritySpec& spec) {
  c.validate();
  const std::vector<std::string> labels{"particle-1", "particle-2"};
  const SpinState input = make_state({c.a, 0.0, 0.0, c.b}, labels);
  const auto filter = embed(fixed_filter_operators(spec, k), 2, {1});

  ProtocolResult result;
  for (const auto& [name, op] : {std::pair<std::string, const SpinOperator&>{"particle-1 transmitted", filter.T},
                                 std::pair<std::string, const SpinOperator&>{"particle-1 reflected", filter.R}}) {
    SpinState out = apply(op, input);
    const double p = out.norm_squared();
    result.outcomes.push_back(detail::make_outcome(name, out, p, 1.0));
    result.tree.branches.push_back({{name}, p, std::move(out)});
  }
  result.success = 0;
  if (!result.tree.complete())
    throw InternalFault("filter event tree probabilities sum to " + std::to_string(result.tree.total_probability()));
  return result;
}

/// Coupling r that makes |S| = |a/b| for the filter (xi = 2r/k), i.e. a
/// maximally entangled transmitted state. Needs 0 < |a| < |b|.
inline Coupling optimal_coupling_fixed(const Coefficients& c, WaveNumber k) {
  c.validate();
  const double ma = std::abs(c.a);
  const double mb = std::abs(c.b);
  if (!(ma > 0.0)) throw InputError("optimal coupling: |a| must be positive");
  if (!(ma < mb)) throw InputError("optimal coupling: need |a| < |b| (swap the roles of a and b)");
  const double ratio = ma / mb;
  const double xi = std::sqrt(1.0 / (ratio * ratio) - 1.0);
  const double r = 0.5 * xi * k.value();

  // Independent check: root of |S(r)| - |a/b|, monotone decreasing in r.
  auto f = [&](double rr) { return std::abs(scalar_amplitudes(Coupling(2.0 * rr), k).S) - ratio; };
  double hi = std::max(1.0, r) * 2.0;
  while (f(hi) > 0.0) hi *= 2.0;
  const double root = detail::bracketed_root(f, 0.0, hi);
  if (std::abs(root - r) > 1e-8 * std::max(1.0, r))
    throw InternalFault("optimal coupling: closed form and root-finder disagree");
  return Coupling(r);
}

inline constexpr int impurity_qubit = 0;

/// Particle 1 of (a|00> + b|11>)|0>_imp scatters off a Kondo impurity, then
/// the impurity is measured in the z basis.
inline KondoConcentration concentrate_kondo(const Coefficients& c, WaveNumber k, const KondoImpuritySpec& spec) {
  c.validate();
  const std::vector<std::string> labels{"particle-1", "particle-2", "impurity"};
  const SpinState input = make_state({c.a, 0.0, 0.0, 0.0, 0.0, 0.0, c.b, 0.0}, labels);
  const auto kondo = embed(kondo_operators(spec, k), 3, {2, impurity_qubit});
  const std::vector<std::vector<detail::Step>> chains{{{"particle-1 transmitted", kondo.T}},
                                                      {{"particle-1 reflected", kondo.R}}};
  KondoConcentration result;
  static_cast<ProtocolResult&>(result) = detail::branch_and_measure(
      input, chains, impurity_qubit, "impurity", {"particle-1 transmitted", "impurity measured |0>"});
  const auto s = kondo_channel_amplitudes(spec, k);
  result.condition_residual = std::abs(std::abs(c.a * s.S[0]) - std::abs(c.b * s.symmetric()));
  return result;
}

/// Coupling r where |a S1| = |b (S3+S4)/2|, found by bracketing over r > 0
/// and then r < 0. Throws if the condition cannot be met.
inline Coupling optimal_coupling_kondo(const Coefficients& c, WaveNumber k,
                                       const KondoEigenvalues& ev = KondoEigenvalues::paper()) {
  c.validate();
  auto f = [&](double r) {
    const auto s = kondo_channel_amplitudes({Coupling(r), ev}, k);
    return std::abs(c.a * s.S[0]) - std::abs(c.b * s.symmetric());
  };
  const double f0 = f(0.0);
  if (f0 == 0.0) return Coupling(0.0);
  for (double dir : {1.0, -1.0}) {
    double prev = 0.0;
    for (double x = 1e-6; x <= 1e6; x *= 2.0) {
      const double r = dir * x * k.value();
      if (std::signbit(f(r)) != std::signbit(f0)) {
        return Coupling(dir > 0 ? detail::bracketed_root(f, prev, r) : detail::bracketed_root(f, r, prev));
      }
      prev = r;
    }
  }
  throw InputError("optimal Kondo coupling: no r satisfies |a S1| = |b (S3+S4)/2|");
}

/// Default initial register |0>_2 |0>_1 |1>_0 (impurity P0 spin-down).
inline SpinState default_particles_initial() { return basis_state("001", {"P2", "P1", "P0"}); }

/// Particles P1 then P2 scatter off the same Kondo impurity P0, which is then
/// measured in the z basis. The success branch is both transmitted, P0 = |0>.
/// Both particles are always sent, so the tree has 4 scattering paths x 2
/// measurement outcomes.
inline ProtocolResult entangle_particles(WaveNumber k, const KondoImpuritySpec& spec,
                                         const SpinState& initial = default_particles_initial()) {
  if (initial.num_qubits() != 3) throw InputError("entangle particles: initial state must have three qubits");
  detail::require_normalized(initial, "entangle particles");
  const SpinState psi(initial.amplitudes(), {"P2", "P1", "P0"});
  const auto amps = kondo_operators(spec, k);
  const auto first = embed(amps, 3, {1, 0});
  const auto second = embed(amps, 3, {2, 0});
  std::vector<std::vector<detail::Step>> chains;
  for (const auto& [n1, o1] : {std::pair{"P1 transmitted", &first.T}, std::pair{"P1 reflected", &first.R}})
    for (const auto& [n2, o2] : {std::pair{"P2 transmitted", &second.T}, std::pair{"P2 reflected", &second.R}})
      chains.push_back({{n1, *o1}, {n2, *o2}});
  return detail::branch_and_measure(psi, chains, 0, "P0", {"P1 transmitted", "P2 transmitted", "P0 measured |0>"});
}

/// Default initial register |1>_0 |0>_1 |0>_2 (moving particle P0 spin-down).
inline SpinState default_impurities_initial() { return basis_state("100", {"P0", "P1", "P2"}); }

/// Particle P0 crosses Kondo impurities P1 at -a and P2 at +a, then is
/// measured in the z basis. First-order mode composes single-impurity
/// channels; exact mode uses the two-impurity solution with all multiple
/// reflections.
inline ProtocolResult entangle_impurities(WaveNumber k, const KondoImpuritySpec& spec1, const KondoImpuritySpec& spec2,
                                          double half_separation, ImpurityMode mode,
                                          const SpinState& initial = default_impurities_initial()) {
  if (initial.num_qubits() != 3) throw InputError("entangle impurities: initial state must have three qubits");
  detail::require_normalized(initial, "entangle impurities");
  if (!std::isfinite(half_separation) || !(half_separation > 0.0))
    throw InputError("entangle impurities: half separation must be positive");
  const SpinState psi(initial.amplitudes(), {"P0", "P1", "P2"});
  constexpr int mover = 2;
  std::vector<std::vector<detail::Step>> chains;
  if (mode == ImpurityMode::first_order) {
    const auto one = embed(kondo_operators(spec1, k), 3, {mover, 1});
    const auto two = embed(kondo_operators(spec2, k), 3, {mover, 0});
    chains = {{{"P0 transmitted at P1", one.T}, {"P0 transmitted at P2", two.T}},
              {{"P0 transmitted at P1", one.T}, {"P0 reflected at P2", two.R}},
              {{"P0 reflected at P1", one.R}}};
    return detail::branch_and_measure(psi, chains, mover, "P0",
                                      {"P0 transmitted at P1", "P0 transmitted at P2", "P0 measured |0>"});
  }
  const TwoImpurityGeometry geom{half_separation, k, embed(exchange_potential(spec1), 3, {mover, 1}),
                                 embed(exchange_potential(spec2), 3, {mover, 0})};
  const auto exact = two_impurity_exact(geom);
  chains = {{{"P0 transmitted", exact.transmission}}, {{"P0 reflected", exact.reflection}}};
  return detail::branch_and_measure(psi, chains, mover, "P0", {"P0 transmitted", "P0 measured |0>"});
}

}  // namespace spinscatter
