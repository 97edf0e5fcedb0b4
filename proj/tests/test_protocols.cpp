#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spinscatter/protocols.hpp"

using namespace spinscatter;

namespace {

const Coefficients third = Coefficients::polar(std::sqrt(1.0 / 3.0), 0.0, std::sqrt(2.0 / 3.0), 0.0);

std::array<oracle::cd, 8> to_array(const SpinState& s) {
  std::array<oracle::cd, 8> out{};
  for (Eigen::Index i = 0; i < 8; ++i) out[static_cast<std::size_t>(i)] = s.amplitude(i);
  return out;
}

}  // namespace

TEST(ConcentrateFixed, ZeroCouplingLeavesStateAlone) {
  const auto res = concentrate_fixed(third, WaveNumber(1.0), {Coupling(0.0)});
  const auto& ok = res.success_outcome();
  EXPECT_EQ(ok.branch_label, "particle-1 transmitted");
  EXPECT_NEAR(ok.probability, 1.0, 1e-15);
  EXPECT_NEAR(ok.entropy_bits, 0.9182958340544896, 1e-12);
  EXPECT_NEAR(res.find("particle-1 reflected").probability, 0.0, 1e-15);
}

TEST(ConcentrateFixed, OptimumIsMaximallyEntangled) {
  const WaveNumber k(1.0);
  const auto r = optimal_coupling_fixed(third, k);
  EXPECT_NEAR(r.value(), 0.5, 1e-10);
  const auto res = concentrate_fixed(third, k, {r});
  const auto& ok = res.success_outcome();
  EXPECT_NEAR(ok.entropy_bits, 1.0, 1e-9);
  EXPECT_NEAR(ok.probability, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(*ok.concurrence, 1.0, 1e-9);
  EXPECT_NEAR(ok.expected_attempts(), 1.5, 1e-12);
  const auto sc = schmidt_coefficients(ok.post_state, {0});
  EXPECT_NEAR(sc[0], 1.0 / std::numbers::sqrt2, 1e-9);
  EXPECT_NEAR(sc[1], 1.0 / std::numbers::sqrt2, 1e-9);
  // the ideal filter success rate for |a| <= |b|
  EXPECT_NEAR(ok.probability, 2.0 * std::norm(third.a), 1e-12);
}

TEST(ConcentrateFixed, BranchProbabilities) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double ma = u(rng);
    const auto c = Coefficients::polar(ma, 6.0 * u(rng), std::sqrt(1.0 - ma * ma), 6.0 * u(rng));
    const double r = 4.0 * u(rng) - 2.0;
    const WaveNumber k(0.2 + 2.0 * u(rng));
    const auto res = concentrate_fixed(c, k, {Coupling(r)});
    const auto s = scalar_amplitudes(Coupling(2.0 * r), k);
    EXPECT_NEAR(res.outcomes[0].probability, std::norm(c.a) + std::norm(c.b) * std::norm(s.S), 1e-12);
    EXPECT_NEAR(res.outcomes[1].probability, std::norm(c.b) * std::norm(s.R), 1e-12);
    EXPECT_NEAR(res.tree.total_probability(), 1.0, 1e-12);
    // reflected branch keeps only the |11> component
    if (res.outcomes[1].probability > 1e-12) EXPECT_NEAR(res.outcomes[1].entropy_bits, 0.0, 1e-12);
  }
}

TEST(ConcentrateFixed, ProductInputStaysProduct) {
  const auto c = Coefficients::polar(1.0, 0.0, 0.0, 0.0);
  const auto res = concentrate_fixed(c, WaveNumber(1.0), {Coupling(0.7)});
  EXPECT_NEAR(res.success_outcome().entropy_bits, 0.0, 1e-12);
  EXPECT_NEAR(res.success_outcome().probability, 1.0, 1e-15);
}

TEST(ConcentrateFixed, EntropyRisesMonotonicallyUpToOptimum) {
  const WaveNumber k(1.0);
  const double opt = optimal_coupling_fixed(third, k).value();
  double prev = -1.0;
  for (int i = 0; i <= 50; ++i) {
    const double h = concentrate_fixed(third, k, {Coupling(opt * i / 50.0)}).success_outcome().entropy_bits;
    EXPECT_GT(h, prev);
    prev = h;
  }
}

TEST(ConcentrateFixed, RejectsUnnormalizedCoefficients) {
  EXPECT_THROW(concentrate_fixed({1.0, 1.0}, WaveNumber(1.0), {Coupling(0.5)}), InputError);
}

TEST(OptimalCouplingFixed, Examples) {
  EXPECT_NEAR(optimal_coupling_fixed(Coefficients::polar(std::sqrt(0.1), 0.0, std::sqrt(0.9), 0.0), WaveNumber(2.0))
                  .value(),
              std::sqrt(8.0), 1e-10);
  const double h = 1.0 / std::numbers::sqrt2;
  EXPECT_THROW(optimal_coupling_fixed(Coefficients::polar(h, 0.0, h, 0.0), WaveNumber(1.0)), InputError);
  EXPECT_THROW(optimal_coupling_fixed(Coefficients::polar(std::sqrt(2.0 / 3.0), 0.0, std::sqrt(1.0 / 3.0), 0.0),
                                      WaveNumber(1.0)),
               InputError);
  EXPECT_THROW(optimal_coupling_fixed(Coefficients::polar(0.0, 0.0, 1.0, 0.0), WaveNumber(1.0)), InputError);
}

TEST(OptimalCouplingFixed, PhasesDoNotMatter) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.05, 0.7);
  for (int trial = 0; trial < 50; ++trial) {
    const double ma = u(rng);
    const auto c = Coefficients::polar(ma, 5.0 * ma, std::sqrt(1.0 - ma * ma), -3.0 * ma);
    const WaveNumber k(0.3 + ma);
    const auto res = concentrate_fixed(c, k, {optimal_coupling_fixed(c, k)});
    EXPECT_NEAR(res.success_outcome().entropy_bits, 1.0, 1e-9);
    EXPECT_NEAR(res.success_outcome().probability, 2.0 * ma * ma, 1e-10);
  }
}

TEST(ConcentrateKondo, ZeroCouplingIsIdentity) {
  const auto res = concentrate_kondo(third, WaveNumber(1.0), {Coupling(0.0)});
  const auto& ok = res.success_outcome();
  EXPECT_EQ(ok.branch_label, "particle-1 transmitted, impurity measured |0>");
  EXPECT_NEAR(ok.probability, 1.0, 1e-15);
  EXPECT_NEAR(ok.conditional_probability, 1.0, 1e-15);
  EXPECT_NEAR(ok.entropy_bits, 0.9182958340544896, 1e-12);
  EXPECT_NEAR(std::abs(ok.post_state.amplitude(0) - third.a), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(ok.post_state.amplitude(3) - third.b), 0.0, 1e-15);
}

TEST(ConcentrateKondo, TunedCouplingGivesOneBit) {
  // with the default eigenvalues S4 = 1, so the condition needs |a| > |b|
  for (double a2 : {0.6, 0.8, 0.95}) {
    const auto c = Coefficients::polar(std::sqrt(a2), 0.3, std::sqrt(1.0 - a2), -1.1);
    const WaveNumber k(1.3);
    const auto r = optimal_coupling_kondo(c, k);
    const auto res = concentrate_kondo(c, k, {r});
    EXPECT_LT(res.condition_residual, 1e-12);
    EXPECT_NEAR(res.success_outcome().entropy_bits, 1.0, 1e-9);
    EXPECT_NEAR(*res.success_outcome().concurrence, 1.0, 1e-9);
  }
  EXPECT_THROW(optimal_coupling_kondo(third, WaveNumber(1.0)), InputError);
}

TEST(ConcentrateKondo, ImpurityOutcomeMatchesHandAlgebra) {
  const WaveNumber k(1.0);
  const KondoImpuritySpec spec{Coupling(1.0)};
  const auto res = concentrate_kondo(third, k, spec);
  const auto s = kondo_channel_amplitudes(spec, k);
  // outcome |0>: a S1 |00> + b (S3+S4)/2 |11>
  const double p0 = std::norm(third.a * s.S[0]) + std::norm(third.b * s.symmetric());
  EXPECT_NEAR(res.success_outcome().probability, p0, 1e-12);
  EXPECT_NEAR(res.success_outcome().entropy_bits,
              oracle::pair_entropy(third.a * s.S[0], 0.0, 0.0, third.b * s.symmetric()), 1e-10);
  // outcome |1>: b (S3-S4)/2 |0 1>|impurity 1> is a product of the two particles
  const auto& miss = res.find("particle-1 transmitted, impurity measured |1>");
  EXPECT_NEAR(miss.probability, std::norm(third.b * s.antisymmetric()), 1e-12);
  EXPECT_NEAR(miss.entropy_bits, 0.0, 1e-12);
  EXPECT_NEAR(res.condition_residual, std::abs(std::abs(third.a * s.S[0]) - std::abs(third.b * s.symmetric())),
              1e-15);
}

TEST(ConcentrateKondo, ProjectionOfTunedStateOnImpurity) {
  const auto c = Coefficients::polar(std::sqrt(0.8), 0.0, std::sqrt(0.2), 0.0);
  const WaveNumber k(1.0);
  const KondoImpuritySpec spec{optimal_coupling_kondo(c, k)};
  const auto res = concentrate_kondo(c, k, spec);
  const SpinState transmitted = res.tree.branches[0].state;  // path "transmitted, |0>" already projected
  const auto& full = res.tree.branches[0];
  EXPECT_EQ(full.label(), "particle-1 transmitted, impurity measured |0>");
  // re-project the pre-measurement register through the spin-hilbert API
  const auto kondo = embed(kondo_operators(spec, k), 3, {2, 0});
  const SpinState pre = apply(kondo.T, make_state({c.a, 0.0, 0.0, 0.0, 0.0, 0.0, c.b, 0.0}));
  const auto proj = project(pre, 0, Axis::z_axis(), Outcome::plus);
  EXPECT_NEAR(proj.probability, res.success_outcome().conditional_probability, 1e-12);
  EXPECT_NEAR(proj.probability * pre.norm_squared(), full.probability, 1e-12);
  EXPECT_NEAR(entanglement_entropy(normalize(condition_on(proj.state, 0, 0)), {0}), 1.0, 1e-9);
  EXPECT_NEAR(fidelity(normalize(transmitted), normalize(proj.state)), 1.0, 1e-12);
}

TEST(EntangleParticles, AlignedSpinsNeverEntangle) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const char* bits : {"000", "111"}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto ev = trial % 2 ? KondoEigenvalues::paper() : KondoEigenvalues::standard_pauli();
      const auto res = entangle_particles(WaveNumber(0.2 + std::abs(u(rng))), {Coupling(u(rng)), ev},
                                          basis_state(bits, {"P2", "P1", "P0"}));
      ASSERT_EQ(res.outcomes.size(), 8u);
      for (const auto& o : res.outcomes) EXPECT_LT(o.entropy_bits, 1e-12) << o.branch_label;
    }
  }
}

TEST(EntangleParticles, ZeroCouplingFlipsNothing) {
  const auto res = entangle_particles(WaveNumber(1.0), {Coupling(0.0)});
  const auto& miss = res.find("P1 transmitted, P2 transmitted, P0 measured |1>");
  EXPECT_NEAR(miss.probability, 1.0, 1e-15);
  EXPECT_NEAR(res.success_outcome().probability, 0.0, 1e-15);
}

TEST(EntangleParticles, UnitCouplingReproducesClosedForm) {
  const WaveNumber k(1.0);
  const KondoImpuritySpec spec{Coupling(1.0)};
  const auto res = entangle_particles(k, spec);
  const auto& ok = res.success_outcome();
  EXPECT_EQ(ok.branch_label, "P1 transmitted, P2 transmitted, P0 measured |0>");
  EXPECT_NEAR(ok.probability, 0.18, 1e-12);

  // post state on (P2, P1): index 0b10 is |1>_2|0>_1, 0b01 is |0>_2|1>_1
  EXPECT_NEAR(std::norm(ok.post_state.amplitude(0b10)), 4.0 / 9.0, 1e-9);
  EXPECT_NEAR(std::norm(ok.post_state.amplitude(0b01)), 5.0 / 9.0, 1e-9);
  EXPECT_NEAR(ok.entropy_bits, 0.9910760598382222, 1e-12);
  EXPECT_NEAR(*ok.concurrence, 0.9938079899999063, 1e-12);

  // unnormalized amplitudes from the channel algebra
  const auto s = kondo_channel_amplitudes(spec, k);
  const auto& leaf = res.tree.branches[res.success].state;
  EXPECT_NEAR(std::abs(leaf.amplitude(0b100) - s.antisymmetric() * s.symmetric()), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(leaf.amplitude(0b010) - s.S[0] * s.antisymmetric()), 0.0, 1e-14);
}

TEST(EntangleParticles, MatchesIndexArithmeticOracle) {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ev = trial % 2 ? KondoEigenvalues::paper() : KondoEigenvalues::standard_pauli();
    const double r = u(rng);
    const double k = 0.2 + std::abs(u(rng));
    const SpinState init(oracle::random_vector(rng, 8), {"P2", "P1", "P0"});
    const auto res = entangle_particles(WaveNumber(k), {Coupling(r), ev}, init);

    const auto s = oracle::kondo_s(r, k, ev.as_array());
    const auto psi = oracle::apply_kondo(oracle::apply_kondo(to_array(init), s, 1, 0), s, 2, 0);
    const oracle::cd c00 = psi[0b000], c01 = psi[0b010], c10 = psi[0b100], c11 = psi[0b110];
    const double p = std::norm(c00) + std::norm(c01) + std::norm(c10) + std::norm(c11);
    const auto& ok = res.success_outcome();
    EXPECT_NEAR(ok.probability, p, 1e-12);
    if (p > 1e-8) EXPECT_NEAR(ok.entropy_bits, oracle::pair_entropy(c00, c01, c10, c11), 1e-6);
  }
}

TEST(EntangleParticles, RejectsBadInitialState) {
  EXPECT_THROW(entangle_particles(WaveNumber(1.0), {Coupling(1.0)}, basis_state("01")), InputError);
  EXPECT_THROW(entangle_particles(WaveNumber(1.0), {Coupling(1.0)}, SpinState(ComplexVector::Ones(8))), InputError);
}

TEST(EntangleImpurities, ZeroCouplingFlipsNothing) {
  for (auto mode : {ImpurityMode::first_order, ImpurityMode::exact}) {
    const auto res = entangle_impurities(WaveNumber(1.0), {Coupling(0.0)}, {Coupling(0.0)}, 1.0, mode);
    double p1 = 0.0;
    for (const auto& o : res.outcomes)
      if (o.branch_label.ends_with("|1>")) p1 += o.probability;
    EXPECT_NEAR(p1, 1.0, 1e-15);
    EXPECT_NEAR(res.success_outcome().probability, 0.0, 1e-15);
  }
}

TEST(EntangleImpurities, FirstOrderAmplitudes) {
  const WaveNumber k(1.0);
  const KondoImpuritySpec spec{Coupling(1.0)};
  const auto res = entangle_impurities(k, spec, spec, 1.0, ImpurityMode::first_order);
  ASSERT_EQ(res.outcomes.size(), 6u);
  const auto& ok = res.success_outcome();
  EXPECT_EQ(ok.branch_label, "P0 transmitted at P1, P0 transmitted at P2, P0 measured |0>");
  const auto s = kondo_channel_amplitudes(spec, k);
  // register (P0, P1, P2): |0>_0|1>_1|0>_2 = 0b010, |0>_0|0>_1|1>_2 = 0b001
  const auto& leaf = res.tree.branches[res.success].state;
  const complex c10 = s.S[0] * s.antisymmetric();
  const complex c01 = s.symmetric() * s.antisymmetric();
  EXPECT_NEAR(std::abs(leaf.amplitude(0b010) - c10), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(leaf.amplitude(0b001)), std::abs(c01), 1e-14);
  EXPECT_NEAR(std::abs(leaf.amplitude(0b001) - c01), 0.0, 1e-14);  // derived sign
  EXPECT_NEAR(ok.entropy_bits, oracle::pair_entropy(0.0, c01, c10, 0.0), 1e-10);

  // pipeline oracle: P0 is bit 2, P1 bit 1, P2 bit 0
  const auto sv = oracle::kondo_s(1.0, 1.0, KondoEigenvalues::paper().as_array());
  const auto psi = oracle::apply_kondo(oracle::apply_kondo(to_array(default_impurities_initial()), sv, 2, 1), sv, 2, 0);
  for (int idx = 0; idx < 4; ++idx) EXPECT_NEAR(std::abs(leaf.amplitude(idx) - psi[idx]), 0.0, 1e-14);
}

TEST(EntangleImpurities, ExactMatchesFirstOrderAtWeakCoupling) {
  const WaveNumber k(1.0);
  const double a = 5.0;
  const KondoImpuritySpec spec{Coupling(0.01)};
  const auto fo = entangle_impurities(k, spec, spec, a, ImpurityMode::first_order);
  const auto ex = entangle_impurities(k, spec, spec, a, ImpurityMode::exact);
  ASSERT_EQ(ex.outcomes.size(), 4u);
  EXPECT_EQ(ex.success_outcome().branch_label, "P0 transmitted, P0 measured |0>");
  EXPECT_GE(fidelity(fo.success_outcome().post_state, ex.success_outcome().post_state), 1.0 - 1e-3);

  auto infidelity = [&](double g) {
    const KondoImpuritySpec sp{Coupling(g)};
    const auto f = entangle_impurities(k, sp, sp, a, ImpurityMode::first_order);
    const auto e = entangle_impurities(k, sp, sp, a, ImpurityMode::exact);
    return 1.0 - fidelity(f.success_outcome().post_state, e.success_outcome().post_state);
  };
  const double ratio = infidelity(0.05) / infidelity(0.025);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(EntangleImpurities, RejectsBadGeometry) {
  EXPECT_THROW(entangle_impurities(WaveNumber(1.0), {Coupling(1.0)}, {Coupling(1.0)}, 0.0, ImpurityMode::exact),
               InputError);
  EXPECT_THROW(entangle_impurities(WaveNumber(1.0), {Coupling(1.0)}, {Coupling(1.0)}, -1.0, ImpurityMode::first_order),
               InputError);
  EXPECT_THROW(parse_impurity_mode("second-order"), InputError);
}

TEST(EventTrees, ProbabilitiesAreComplete) {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ev = trial % 2 ? KondoEigenvalues::paper() : KondoEigenvalues::standard_pauli();
    const WaveNumber k(0.1 + 3.0 * std::abs(u(rng)));
    const KondoImpuritySpec s1{Coupling(4.0 * u(rng)), ev};
    const KondoImpuritySpec s2{Coupling(4.0 * u(rng)), ev};
    const double ma = std::abs(u(rng));
    const auto c = Coefficients::polar(ma, 3.0 * u(rng), std::sqrt(1.0 - ma * ma), 3.0 * u(rng));
    const Axis axis = Axis::spherical(3.0 * std::abs(u(rng)), 3.0 * u(rng));
    const SpinState init3(oracle::random_vector(rng, 8));
    const std::vector<ProtocolResult> all{
        concentrate_fixed(c, k, {Coupling(4.0 * u(rng)), axis}),
        concentrate_kondo(c, k, s1),
        entangle_particles(k, s1, init3),
        entangle_impurities(k, s1, s2, 0.1 + 5.0 * std::abs(u(rng)), ImpurityMode::first_order, init3),
        entangle_impurities(k, s1, s2, 0.1 + 5.0 * std::abs(u(rng)), ImpurityMode::exact, init3)};
    for (const auto& res : all) {
      EXPECT_NEAR(res.tree.total_probability(), 1.0, 1e-10);
      ASSERT_EQ(res.outcomes.size(), res.tree.branches.size());
      for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
        EXPECT_EQ(res.outcomes[i].branch_label, res.tree.branches[i].label());
        EXPECT_GE(res.outcomes[i].probability, 0.0);
        if (res.outcomes[i].probability > 1e-14) {
          EXPECT_NEAR(res.outcomes[i].post_state.norm_squared(), 1.0, 1e-10);
          EXPECT_GE(res.outcomes[i].entropy_bits, -1e-12);
          EXPECT_LE(res.outcomes[i].entropy_bits, 1.0 + 1e-12);
        }
      }
    }
  }
}
