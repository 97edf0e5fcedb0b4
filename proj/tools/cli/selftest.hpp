#pragma once

// Quick invariant checks exposed as `spinscatter selftest`.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spinscatter/spinscatter.hpp"

namespace spinscatter::cli {

struct CheckResult {
  std::string name;
  bool passed;
  double worst;      // largest observed deviation
  double tolerance;
};

inline std::vector<CheckResult> run_selftest() {
  std::vector<CheckResult> out;
  auto check = [&](std::string name, double tol, const std::function<double()>& body) {
    double worst = std::numeric_limits<double>::infinity();
    try {
      worst = body();
    } catch (const std::exception&) {
    }
    out.push_back({std::move(name), worst <= tol, worst, tol});
  };
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  check("scalar unitarity", 1e-12, [] {
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const auto s = scalar_amplitudes(Coupling(-10.0 + 0.05 * i), WaveNumber(1.0));
      worst = std::max(worst, std::abs(std::norm(s.S) + std::norm(s.R) - 1.0));
    }
    return worst;
  });

  check("filter diagonal", 1e-13, [] {
    double worst = 0.0;
    for (double r : {0.1, 0.5, 2.0})
      for (double k : {0.5, 1.0, 3.0}) {
        ComplexMatrix m = ComplexMatrix::Zero(2, 2);
        m(1, 1) = 2.0 * r;
        const auto t = matrix_amplitudes(SpinOperator(m), WaveNumber(k)).T;
        worst = std::max({worst, std::abs(t(0, 0) - 1.0),
                          std::abs(t(1, 1) - 1.0 / complex(1.0, 2.0 * r / k)), std::abs(t(0, 1)), std::abs(t(1, 0))});
      }
    return worst;
  });

  check("kondo eigenbasis vs linear solve", 1e-12, [&] {
    double worst = 0.0;
    for (const auto& ev : {KondoEigenvalues::paper(), KondoEigenvalues::standard_pauli()})
      for (int i = 0; i < 20; ++i) {
        const KondoImpuritySpec spec{Coupling(3.0 * u(rng)), ev};
        const WaveNumber k(0.1 + 3.0 * std::abs(u(rng)));
        const auto a = kondo_operators(spec, k).T.matrix();
        const auto b = matrix_amplitudes(exchange_potential(spec), k).T.matrix();
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
    return worst;
  });

  check("identity at zero coupling", 1e-15, [] {
    const WaveNumber k(1.0);
    const auto kt = kondo_operators({Coupling(0.0)}, k).T.matrix();
    const auto ft = fixed_filter_operators({Coupling(0.0)}, k).T.matrix();
    return std::max((kt - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(),
                    (ft - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff());
  });

  check("concentration optimum", 1e-9, [] {
    const auto c = Coefficients::polar(std::sqrt(1.0 / 3.0), 0.0, std::sqrt(2.0 / 3.0), 0.0);
    const WaveNumber k(1.0);
    const auto r = optimal_coupling_fixed(c, k);
    const auto res = concentrate_fixed(c, k, {r});
    return std::max({std::abs(r.value() - 0.5), std::abs(res.success_outcome().entropy_bits - 1.0),
                     std::abs(res.success_outcome().probability - 2.0 / 3.0)});
  });

  check("event tree completeness", 1e-10, [&] {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const WaveNumber k(0.2 + 2.0 * std::abs(u(rng)));
      const KondoImpuritySpec s1{Coupling(2.0 * u(rng))};
      const KondoImpuritySpec s2{Coupling(2.0 * u(rng))};
      for (const auto& res :
           {entangle_particles(k, s1), entangle_impurities(k, s1, s2, 1.0, ImpurityMode::first_order),
            entangle_impurities(k, s1, s2, 1.0, ImpurityMode::exact)})
        worst = std::max(worst, std::abs(res.tree.total_probability() - 1.0));
    }
    return worst;
  });

  check("two-impurity conservation", 1e-10, [&] {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const TwoImpurityGeometry g{0.5 + std::abs(u(rng)), WaveNumber(0.5 + std::abs(u(rng))),
                                  embed(exchange_potential({Coupling(u(rng))}), 3, {2, 1}),
                                  embed(exchange_potential({Coupling(u(rng))}), 3, {2, 0})};
      const auto amps = two_impurity_exact(g);
      const ComplexMatrix flux = amps.transmission.matrix().adjoint() * amps.transmission.matrix() +
                                 amps.reflection.matrix().adjoint() * amps.reflection.matrix();
      worst = std::max(worst, (flux - ComplexMatrix::Identity(8, 8)).cwiseAbs().maxCoeff());
    }
    return worst;
  });

  return out;
}

}  // namespace spinscatter::cli
