// One particle crossing two Kondo impurities: first-order composition versus
// the exact two-delta solution, for a few coupling strengths.
#include <cstdio>

#include "spinscatter/spinscatter.hpp"

int main() {
  using namespace spinscatter;
  const WaveNumber k(1.0);
  const double half_separation = 5.0;
  std::printf("%8s %12s %12s %12s %14s\n", "g/k", "p(first)", "p(exact)", "E(exact)", "infidelity");
  for (double g : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    const KondoImpuritySpec spec{Coupling(g)};
    const auto fo = entangle_impurities(k, spec, spec, half_separation, ImpurityMode::first_order);
    const auto ex = entangle_impurities(k, spec, spec, half_separation, ImpurityMode::exact);
    const auto& a = fo.success_outcome();
    const auto& b = ex.success_outcome();
    std::printf("%8.3f %12.6e %12.6e %12.6f %14.6e\n", g, a.probability, b.probability, b.entropy_bits,
                1.0 - fidelity(a.post_state, b.post_state));
  }
  return 0;
}
