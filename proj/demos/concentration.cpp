// Concentrates a|00> + b|11> with a spin filter tuned to the optimal coupling,
// then repeats with a Kondo impurity plus impurity measurement.
#include <cmath>
#include <cstdio>

#include "spinscatter/spinscatter.hpp"

int main() {
  using namespace spinscatter;
  const WaveNumber k(1.0);

  const auto weak = Coefficients::polar(std::sqrt(0.2), 0.0, std::sqrt(0.8), 0.0);
  const auto r = optimal_coupling_fixed(weak, k);
  const auto filtered = concentrate_fixed(weak, k, {r});
  std::printf("fixed impurity: r = %.6f\n", r.value());
  for (const auto& o : filtered.outcomes)
    std::printf("  %-24s p = %.6f  E = %.6f bits\n", o.branch_label.c_str(), o.probability, o.entropy_bits);

  // The Kondo route damps |00>, so the larger weight goes on a.
  const auto strong = Coefficients::polar(std::sqrt(0.8), 0.0, std::sqrt(0.2), 0.0);
  const auto rk = optimal_coupling_kondo(strong, k);
  const auto kondo = concentrate_kondo(strong, k, {rk});
  std::printf("Kondo impurity: r = %.6f (residual %.2e)\n", rk.value(), kondo.condition_residual);
  for (const auto& o : kondo.outcomes)
    std::printf("  %-44s p = %.6f  E = %.6f bits\n", o.branch_label.c_str(), o.probability, o.entropy_bits);
  return 0;
}
