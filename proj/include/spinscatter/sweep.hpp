#pragma once

// Named-protocol dispatch and grid sweeps.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "spinscatter/errors.hpp"
#include "spinscatter/protocols.hpp"

namespace spinscatter {

/// Loosely typed parameter bag shared by the CLI and the sweep driver.
struct ProtocolParameters {
  double k = 1.0;
  std::optional<double> r;
  std::optional<double> xi;  // when set, r = xi * k
  std::optional<double> r1;
  std::optional<double> r2;
  std::optional<double> a;   // magnitude of the |00> coefficient
  std::optional<double> b;   // magnitude of the |11> coefficient; default sqrt(1 - a^2)
  double a_phase = 0.0;
  double b_phase = 0.0;
  double half_separation = 1.0;
  Eigen::Vector3d axis{0.0, 0.0, 1.0};
  std::string eigenvalues = "paper";
  ImpurityMode mode = ImpurityMode::first_order;
  std::optional<std::string> initial;  // bit string, leftmost label first

  static constexpr std::string_view numeric_names[] = {"k",       "r",       "xi",              "r1",    "r2", "a",
                                                       "b",       "a-phase", "b-phase",         "theta", "phi",
                                                       "half-separation"};

  void set(std::string_view name, double value) {
    if (!std::isfinite(value)) throw InputError("parameter " + std::string(name) + " must be finite");
    if (name == "k") k = value;
    else if (name == "r") { r = value; xi.reset(); }
    else if (name == "xi") xi = value;
    else if (name == "r1") r1 = value;
    else if (name == "r2") r2 = value;
    else if (name == "a") a = value;
    else if (name == "b") b = value;
    else if (name == "a-phase") a_phase = value;
    else if (name == "b-phase") b_phase = value;
    else if (name == "half-separation") half_separation = value;
    else if (name == "theta") {
      const double phi = std::atan2(axis.y(), axis.x());
      axis = Axis::spherical(value, phi).vector();
    } else if (name == "phi") {
      const double theta = std::acos(std::clamp(axis.z() / axis.norm(), -1.0, 1.0));
      axis = Axis::spherical(theta, value).vector();
    } else {
      throw InputError("unknown parameter '" + std::string(name) + "'");
    }
  }

  std::optional<double> coupling() const {
    if (xi) return *xi * k;
    return r;
  }

  double require_coupling() const {
    if (auto c = coupling()) return *c;
    throw InputError("missing parameter r (or xi)");
  }

  double coupling1() const { return r1 ? *r1 : require_coupling(); }
  double coupling2() const { return r2 ? *r2 : require_coupling(); }

  Coefficients coefficients() const {
    if (!a) throw InputError("missing parameter a");
    if (*a < 0.0 || *a > 1.0) throw InputError("parameter a must lie in [0, 1]");
    const double mb = b ? *b : std::sqrt(std::max(0.0, 1.0 - *a * *a));
    return Coefficients::polar(*a, a_phase, mb, b_phase);
  }
};

struct SweepRecord {
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<std::pair<std::string, double>> outcomes;

  double outcome(std::string_view name) const {
    for (const auto& [key, v] : outcomes)
      if (key == name) return v;
    throw InputError("record has no outcome '" + std::string(name) + "'");
  }
};

inline constexpr std::string_view protocol_names[] = {"amplitudes", "concentrate", "concentrate-kondo",
                                                      "entangle-particles", "entangle-impurities"};

inline void require_protocol(std::string_view protocol) {
  if (std::find(std::begin(protocol_names), std::end(protocol_names), protocol) == std::end(protocol_names))
    throw InputError("unknown protocol '" + std::string(protocol) + "'");
}

/// Runs a named protocol. "amplitudes" has no event tree and is rejected here.
inline ProtocolResult run_protocol(std::string_view protocol, const ProtocolParameters& p) {
  const WaveNumber k(p.k);
  const auto ev = KondoEigenvalues::from_preset(p.eigenvalues);
  if (protocol == "concentrate") {
    const auto c = p.coefficients();
    const auto r = p.coupling() ? Coupling(*p.coupling()) : optimal_coupling_fixed(c, k);
    return concentrate_fixed(c, k, {r, Axis::normalized(p.axis.x(), p.axis.y(), p.axis.z())});
  }
  if (protocol == "concentrate-kondo") {
    const auto c = p.coefficients();
    const auto r = p.coupling() ? Coupling(*p.coupling()) : optimal_coupling_kondo(c, k, ev);
    return concentrate_kondo(c, k, {r, ev});
  }
  if (protocol == "entangle-particles") {
    const KondoImpuritySpec spec{Coupling(p.require_coupling()), ev};
    if (p.initial) return entangle_particles(k, spec, basis_state(*p.initial));
    return entangle_particles(k, spec);
  }
  if (protocol == "entangle-impurities") {
    const KondoImpuritySpec s1{Coupling(p.coupling1()), ev};
    const KondoImpuritySpec s2{Coupling(p.coupling2()), ev};
    if (p.initial) return entangle_impurities(k, s1, s2, p.half_separation, p.mode, basis_state(*p.initial));
    return entangle_impurities(k, s1, s2, p.half_separation, p.mode);
  }
  require_protocol(protocol);
  throw InputError("protocol '" + std::string(protocol) + "' has no event tree");
}

inline EventTree event_tree(std::string_view protocol, const ProtocolParameters& p) {
  return run_protocol(protocol, p).tree;
}

/// Column names produced by evaluate_point, in order.
inline std::vector<std::string> outcome_keys(std::string_view protocol) {
  require_protocol(protocol);
  if (protocol == "amplitudes") return {"xi", "S_re", "S_im", "R_re", "R_im", "abs_S2", "abs_R2"};
  std::vector<std::string> keys{"probability", "conditional_probability", "entropy_bits", "concurrence"};
  if (protocol == "concentrate-kondo") keys.emplace_back("condition_residual");
  return keys;
}

/// Outcome scalars for one parameter point. Keys are fixed per protocol.
inline std::vector<std::pair<std::string, double>> evaluate_point(std::string_view protocol,
                                                                  const ProtocolParameters& p) {
  require_protocol(protocol);
  if (protocol == "amplitudes") {
    const auto s = scalar_amplitudes(Coupling(p.require_coupling()), WaveNumber(p.k));
    return {{"xi", s.xi},           {"S_re", s.S.real()},       {"S_im", s.S.imag()}, {"R_re", s.R.real()},
            {"R_im", s.R.imag()},   {"abs_S2", std::norm(s.S)}, {"abs_R2", std::norm(s.R)}};
  }
  if (protocol == "concentrate-kondo") {
    const WaveNumber k(p.k);
    const auto c = p.coefficients();
    const auto ev = KondoEigenvalues::from_preset(p.eigenvalues);
    const auto r = p.coupling() ? Coupling(*p.coupling()) : optimal_coupling_kondo(c, k, ev);
    const auto res = concentrate_kondo(c, k, {r, ev});
    const auto& o = res.success_outcome();
    return {{"probability", o.probability},
            {"conditional_probability", o.conditional_probability},
            {"entropy_bits", o.entropy_bits},
            {"concurrence", o.concurrence.value_or(0.0)},
            {"condition_residual", res.condition_residual}};
  }
  const auto res = run_protocol(protocol, p);
  const auto& o = res.success_outcome();
  return {{"probability", o.probability},
          {"conditional_probability", o.conditional_probability},
          {"entropy_bits", o.entropy_bits},
          {"concurrence", o.concurrence.value_or(0.0)}};
}

enum class GridScale { linear, log };

struct GridAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int points = 1;
  GridScale scale = GridScale::linear;

  void validate() const {
    if (name.empty()) throw InputError("grid: empty parameter name");
    if (!std::isfinite(start) || !std::isfinite(stop)) throw InputError("grid " + name + ": bounds must be finite");
    if (points < 1) throw InputError("grid " + name + ": need at least one point");
    if (points > 1 && !(start < stop)) throw InputError("grid " + name + ": start must be below stop");
    if (scale == GridScale::log && !(start > 0.0)) throw InputError("grid " + name + ": log scale needs start > 0");
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(points));
    if (points == 1) {
      out[0] = start;
      return out;
    }
    const double n = static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i) {
      const double t = static_cast<double>(i);
      if (scale == GridScale::linear) {
        out[static_cast<std::size_t>(i)] = start + (stop - start) * t / n;
      } else {
        out[static_cast<std::size_t>(i)] = std::exp(std::log(start) + (std::log(stop) - std::log(start)) * t / n);
      }
    }
    out.back() = stop;
    return out;
  }

  /// "name:start:stop:points[:linear|log]"
  static GridAxis parse(std::string_view spec) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
      const auto next = spec.find(':', pos);
      parts.push_back(spec.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    if (parts.size() != 4 && parts.size() != 5)
      throw InputError("grid '" + std::string(spec) + "': expected name:start:stop:points[:scale]");
    auto num = [&](std::string_view t) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || p != t.data() + t.size())
        throw InputError("grid '" + std::string(spec) + "': bad number '" + std::string(t) + "'");
      return v;
    };
    GridAxis g;
    g.name = std::string(parts[0]);
    g.start = num(parts[1]);
    g.stop = num(parts[2]);
    int n = 0;
    const auto [p, ec] = std::from_chars(parts[3].data(), parts[3].data() + parts[3].size(), n);
    if (ec != std::errc() || p != parts[3].data() + parts[3].size())
      throw InputError("grid '" + std::string(spec) + "': bad point count '" + std::string(parts[3]) + "'");
    g.points = n;
    if (parts.size() == 5) {
      if (parts[4] == "log") g.scale = GridScale::log;
      else if (parts[4] != "linear") throw InputError("grid '" + std::string(spec) + "': scale must be linear or log");
    }
    g.validate();
    return g;
  }
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::string objective;
  std::size_t argmax = 0;  // first record attaining the maximum objective

  const SweepRecord& best() const { return records.at(argmax); }
};

/// Evaluates `protocol` on the Cartesian product of `grid` (first axis
/// outermost). Points are independent and may run on several threads; the
/// record order is always the grid order.
inline SweepResult sweep(std::string_view protocol, std::span<const GridAxis> grid, const ProtocolParameters& fixed,
                         std::string_view objective = "entropy_bits", unsigned workers = 0) {
  require_protocol(protocol);
  if (grid.empty()) throw InputError("sweep: empty grid");
  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
  for (const auto& g : grid) {
    axes.push_back(g.values());
    total *= axes.back().size();
    ProtocolParameters probe;
    probe.set(g.name, g.start);  // rejects unknown names before any work
  }

  std::vector<SweepRecord> records(total);
  auto eval = [&](std::size_t idx) {
    ProtocolParameters p = fixed;
    SweepRecord rec;
    std::size_t rem = idx;
    std::vector<std::size_t> coord(axes.size());
    for (std::size_t d = axes.size(); d-- > 0;) {
      coord[d] = rem % axes[d].size();
      rem /= axes[d].size();
    }
    for (std::size_t d = 0; d < axes.size(); ++d) {
      const double v = axes[d][coord[d]];
      p.set(grid[d].name, v);
      rec.parameters.emplace_back(grid[d].name, v);
    }
    rec.outcomes = evaluate_point(protocol, p);
    records[idx] = std::move(rec);
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) eval(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < total; i += workers) eval(i);
      }));
    for (auto& j : jobs) j.get();
  }

  SweepResult out{std::move(records), std::string(objective), 0};
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const double v = out.records[i].outcome(objective);
    if (v > best) {
      best = v;
      out.argmax = i;
    }
  }
  return out;
}

}  // namespace spinscatter
