#pragma once

// Command-line front end. parse_args() validates flags (plus an optional JSON
// config file and the SPINSCATTER_FORMAT environment variable) into a
// RunConfig; run() executes it.
//
// Exit status: 0 success, 1 input error, 2 internal invariant violation.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "selftest.hpp"
#include "spinscatter/spinscatter.hpp"

namespace spinscatter::cli {

inline constexpr std::string_view program_name = "spinscatter";
inline constexpr const char* format_env_var = "SPINSCATTER_FORMAT";

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"amplitudes",         "filter",   "kondo", "concentrate",
                                              "entangle-particles", "entangle-impurities", "sweep", "selftest"};
  return names;
}

struct RunConfig {
  std::string command;
  std::map<std::string, std::string> parameters;  // flag name without dashes -> raw text
  std::vector<GridAxis> grid;
  io::Format format = io::Format::table;
  std::optional<std::string> output;
  unsigned workers = 0;

  bool has(const std::string& key) const { return parameters.count(key) != 0; }
  const std::string& get(const std::string& key) const { return parameters.at(key); }
};

/// Thrown by parse_args / run to terminate with a status and a message.
struct CliExit {
  int code;
  std::string message;
};

[[noreturn]] inline void input_error(const std::string& flag, const std::string& what) {
  throw CliExit{1, std::string(program_name) + ": error: " + (flag.empty() ? "" : "--" + flag + ": ") + what};
}

namespace detail {

inline const std::set<std::string>& numeric_keys() {
  static const std::set<std::string> keys{"k",       "r",       "xi",    "r1",  "r2",
                                          "a",       "b",       "a-phase", "b-phase", "half-separation",
                                          "workers"};
  return keys;
}

inline const std::set<std::string>& text_keys() {
  static const std::set<std::string> keys{"axis", "eigenvalues", "mode", "impurity", "initial",
                                          "protocol", "objective", "format", "output"};
  return keys;
}

inline double parse_number(const std::string& flag, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [p, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || p != last) input_error(flag, "expected a number, got '" + text + "'");
  if (!std::isfinite(v)) input_error(flag, "value must be finite");
  return v;
}

inline std::string json_scalar_text(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  input_error(key, "config value must be a string or a number");
}

inline Axis parse_axis(const std::string& text) {
  if (text == "x" || text == "+x") return Axis::x_axis();
  if (text == "y" || text == "+y") return Axis::y_axis();
  if (text == "z" || text == "+z") return Axis::z_axis();
  if (text == "-x") return {-1.0, 0.0, 0.0};
  if (text == "-y") return {0.0, -1.0, 0.0};
  if (text == "-z") return {0.0, 0.0, -1.0};
  double c[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const auto next = text.find(',', pos);
    if ((i < 2) != (next != std::string::npos)) input_error("axis", "expected x,y,z or one of x, y, z, -x, -y, -z");
    c[i] = parse_number("axis", text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    pos = next + 1;
  }
  try {
    return Axis::normalized(c[0], c[1], c[2]);
  } catch (const InputError& e) {
    input_error("axis", e.what());
  }
}

}  // namespace detail

inline RunConfig parse_args(const std::vector<std::string>& args, const char* env_format = std::getenv(format_env_var)) {
  CLI::App app{"Spin-dependent delta-potential scattering: amplitudes, impurity channels and entanglement protocols.",
               std::string(program_name)};
  std::string command;
  app.add_option("command", command,
                 "amplitudes | filter | kondo | concentrate | entangle-particles | entangle-impurities | sweep | "
                 "selftest");

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> opts;
  auto text = [&](const std::string& name, const std::string& help) {
    opts[name] = app.add_option("--" + name, values[name], help);
  };
  text("k", "wave number (> 0)");
  text("r", "impurity coupling strength");
  text("xi", "dimensionless coupling r/k (alternative to --r)");
  text("r1", "coupling of the impurity at -a");
  text("r2", "coupling of the impurity at +a");
  text("a", "magnitude of the |00> coefficient");
  text("b", "magnitude of the |11> coefficient (default sqrt(1-a^2))");
  text("a-phase", "phase of a in radians");
  text("b-phase", "phase of b in radians");
  text("half-separation", "half distance a between the two impurities");
  text("axis", "fixed-impurity axis: x,y,z or one of x, y, z, -x, -y, -z");
  text("eigenvalues", "Kondo eigenvalue preset: paper | standard-pauli");
  text("mode", "two-impurity mode: first-order | exact");
  text("impurity", "concentration impurity: fixed | kondo");
  text("initial", "initial three-qubit basis state as bits, leftmost label first");
  text("protocol", "sweep protocol: amplitudes | concentrate | concentrate-kondo | entangle-particles | "
                   "entangle-impurities");
  text("objective", "sweep argmax objective (default entropy_bits)");
  text("format", "table | csv | json (default from SPINSCATTER_FORMAT, else table)");
  text("output", "write results to this file instead of standard output");
  text("workers", "sweep worker threads (0 = hardware concurrency)");
  std::vector<std::string> grids;
  auto* grid_opt = app.add_option("--grid", grids, "sweep axis name:start:stop:points[:linear|log], repeatable");
  std::string config_path;
  auto* config_opt = app.add_option("--config", config_path, "JSON file with the same keys as the flags");

  std::vector<std::string> argv{std::string(program_name)};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<const char*> cargv;
  for (const auto& s : argv) cargv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    throw CliExit{0, app.help()};
  } catch (const CLI::ParseError& e) {
    input_error("", e.what());
  }

  RunConfig cfg;
  for (const auto& [name, opt] : opts)
    if (opt->count() > 0) cfg.parameters[name] = values[name];
  if (grid_opt->count() > 0) cfg.parameters["grid"] = "";

  if (config_opt->count() > 0) {
    std::ifstream in(config_path);
    if (!in) input_error("config", "cannot read '" + config_path + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      input_error("config", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) input_error("config", "top level must be an object");
    for (const auto& [key, v] : doc.items()) {
      if (key == "command") {
        if (command.empty()) command = detail::json_scalar_text(key, v);
        continue;
      }
      if (key == "grid") {
        if (grid_opt->count() > 0) continue;
        if (v.is_string()) grids = {v.get<std::string>()};
        else if (v.is_array()) {
          grids.clear();
          for (const auto& g : v) grids.push_back(detail::json_scalar_text(key, g));
        } else {
          input_error("grid", "config value must be a string or an array of strings");
        }
        cfg.parameters["grid"] = "";
        continue;
      }
      if (!detail::numeric_keys().count(key) && !detail::text_keys().count(key))
        input_error(key, "unknown key in config file");
      if (!cfg.has(key)) cfg.parameters[key] = detail::json_scalar_text(key, v);
    }
  }
  cfg.parameters.erase("grid");

  if (command.empty()) input_error("", "missing command (see --help)");
  if (std::find(command_names().begin(), command_names().end(), command) == command_names().end())
    input_error("", "unknown command '" + command + "'");
  cfg.command = command;

  for (const auto& [key, raw] : cfg.parameters)
    if (detail::numeric_keys().count(key)) detail::parse_number(key, raw);

  if (cfg.has("k") && !(detail::parse_number("k", cfg.get("k")) > 0.0)) input_error("k", "k must be positive");
  if (cfg.has("workers")) {
    const double w = detail::parse_number("workers", cfg.get("workers"));
    if (w < 0.0 || w != std::floor(w)) input_error("workers", "must be a non-negative integer");
    cfg.workers = static_cast<unsigned>(w);
  }
  if (cfg.has("half-separation") && !(detail::parse_number("half-separation", cfg.get("half-separation")) > 0.0))
    input_error("half-separation", "half separation must be positive");
  if (cfg.has("axis")) detail::parse_axis(cfg.get("axis"));
  if (cfg.has("eigenvalues") && cfg.get("eigenvalues") != "paper" && cfg.get("eigenvalues") != "standard-pauli")
    input_error("eigenvalues", "expected paper or standard-pauli");
  if (cfg.has("mode") && cfg.get("mode") != "first-order" && cfg.get("mode") != "exact")
    input_error("mode", "expected first-order or exact");
  if (cfg.has("impurity") && cfg.get("impurity") != "fixed" && cfg.get("impurity") != "kondo")
    input_error("impurity", "expected fixed or kondo");
  if (cfg.has("initial")) {
    const auto& bits = cfg.get("initial");
    if (bits.size() != 3 || bits.find_first_not_of("01") != std::string::npos)
      input_error("initial", "expected three bits such as 001");
  }

  if (cfg.has("format")) {
    try {
      cfg.format = io::parse_format(cfg.get("format"));
    } catch (const InputError& e) {
      input_error("format", e.what());
    }
  } else if (env_format != nullptr && *env_format != '\0') {
    try {
      cfg.format = io::parse_format(env_format);
    } catch (const InputError& e) {
      input_error("", std::string(format_env_var) + ": " + e.what());
    }
  }
  if (cfg.has("output")) cfg.output = cfg.get("output");

  for (const auto& g : grids) {
    try {
      cfg.grid.push_back(GridAxis::parse(g));
    } catch (const InputError& e) {
      input_error("grid", e.what());
    }
  }

  auto require = [&](const std::string& key) {
    if (!cfg.has(key)) input_error(key, "missing required parameter for '" + command + "'");
  };
  auto require_coupling = [&] {
    if (!cfg.has("r") && !cfg.has("xi")) input_error("r", "missing required parameter for '" + command + "'");
  };
  const auto& c = cfg.command;
  if (c == "amplitudes" || c == "entangle-particles") {
    require("k");
    require_coupling();
  } else if (c == "filter" || c == "kondo") {
    require("k");
    require("r");
  } else if (c == "concentrate") {
    require("k");
    require("a");
  } else if (c == "entangle-impurities") {
    require("k");
    if (!cfg.has("r")) {
      require("r1");
      require("r2");
    }
    if (cfg.has("mode") && cfg.get("mode") == "exact") require("half-separation");
  } else if (c == "sweep") {
    require("protocol");
    if (cfg.grid.empty()) input_error("grid", "missing required parameter for 'sweep'");
    try {
      require_protocol(cfg.get("protocol"));
    } catch (const InputError& e) {
      input_error("protocol", e.what());
    }
    bool k_swept = false;
    for (const auto& g : cfg.grid) k_swept = k_swept || g.name == "k";
    if (!cfg.has("k") && !k_swept) input_error("k", "missing required parameter for 'sweep' (flag or grid axis)");
    for (const auto& g : cfg.grid) {
      if (g.name == "k" && !(g.start > 0.0)) input_error("grid", "k must be positive");
      try {
        ProtocolParameters probe;
        probe.set(g.name, g.start);
      } catch (const InputError& e) {
        input_error("grid", e.what());
      }
    }
    if (cfg.has("objective")) {
      const auto keys = outcome_keys(cfg.get("protocol"));
      if (std::find(keys.begin(), keys.end(), cfg.get("objective")) == keys.end())
        input_error("objective", "unknown objective '" + cfg.get("objective") + "' for this protocol");
    }
  }
  return cfg;
}

inline ProtocolParameters to_parameters(const RunConfig& cfg) {
  ProtocolParameters p;
  for (const auto& [key, raw] : cfg.parameters)
    if (detail::numeric_keys().count(key) && key != "workers") p.set(key, detail::parse_number(key, raw));
  if (cfg.has("axis")) p.axis = detail::parse_axis(cfg.get("axis")).vector();
  if (cfg.has("eigenvalues")) p.eigenvalues = cfg.get("eigenvalues");
  if (cfg.has("mode")) p.mode = parse_impurity_mode(cfg.get("mode"));
  if (cfg.has("initial")) p.initial = cfg.get("initial");
  return p;
}

namespace detail {

inline std::vector<io::Row> operator_rows(const OperatorAmplitudes& amps) {
  std::vector<io::Row> rows;
  for (const auto& [name, op] : {std::pair<std::string, const SpinOperator*>{"T", &amps.T}, {"R", &amps.R}})
    for (Eigen::Index r = 0; r < op->dim(); ++r)
      for (Eigen::Index c = 0; c < op->dim(); ++c)
        rows.push_back({{"operator", name},
                        {"row", static_cast<double>(r)},
                        {"col", static_cast<double>(c)},
                        {"value", (*op)(r, c)}});
  return rows;
}

inline std::vector<io::Row> outcome_rows(const ProtocolResult& res, std::optional<double> r = std::nullopt,
                                         std::optional<double> residual = std::nullopt) {
  std::vector<io::Row> rows;
  for (const auto& o : res.outcomes) {
    io::Row row{{"branch", o.branch_label}};
    if (r) row.emplace_back("r", *r);
    row.emplace_back("probability", o.probability);
    row.emplace_back("conditional_probability", o.conditional_probability);
    row.emplace_back("entropy_bits", o.entropy_bits);
    row.emplace_back("concurrence", o.concurrence.value_or(0.0));
    if (residual) row.emplace_back("condition_residual", *residual);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void execute(const RunConfig& cfg, std::ostream& out) {
  const auto p = to_parameters(cfg);
  const auto& c = cfg.command;

  if (c == "amplitudes") {
    const auto s = scalar_amplitudes(Coupling(p.require_coupling()), WaveNumber(p.k));
    const io::Row row{{"S", s.S}, {"R", s.R}, {"abs_S2", std::norm(s.S)}, {"abs_R2", std::norm(s.R)}, {"xi", s.xi}};
    if (cfg.format == io::Format::json) io::emit_json_object(out, row);
    else io::emit(out, std::vector<io::Row>{row}, cfg.format);
    return;
  }
  if (c == "filter") {
    const FixedImpuritySpec spec{Coupling(p.require_coupling()), Axis::normalized(p.axis.x(), p.axis.y(), p.axis.z())};
    io::emit(out, operator_rows(fixed_filter_operators(spec, WaveNumber(p.k))), cfg.format);
    return;
  }
  if (c == "kondo") {
    const KondoImpuritySpec spec{Coupling(p.require_coupling()), KondoEigenvalues::from_preset(p.eigenvalues)};
    io::emit(out, operator_rows(kondo_operators(spec, WaveNumber(p.k))), cfg.format);
    return;
  }
  if (c == "concentrate") {
    const WaveNumber k(p.k);
    const auto coeffs = p.coefficients();
    if (cfg.has("impurity") && cfg.get("impurity") == "kondo") {
      const auto ev = KondoEigenvalues::from_preset(p.eigenvalues);
      const auto r = p.coupling() ? Coupling(*p.coupling()) : optimal_coupling_kondo(coeffs, k, ev);
      const auto res = concentrate_kondo(coeffs, k, {r, ev});
      io::emit(out, outcome_rows(res, r.value(), res.condition_residual), cfg.format);
    } else {
      const auto r = p.coupling() ? Coupling(*p.coupling()) : optimal_coupling_fixed(coeffs, k);
      const auto res = concentrate_fixed(coeffs, k, {r, Axis::normalized(p.axis.x(), p.axis.y(), p.axis.z())});
      io::emit(out, outcome_rows(res, r.value()), cfg.format);
    }
    return;
  }
  if (c == "entangle-particles" || c == "entangle-impurities") {
    io::emit(out, outcome_rows(run_protocol(c, p)), cfg.format);
    return;
  }
  if (c == "sweep") {
    const auto& protocol = cfg.get("protocol");
    const std::string objective = cfg.has("objective") ? cfg.get("objective")
                                  : protocol == "amplitudes" ? "abs_S2"
                                                             : "entropy_bits";
    const auto result = sweep(protocol, cfg.grid, p, objective, cfg.workers);
    std::vector<std::string> header;
    for (const auto& g : cfg.grid) header.push_back(g.name);
    for (const auto& key : outcome_keys(protocol)) header.push_back(key);
    io::emit(out, io::to_rows(result.records), cfg.format, header);
    if (cfg.format == io::Format::table) {
      out << "argmax " << objective << ":";
      for (const auto& [name, v] : result.best().parameters) out << ' ' << name << '=' << io::format_number(v);
      out << " -> " << io::format_number(result.best().outcome(objective)) << '\n';
    }
    return;
  }
  if (c == "selftest") {
    const auto checks = run_selftest();
    std::vector<io::Row> rows;
    bool ok = true;
    for (const auto& chk : checks) {
      ok = ok && chk.passed;
      rows.push_back({{"check", chk.name},
                      {"status", std::string(chk.passed ? "PASS" : "FAIL")},
                      {"worst", chk.worst},
                      {"tolerance", chk.tolerance}});
    }
    if (cfg.format == io::Format::table) {
      for (const auto& chk : checks)
        out << (chk.passed ? "PASS " : "FAIL ") << chk.name << " (worst " << io::format_number(chk.worst)
            << ", tol " << io::format_number(chk.tolerance) << ")\n";
    } else {
      io::emit(out, rows, cfg.format);
    }
    if (!ok) throw InternalFault("selftest failed");
    return;
  }
  throw InputError("unknown command '" + c + "'");
}

}  // namespace detail

/// Executes `cfg`, writing results to `out` (or cfg.output) and diagnostics to
/// `err`. Returns the process exit status.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string prefix = std::string(program_name) + ": error: ";
  try {
    std::ostringstream buffer;
    detail::execute(cfg, buffer);
    if (cfg.output) {
      std::ofstream file(*cfg.output, std::ios::binary | std::ios::trunc);
      if (!file) {
        err << prefix << "--output: cannot open '" << *cfg.output << "'\n";
        return 1;
      }
      file << buffer.str();
      file.flush();
      if (!file) {
        err << prefix << "--output: write failed for '" << *cfg.output << "'\n";
        return 1;
      }
    } else {
      out << buffer.str();
      out.flush();
    }
    return 0;
  } catch (const InputError& e) {
    err << prefix << e.what() << '\n';
    return 1;
  } catch (const InternalFault& e) {
    err << std::string(program_name) << ": internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << std::string(program_name) << ": internal error: " << e.what() << '\n';
    return 2;
  }
}

inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                      const char* env_format = std::getenv(format_env_var)) {
  RunConfig cfg;
  try {
    cfg = parse_args(args, env_format);
  } catch (const CliExit& e) {
    (e.code == 0 ? out : err) << e.message << (e.message.empty() || e.message.back() == '\n' ? "" : "\n");
    return e.code;
  }
  return run(cfg, out, err);
}

}  // namespace spinscatter::cli
