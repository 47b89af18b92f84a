#pragma once

// Run configuration: a flat INI file (sections of key = value) that fully
// determines a command, plus "section.key=value" overrides.
//
//   [vowel]     name, f0, duration, area_file
//   [physics]   rho, c, length
//   [grid]      nx, courant, fs, antialias (fir | one_pole | none)
//   [boundary]  zeta, beta, u_scale
//   [source]    oq, cq, amplitude, aspiration
//   [inverse]   control_points, max_evals, optimizer (cmaes | nelder_mead),
//               initial_step, max_lag, probe_fallback, a_min, a_max,
//               anchor_weight, curvature_weight, bounds_weight, zeta_min,
//               zeta_max, w_stft, w_mel, w_probe, w_prior
//   [run]       seed

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "webster/errors.hpp"
#include "webster/inverse.hpp"
#include "webster/io.hpp"
#include "webster/synthesis.hpp"

namespace webster {

struct RunConfig {
  std::string vowel = "a";
  std::optional<double> f0;        // overrides the preset anchor
  std::string area_file;           // overrides the preset area when set
  double zeta = 0.06;
  RenderSetup setup;
  InverseConfig inverse;

  void validate() const {
    if (!(setup.duration > 0.0)) throw ConfigError("vowel.duration must be positive (got " + format_double(setup.duration) + ")");
    if (f0 && !(*f0 > 0.0)) throw ConfigError("vowel.f0 must be positive");
    setup.consts.validate();
    if (!(setup.length > 0.0)) throw ConfigError("physics.length must be positive");
    if (setup.nx < 3) throw ConfigError("grid.nx must be at least 3");
    if (!(setup.courant > 0.0)) throw ConfigError("grid.courant must be positive");
    if (setup.fs != 16000.0) throw ConfigError("grid.fs must be 16000 (audio files are 16 kHz)");
    if (!(zeta >= 0.0)) throw ConfigError("boundary.zeta must be >= 0");
    if (!(setup.beta >= 0.0)) throw ConfigError("boundary.beta must be >= 0");
    setup.source.validate();
    inverse.prior.validate();
    if (inverse.control_points < 4) throw ConfigError("inverse.control_points must be at least 4");
    if (inverse.max_evals < 1) throw ConfigError("inverse.max_evals must be at least 1");
  }
};

namespace detail {

struct ConfigKey {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline int parse_int(const std::string& v, const std::string& key) {
  const double d = parse_double(v, key);
  if (d != std::floor(d)) throw ConfigError(key + ": '" + v + "' is not an integer");
  return static_cast<int>(d);
}

inline const std::map<std::string, ConfigKey>& config_keys() {
  using R = RunConfig;
  auto num = [](auto member) {
    return ConfigKey{[member](R& c, const std::string& v) { member(c) = parse_double(v, "config"); },
                     [member](const R& c) {
                       R copy = c;
                       return format_double(member(copy));
                     }};
  };
  static const std::map<std::string, ConfigKey> keys = {
      {"vowel.name", {[](R& c, const std::string& v) { c.vowel = v; }, [](const R& c) { return c.vowel; }}},
      {"vowel.f0",
       {[](R& c, const std::string& v) {
          if (v.empty()) c.f0.reset();
          else c.f0 = parse_double(v, "vowel.f0");
        },
        [](const R& c) { return c.f0 ? format_double(*c.f0) : std::string(); }}},
      {"vowel.duration", num([](R& c) -> double& { return c.setup.duration; })},
      {"vowel.area_file", {[](R& c, const std::string& v) { c.area_file = v; }, [](const R& c) { return c.area_file; }}},
      {"physics.rho", num([](R& c) -> double& { return c.setup.consts.rho; })},
      {"physics.c", num([](R& c) -> double& { return c.setup.consts.c; })},
      {"physics.length", num([](R& c) -> double& { return c.setup.length; })},
      {"grid.nx",
       {[](R& c, const std::string& v) { c.setup.nx = parse_int(v, "grid.nx"); },
        [](const R& c) { return std::to_string(c.setup.nx); }}},
      {"grid.courant", num([](R& c) -> double& { return c.setup.courant; })},
      {"grid.fs", num([](R& c) -> double& { return c.setup.fs; })},
      {"grid.antialias",
       {[](R& c, const std::string& v) {
          if (v == "fir") c.setup.antialias = Antialias::fir;
          else if (v == "one_pole") c.setup.antialias = Antialias::one_pole;
          else if (v == "none") c.setup.antialias = Antialias::none;
          else throw ConfigError("grid.antialias must be fir, one_pole or none");
        },
        [](const R& c) {
          switch (c.setup.antialias) {
            case Antialias::fir: return std::string("fir");
            case Antialias::one_pole: return std::string("one_pole");
            default: return std::string("none");
          }
        }}},
      {"boundary.zeta", num([](R& c) -> double& { return c.zeta; })},
      {"boundary.beta", num([](R& c) -> double& { return c.setup.beta; })},
      {"boundary.u_scale", num([](R& c) -> double& { return c.setup.u_scale; })},
      {"source.oq", num([](R& c) -> double& { return c.setup.source.oq; })},
      {"source.cq", num([](R& c) -> double& { return c.setup.source.cq; })},
      {"source.amplitude", num([](R& c) -> double& { return c.setup.source.amplitude; })},
      {"source.aspiration", num([](R& c) -> double& { return c.setup.source.aspiration; })},
      {"inverse.control_points",
       {[](R& c, const std::string& v) { c.inverse.control_points = parse_int(v, "inverse.control_points"); },
        [](const R& c) { return std::to_string(c.inverse.control_points); }}},
      {"inverse.max_evals",
       {[](R& c, const std::string& v) {
          const int n = parse_int(v, "inverse.max_evals");
          if (n < 1) throw ConfigError("inverse.max_evals must be at least 1");
          c.inverse.max_evals = static_cast<std::size_t>(n);
        },
        [](const R& c) { return std::to_string(c.inverse.max_evals); }}},
      {"inverse.optimizer",
       {[](R& c, const std::string& v) {
          if (v == "cmaes") c.inverse.optimizer = Optimizer::cmaes;
          else if (v == "nelder_mead") c.inverse.optimizer = Optimizer::nelder_mead;
          else throw ConfigError("inverse.optimizer must be cmaes or nelder_mead");
        },
        [](const R& c) {
          return std::string(c.inverse.optimizer == Optimizer::cmaes ? "cmaes" : "nelder_mead");
        }}},
      {"inverse.initial_step", num([](R& c) -> double& { return c.inverse.initial_step; })},
      {"inverse.max_lag", num([](R& c) -> double& { return c.inverse.max_lag_seconds; })},
      {"inverse.probe_fallback", num([](R& c) -> double& { return c.inverse.probe_fallback_khz; })},
      {"inverse.a_min", num([](R& c) -> double& { return c.inverse.prior.a_min; })},
      {"inverse.a_max", num([](R& c) -> double& { return c.inverse.prior.a_max; })},
      {"inverse.anchor_weight", num([](R& c) -> double& { return c.inverse.prior.anchor_weight; })},
      {"inverse.curvature_weight", num([](R& c) -> double& { return c.inverse.prior.curvature_weight; })},
      {"inverse.bounds_weight", num([](R& c) -> double& { return c.inverse.prior.bounds_weight; })},
      {"inverse.zeta_min", num([](R& c) -> double& { return c.inverse.prior.zeta_min; })},
      {"inverse.zeta_max", num([](R& c) -> double& { return c.inverse.prior.zeta_max; })},
      {"inverse.w_stft", num([](R& c) -> double& { return c.inverse.weights.stft; })},
      {"inverse.w_mel", num([](R& c) -> double& { return c.inverse.weights.mel; })},
      {"inverse.w_probe", num([](R& c) -> double& { return c.inverse.weights.probe; })},
      {"inverse.w_prior", num([](R& c) -> double& { return c.inverse.weights.prior; })},
      {"run.seed",
       {[](R& c, const std::string& v) {
          const double d = parse_double(v, "run.seed");
          if (d < 0.0 || d != std::floor(d)) throw ConfigError("run.seed must be a non-negative integer");
          c.setup.seed = static_cast<std::uint64_t>(d);
          c.inverse.seed = c.setup.seed;
        },
        [](const R& c) { return std::to_string(c.setup.seed); }}},
  };
  return keys;
}

}  // namespace detail

/// Sets one "section.key" entry. Unknown keys are errors.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& keys = detail::config_keys();
  const auto it = keys.find(key);
  if (it == keys.end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second.set(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

/// Applies "section.key=value".
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' must look like section.key=value");
  set_config_value(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline RunConfig parse_config(std::istream& in, const std::string& name = "config") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(name + ": " + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty())
      throw ConfigError(name + ": key '" + section + "' must be inside a [section]");
    for (const auto& [key, value] : entries) set_config_value(cfg, section + "." + key, value.data());
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path.string() + "'");
  return parse_config(f, path.string());
}

/// Canonical INI text: every key, sorted, defaults included.
inline std::string to_ini(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, entry] : detail::config_keys()) {
    const auto dot = key.find('.');
    const auto sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << entry.get(cfg) << '\n';
  }
  return out.str();
}

/// FNV-1a over the canonical text, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_ini(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace webster
