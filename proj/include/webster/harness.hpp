#pragma once

// Commands behind the CLI. Each one reads its inputs, writes its outputs into
// an output directory and returns what it wrote. Nothing here depends on the
// wall clock or on absolute output paths, so reruns are byte-identical.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "webster/config.hpp"
#include "webster/ddsp.hpp"
#include "webster/errors.hpp"
#include "webster/inverse.hpp"
#include "webster/io.hpp"
#include "webster/metrics.hpp"
#include "webster/presets.hpp"
#include "webster/synthesis.hpp"
#include "webster/wav.hpp"

namespace webster {

inline constexpr const char* kDefaultsVersion = "webster-defaults-1";
inline constexpr double kPitchRate = 100.0;

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct MetricRecord {
  std::string vowel;
  std::string axis;
  std::string condition;
  std::string metric;
  double value = 0.0;
};

inline std::string csv_value(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

inline void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& rows) {
  auto f = detail::open_output(path);
  f << "vowel,axis,condition,metric,value\n";
  for (const auto& r : rows)
    f << r.vowel << ',' << r.axis << ',' << r.condition << ',' << r.metric << ',' << csv_value(r.value) << '\n';
}

/// Sidecar metadata: provenance, command-specific entries, then the full
/// canonical config.
inline void write_metadata(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
                           const KeyValues& entries) {
  auto f = detail::open_output(path);
  f << "# webster run metadata\n[provenance]\n";
  f << "command = " << command << '\n';
  f << "config_hash = " << config_hash(cfg) << '\n';
  f << "seed = " << cfg.setup.seed << '\n';
  f << "defaults = " << kDefaultsVersion << '\n';
  if (!entries.empty()) {
    f << "\n[" << command << "]\n";
    for (const auto& [k, v] : entries) f << k << " = " << v << '\n';
  }
  f << '\n' << to_ini(cfg);
}

/// Filename up to the first dot: "a_fit.params.txt" -> "a_fit".
inline std::string base_name(const std::filesystem::path& p) {
  const auto name = p.filename().string();
  return name.substr(0, name.find('.'));
}

inline double f0_anchor(const RunConfig& cfg) { return cfg.f0 ? *cfg.f0 : vowel_preset(cfg.vowel).f0_anchor; }

inline AreaFunction config_area(const RunConfig& cfg) {
  if (!cfg.area_file.empty()) {
    const auto a = read_area(cfg.area_file);
    return AreaFunction(cfg.setup.length, std::vector<double>(a.samples().begin(), a.samples().end()));
  }
  return vowel_preset(cfg.vowel, cfg.setup.length).area;
}

inline PitchTrajectory config_pitch(const RunConfig& cfg) {
  return PitchTrajectory::constant(f0_anchor(cfg), cfg.setup.duration, kPitchRate);
}

/// HNR search range around a pitch track.
inline double hnr_of(const AudioSignal& a, const PitchTrajectory& pitch) {
  return hnr_framewise(a, 0.6 * pitch.min(), 1.6 * pitch.max());
}

inline KeyValues grid_entries(const GridSpec& g, const PhysicalConstants& consts) {
  return {{"realized_nx", std::to_string(g.nx)},
          {"realized_dx", format_double(g.dx)},
          {"realized_dt", format_double(g.dt)},
          {"realized_courant", format_double(consts.c * g.dt / g.dx)},
          {"decimation", std::to_string(g.decimation())}};
}

inline RunConfig checked(RunConfig cfg) {
  cfg.validate();
  return cfg;
}

// --- render ---------------------------------------------------------------

struct RenderOutput {
  AudioSignal audio;  // as written, peak-normalized
  std::filesystem::path wav, pitch, params, meta;
};

/// Reference render of a preset (or area file): WAV, pitch track, the true
/// parameters and metadata.
inline RenderOutput cmd_render(const RunConfig& config, const std::filesystem::path& out_dir,
                               const std::string& name = "") {
  const RunConfig cfg = checked(config);
  const auto area = config_area(cfg);
  const auto pitch = config_pitch(cfg);
  const auto grid = cfg.setup.grid();
  const auto raw = render_with_grid(area, cfg.zeta, pitch, cfg.setup, grid);

  std::filesystem::create_directories(out_dir);
  const std::string stem = name.empty() ? cfg.vowel : name;
  RenderOutput out;
  out.audio = peak_normalize(raw, -1.0);
  out.wav = out_dir / (stem + ".wav");
  out.pitch = out_dir / (stem + ".pitch.txt");
  out.params = out_dir / (stem + ".params.txt");
  out.meta = out_dir / (stem + ".meta");
  write_wav(out.wav, out.audio);
  write_pitch(out.pitch, pitch);

  ParameterFile truth{area, cfg.zeta, {}};
  truth.provenance = {{"config_hash", config_hash(cfg)},
                      {"seed", std::to_string(cfg.setup.seed)},
                      {"defaults", kDefaultsVersion},
                      {"source", "render"},
                      {"vowel", cfg.vowel}};
  write_parameters(out.params, truth);

  auto entries = grid_entries(grid, cfg.setup.consts);
  entries.emplace_back("samples", std::to_string(out.audio.size()));
  entries.emplace_back("f0", format_double(f0_anchor(cfg)));
  entries.emplace_back("peak_gain", format_double(rms(raw) > 0.0 ? rms(out.audio) / rms(raw) : 0.0));
  write_metadata(out.meta, "render", cfg, entries);
  return out;
}

// --- invert ---------------------------------------------------------------

struct InvertOutput {
  FitResult fit;
  std::filesystem::path params, loss_trace, report;
};

inline AudioSignal read_audio_16k(const std::filesystem::path& path) {
  auto a = read_wav(path);
  if (a.fs != 16000.0)
    throw SampleRateError("'" + path.string() + "' is " + format_double(a.fs) +
                          " Hz; expected 16000 Hz (resample it before use)");
  return a;
}

inline InvertOutput cmd_invert(const std::filesystem::path& reference_wav, const std::filesystem::path& pitch_file,
                               const RunConfig& config, const std::filesystem::path& out_dir,
                               const std::string& name = "") {
  const RunConfig cfg = checked(config);
  const auto reference = read_audio_16k(reference_wav);
  const auto pitch = read_pitch(pitch_file);
  const InverseProblem problem(reference, pitch, cfg.setup, cfg.inverse);

  InvertOutput out;
  out.fit = estimate(problem);
  const auto& fit = out.fit;

  std::filesystem::create_directories(out_dir);
  const std::string stem = name.empty() ? base_name(reference_wav) + "_fit" : name;
  out.params = out_dir / (stem + ".params.txt");
  out.loss_trace = out_dir / (stem + ".loss_trace.csv");
  out.report = out_dir / (stem + ".report.txt");

  ParameterFile exported{fit.control, fit.zeta, {}};
  exported.provenance = {{"config_hash", config_hash(cfg)},
                         {"seed", std::to_string(cfg.setup.seed)},
                         {"defaults", kDefaultsVersion},
                         {"source", "invert"},
                         {"reference", reference_wav.filename().string()},
                         {"vowel", cfg.vowel},
                         {"loss", format_double(fit.loss)},
                         {"evals", std::to_string(fit.evals)}};
  write_parameters(out.params, exported);

  {
    auto f = detail::open_output(out.loss_trace);
    f << "eval,loss\n";
    for (std::size_t i = 0; i < fit.loss_trace.size(); ++i) f << i + 1 << ',' << csv_value(fit.loss_trace[i]) << '\n';
  }

  KeyValues entries = {{"reference", reference_wav.filename().string()},
                       {"pitch", pitch_file.filename().string()},
                       {"evals", std::to_string(fit.evals)},
                       {"loss", format_double(fit.loss)},
                       {"zeta", format_double(fit.zeta)},
                       {"lsd_db", csv_value(fit.final_metrics.lsd_db)},
                       {"mstft", csv_value(fit.final_metrics.mstft)},
                       {"log_mel", csv_value(fit.final_metrics.log_mel)},
                       {"formant_mae_hz", fit.final_metrics.formant_mae_hz
                                              ? format_double(*fit.final_metrics.formant_mae_hz)
                                              : std::string("nan")},
                       {"convergence_warning", fit.convergence_warning ? "true" : "false"}};
  for (std::size_t i = 0; i < fit.warnings.size(); ++i) entries.emplace_back("warning" + std::to_string(i + 1), fit.warnings[i]);
  write_metadata(out.report, "invert", cfg, entries);
  return out;
}

// --- postrender -----------------------------------------------------------

/// Changes applied on top of the config when re-rendering exported parameters.
struct PostrenderOverrides {
  std::vector<std::string> config;  // "section.key=value"
  double pitch_ratio = 1.0;
  double zeta_ratio = 1.0;

  KeyValues entries() const {
    KeyValues kv;
    for (std::size_t i = 0; i < config.size(); ++i) kv.emplace_back("override" + std::to_string(i + 1), config[i]);
    kv.emplace_back("pitch_ratio", format_double(pitch_ratio));
    kv.emplace_back("zeta_ratio", format_double(zeta_ratio));
    return kv;
  }
};

struct PostrenderPlan {
  RunConfig cfg;
  AreaFunction area;
  double zeta = 0.0;
  PitchTrajectory pitch;
};

inline PostrenderPlan plan_postrender(const ParameterFile& params, const PitchTrajectory& pitch, RunConfig cfg,
                                      const PostrenderOverrides& ov) {
  for (const auto& o : ov.config) apply_override(cfg, o);
  if (!(ov.pitch_ratio > 0.0)) throw ConfigError("pitch ratio must be positive");
  if (!(ov.zeta_ratio > 0.0)) throw ConfigError("zeta ratio must be positive");
  cfg.setup.length = params.area.length();
  cfg.zeta = params.zeta * ov.zeta_ratio;
  cfg.validate();
  const double span = static_cast<double>(pitch.f0.size() - 1) / pitch.rate;
  cfg.setup.duration = std::min(cfg.setup.duration, span);
  return {cfg, params.area, cfg.zeta, pitch_shift(pitch, ov.pitch_ratio)};
}

inline AudioSignal render_plan(const PostrenderPlan& plan) {
  return render(plan.area, plan.zeta, plan.pitch, plan.cfg.setup);
}

struct PostrenderOutput {
  AudioSignal audio;
  std::filesystem::path wav, meta;
};

inline PostrenderOutput cmd_postrender(const std::filesystem::path& params_file, const std::filesystem::path& pitch_file,
                                       const RunConfig& config, const PostrenderOverrides& ov,
                                       const std::filesystem::path& out_dir, const std::string& name = "") {
  const auto params = read_parameters(params_file);
  const auto plan = plan_postrender(params, read_pitch(pitch_file), config, ov);
  const auto raw = render_plan(plan);

  std::filesystem::create_directories(out_dir);
  const std::string stem = name.empty() ? base_name(params_file) + "_post" : name;
  PostrenderOutput out;
  out.audio = peak_normalize(raw, -1.0);
  out.wav = out_dir / (stem + ".wav");
  out.meta = out_dir / (stem + ".meta");
  write_wav(out.wav, out.audio);

  KeyValues entries = {{"params", params_file.filename().string()}, {"pitch", pitch_file.filename().string()}};
  for (const auto& kv : ov.entries()) entries.push_back(kv);
  entries.emplace_back("zeta", format_double(plan.zeta));
  for (const auto& kv : grid_entries(plan.cfg.setup.grid(), plan.cfg.setup.consts)) entries.push_back(kv);
  write_metadata(out.meta, "postrender", plan.cfg, entries);
  return out;
}

// --- evaluate -------------------------------------------------------------

/// Aligned, RMS-normalized comparison. HNR is reported for both inputs and
/// as their difference; a failed estimate is written as nan.
inline std::vector<MetricRecord> evaluate_pair(const AudioSignal& reference, const AudioSignal& candidate,
                                               const PitchTrajectory& pitch, const std::string& vowel,
                                               const std::string& condition, double max_lag_seconds = 0.05) {
  if (reference.fs != candidate.fs) throw SampleRateError("evaluate: inputs have different sample rates");
  const auto m = envelope_metrics(reference, candidate, max_lag_seconds);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto hnr = [&](const AudioSignal& a) {
    try {
      return hnr_of(a, pitch);
    } catch (const UnvoicedError&) {
      return nan;
    }
  };
  const double h_ref = hnr(reference);
  const double h_cand = hnr(candidate);
  std::vector<MetricRecord> rows;
  auto add = [&](const char* metric, double v) { rows.push_back({vowel, "none", condition, metric, v}); };
  add("mstft", m.mstft);
  add("lsd", m.lsd_db);
  add("log_mel", m.log_mel);
  add("formant_mae", m.formant_mae_hz.value_or(nan));
  add("hnr_reference", h_ref);
  add("hnr_candidate", h_cand);
  add("delta_hnr", h_cand - h_ref);
  return rows;
}

struct EvaluateOutput {
  std::vector<MetricRecord> rows;
  std::filesystem::path csv;
};

/// The pitch file is optional; without it the config's f0 anchor bounds the
/// HNR search.
inline EvaluateOutput cmd_evaluate(const std::filesystem::path& reference_wav, const std::filesystem::path& candidate_wav,
                                   const RunConfig& config, const std::filesystem::path& out_dir,
                                   const std::optional<std::filesystem::path>& pitch_file = std::nullopt,
                                   const std::string& name = "") {
  const RunConfig cfg = checked(config);
  const auto ref = read_wav(reference_wav);
  const auto cand = read_wav(candidate_wav);
  if (ref.fs != cand.fs)
    throw SampleRateError("evaluate: '" + reference_wav.filename().string() + "' is " + format_double(ref.fs) +
                          " Hz but '" + candidate_wav.filename().string() + "' is " + format_double(cand.fs) + " Hz");
  if (ref.fs != 16000.0) throw SampleRateError("evaluate: inputs must be 16000 Hz");
  const auto pitch = pitch_file ? read_pitch(*pitch_file) : config_pitch(cfg);

  EvaluateOutput out;
  out.rows = evaluate_pair(ref, cand, pitch, cfg.vowel, base_name(candidate_wav), cfg.inverse.max_lag_seconds);
  std::filesystem::create_directories(out_dir);
  const std::string stem = name.empty() ? base_name(candidate_wav) + "_vs_" + base_name(reference_wav) : name;
  out.csv = out_dir / (stem + ".metrics.csv");
  write_metrics_csv(out.csv, out.rows);
  write_metadata(out_dir / (stem + ".metrics.meta"), "evaluate", cfg,
                 {{"reference", reference_wav.filename().string()}, {"candidate", candidate_wav.filename().string()}});
  return out;
}

// --- sweep ----------------------------------------------------------------

enum class SweepAxis { grid_cfl, source, pitch, zeta };

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::grid_cfl: return "grid_cfl";
    case SweepAxis::source: return "source";
    case SweepAxis::pitch: return "pitch";
    default: return "zeta";
  }
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "grid_cfl") return SweepAxis::grid_cfl;
  if (s == "source") return SweepAxis::source;
  if (s == "pitch") return SweepAxis::pitch;
  if (s == "zeta") return SweepAxis::zeta;
  throw ConfigError("sweep axis must be grid_cfl, source, pitch or zeta (got '" + s + "')");
}

/// Condition values by axis:
///   grid_cfl  "<nx factor>" or "<nx factor>@<courant>"; factor f maps nx to (nx-1)*f+1
///   source    "base" or "key=value[&key=value...]" with keys beta, oq, cq, amplitude, aspiration
///   pitch     ratio applied to the whole f0 track
///   zeta      ratio applied to the exported zeta
struct SweepSpec {
  SweepAxis axis = SweepAxis::pitch;
  std::vector<std::string> values;
  std::size_t baseline_index = 0;

  void validate() const {
    if (values.empty()) throw ConfigError("sweep: values must not be empty");
    if (baseline_index >= values.size())
      throw ConfigError("sweep: baseline index " + std::to_string(baseline_index) + " is out of range for " +
                        std::to_string(values.size()) + " values");
  }
};

/// One [section] per axis:
///
///   [pitch]
///   axis = pitch
///   values = 0.9, 1.0, 1.1
///   baseline = 1
inline std::vector<SweepSpec> parse_sweep_specs(std::istream& in, const std::string& name = "sweep") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(name + ": " + e.what());
  }
  std::vector<SweepSpec> specs;
  for (const auto& [section, entries] : tree) {
    SweepSpec s;
    s.axis = parse_axis(entries.get<std::string>("axis", section));
    std::string list = entries.get<std::string>("values", "");
    std::replace(list.begin(), list.end(), ',', ' ');
    std::istringstream ls(list);
    for (std::string v; ls >> v;) s.values.push_back(v);
    const auto b = parse_double(entries.get<std::string>("baseline", "0"), name + " [" + section + "] baseline");
    if (b < 0.0 || b != std::floor(b)) throw ConfigError(name + " [" + section + "]: baseline must be an index");
    s.baseline_index = static_cast<std::size_t>(b);
    for (const auto& [key, unused] : entries)
      if (key != "axis" && key != "values" && key != "baseline")
        throw ConfigError(name + " [" + section + "]: unknown key '" + key + "'");
    try {
      s.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(name + " [" + section + "]: " + e.what());
    }
    specs.push_back(std::move(s));
  }
  if (specs.empty()) throw ConfigError(name + ": no sweep sections");
  return specs;
}

inline std::vector<SweepSpec> load_sweep_specs(const std::filesystem::path& path) {
  auto f = detail::open_input(path);
  return parse_sweep_specs(f, path.string());
}

inline PostrenderOverrides condition_overrides(SweepAxis axis, const std::string& value, const RunConfig& cfg) {
  PostrenderOverrides ov;
  switch (axis) {
    case SweepAxis::grid_cfl: {
      const auto at = value.find('@');
      const double factor = parse_double(value.substr(0, at), "grid_cfl factor");
      if (!(factor > 0.0)) throw ConfigError("grid_cfl factor must be positive");
      const long nx = std::lround((cfg.setup.nx - 1) * factor) + 1;
      ov.config.push_back("grid.nx=" + std::to_string(nx));
      if (at != std::string::npos) ov.config.push_back("grid.courant=" + value.substr(at + 1));
      break;
    }
    case SweepAxis::source: {
      if (value == "base") break;
      std::istringstream parts(value);
      for (std::string item; std::getline(parts, item, '&');) {
        const auto eq = item.find('=');
        const auto key = item.substr(0, eq);
        if (eq == std::string::npos) throw ConfigError("source condition '" + item + "' must be key=value");
        if (key == "beta") ov.config.push_back("boundary." + item);
        else if (key == "oq" || key == "cq" || key == "amplitude" || key == "aspiration") ov.config.push_back("source." + item);
        else throw ConfigError("source condition key must be beta, oq, cq, amplitude or aspiration (got '" + key + "')");
      }
      break;
    }
    case SweepAxis::pitch: ov.pitch_ratio = parse_double(value, "pitch ratio"); break;
    case SweepAxis::zeta: ov.zeta_ratio = parse_double(value, "zeta ratio"); break;
  }
  return ov;
}

struct SweepCondition {
  std::string vowel;
  SweepAxis axis = SweepAxis::pitch;
  std::string value;
  bool baseline = false;
  double delta_lsd = 0.0;  // LSD of this render against the baseline render
  double hnr = 0.0;
  double delta_hnr = 0.0;
};

namespace detail {

template <class F>
auto run_parallel(std::size_t n, F&& job) {
  using R = decltype(job(std::size_t{0}));
  std::vector<R> out;
  out.reserve(n);
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<R>> batch;
    for (std::size_t i = start; i < std::min(n, start + width); ++i)
      batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async, job, i));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

inline double nan_safe_hnr(const AudioSignal& a, const PitchTrajectory& p) {
  try {
    return hnr_of(a, p);
  } catch (const UnvoicedError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace detail

/// Renders every condition of one axis and compares each against the
/// baseline condition. Renders are written when `out_dir` is set.
inline std::vector<SweepCondition> run_sweep(const ParameterFile& params, const PitchTrajectory& pitch,
                                             const RunConfig& cfg, const SweepSpec& spec, const std::string& vowel,
                                             const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                                             double max_lag_seconds = 0.05) {
  spec.validate();
  struct Rendered {
    AudioSignal audio;
    PitchTrajectory pitch;
  };
  const auto renders = detail::run_parallel(spec.values.size(), [&](std::size_t i) {
    const auto plan = plan_postrender(params, pitch, cfg, condition_overrides(spec.axis, spec.values[i], cfg));
    Rendered r{render_plan(plan), plan.pitch};
    if (out_dir)
      write_wav(*out_dir / (vowel + "_sweep_" + axis_name(spec.axis) + "_" + std::to_string(i) + ".wav"),
                peak_normalize(r.audio, -1.0));
    return r;
  });
  const auto& base = renders[spec.baseline_index];
  const double base_hnr = detail::nan_safe_hnr(base.audio, base.pitch);
  std::vector<SweepCondition> out;
  for (std::size_t i = 0; i < renders.size(); ++i) {
    SweepCondition c{vowel, spec.axis, spec.values[i], i == spec.baseline_index, 0.0, base_hnr, 0.0};
    if (!c.baseline) {
      const auto [a, b] = align_for_metrics(base.audio, renders[i].audio, max_lag_seconds);
      c.delta_lsd = lsd(a, b);
      c.hnr = detail::nan_safe_hnr(renders[i].audio, renders[i].pitch);
      c.delta_hnr = c.hnr - base_hnr;
    }
    out.push_back(c);
  }
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
}

struct AxisSummary {
  SweepAxis axis = SweepAxis::pitch;
  std::size_t conditions = 0;  // non-baseline conditions pooled across vowels
  double median_abs_delta_lsd = 0.0;
  double median_abs_delta_hnr = 0.0;
};

/// Medians of absolute deltas over non-baseline conditions, pooled across
/// vowels, one entry per axis in first-seen order. NaN deltas are skipped.
/// An axis with only its baseline reports zero deltas.
inline std::vector<AxisSummary> summarize_sweep(const std::vector<SweepCondition>& conds) {
  std::vector<AxisSummary> out;
  for (const auto& c : conds) {
    if (std::none_of(out.begin(), out.end(), [&](const AxisSummary& s) { return s.axis == c.axis; }))
      out.push_back({c.axis, 0, 0.0, 0.0});
  }
  for (auto& s : out) {
    std::vector<double> dl, dh;
    for (const auto& c : conds) {
      if (c.axis != s.axis || c.baseline) continue;
      ++s.conditions;
      if (std::isfinite(c.delta_lsd)) dl.push_back(std::abs(c.delta_lsd));
      if (std::isfinite(c.delta_hnr)) dh.push_back(std::abs(c.delta_hnr));
    }
    s.median_abs_delta_lsd = s.conditions == 0 ? 0.0 : median(dl);
    s.median_abs_delta_hnr = s.conditions == 0 ? 0.0 : median(dh);
  }
  return out;
}

inline std::vector<MetricRecord> sweep_records(const std::vector<SweepCondition>& conds) {
  std::vector<MetricRecord> rows;
  for (const auto& c : conds) {
    rows.push_back({c.vowel, axis_name(c.axis), c.value, "delta_lsd", c.delta_lsd});
    rows.push_back({c.vowel, axis_name(c.axis), c.value, "hnr", c.hnr});
    rows.push_back({c.vowel, axis_name(c.axis), c.value, "delta_hnr", c.delta_hnr});
  }
  return rows;
}

inline std::vector<MetricRecord> summary_records(const std::vector<AxisSummary>& sums, const std::string& vowel) {
  std::vector<MetricRecord> rows;
  for (const auto& s : sums) {
    rows.push_back({vowel, axis_name(s.axis), "median", "abs_delta_lsd", s.median_abs_delta_lsd});
    rows.push_back({vowel, axis_name(s.axis), "median", "abs_delta_hnr", s.median_abs_delta_hnr});
  }
  return rows;
}

struct SweepOutput {
  std::vector<SweepCondition> conditions;
  std::vector<AxisSummary> summary;
  std::filesystem::path csv, summary_csv, meta;
};

inline SweepOutput cmd_sweep(const std::filesystem::path& params_file, const std::filesystem::path& pitch_file,
                             const std::filesystem::path& spec_file, const RunConfig& config,
                             const std::filesystem::path& out_dir, const std::string& name = "") {
  const RunConfig cfg = checked(config);
  const auto params = read_parameters(params_file);
  const auto pitch = read_pitch(pitch_file);
  const auto specs = load_sweep_specs(spec_file);
  const auto it = params.provenance.find("vowel");
  const std::string vowel = it != params.provenance.end() ? it->second : cfg.vowel;

  std::filesystem::create_directories(out_dir);
  SweepOutput out;
  for (const auto& spec : specs) {
    auto conds = run_sweep(params, pitch, cfg, spec, vowel, out_dir, cfg.inverse.max_lag_seconds);
    out.conditions.insert(out.conditions.end(), conds.begin(), conds.end());
  }
  out.summary = summarize_sweep(out.conditions);

  const std::string stem = name.empty() ? base_name(params_file) + "_sweep" : name;
  out.csv = out_dir / (stem + ".csv");
  out.summary_csv = out_dir / (stem + ".summary.csv");
  out.meta = out_dir / (stem + ".meta");
  write_metrics_csv(out.csv, sweep_records(out.conditions));
  write_metrics_csv(out.summary_csv, summary_records(out.summary, vowel));
  KeyValues entries = {{"params", params_file.filename().string()},
                       {"pitch", pitch_file.filename().string()},
                       {"spec", spec_file.filename().string()}};
  for (const auto& s : specs) {
    std::string vals;
    for (const auto& v : s.values) vals += (vals.empty() ? "" : " ") + v;
    entries.emplace_back(std::string("axis_") + axis_name(s.axis), vals + " (baseline " + std::to_string(s.baseline_index) + ")");
  }
  write_metadata(out.meta, "sweep", cfg, entries);
  return out;
}

// --- baseline -------------------------------------------------------------

struct BaselineOutput {
  HarmonicFrameEnvelope envelope;
  AudioSignal audio;
  std::filesystem::path wav, envelope_csv, meta;
};

inline void write_envelope_csv(const std::filesystem::path& path, const HarmonicFrameEnvelope& env) {
  auto f = detail::open_output(path);
  f << "frame";
  for (std::size_t k = 1; k <= env.n_harmonics; ++k) f << ",h" << k;
  f << '\n';
  for (std::size_t j = 0; j < env.frames.size(); ++j) {
    f << j;
    for (double v : env.frames[j]) f << ',' << csv_value(v);
    f << '\n';
  }
}

/// Harmonic additive baseline fitted to a reference and rendered on its pitch track.
inline BaselineOutput cmd_baseline(const std::filesystem::path& reference_wav, const std::filesystem::path& pitch_file,
                                   const RunConfig& config, const std::filesystem::path& out_dir,
                                   const std::string& name = "") {
  const RunConfig cfg = checked(config);
  const auto reference = read_audio_16k(reference_wav);
  const auto pitch = read_pitch(pitch_file);

  BaselineOutput out;
  out.envelope = fit_harmonic_amplitudes(reference, pitch);
  out.audio = peak_normalize(render_additive(pitch, out.envelope, reference.fs, reference.duration()), -1.0);

  std::filesystem::create_directories(out_dir);
  const std::string stem = name.empty() ? base_name(reference_wav) + "_ddsp" : name;
  out.wav = out_dir / (stem + ".wav");
  out.envelope_csv = out_dir / (stem + ".envelope.csv");
  out.meta = out_dir / (stem + ".meta");
  write_wav(out.wav, out.audio);
  write_envelope_csv(out.envelope_csv, out.envelope);
  write_metadata(out.meta, "baseline", cfg,
                 {{"reference", reference_wav.filename().string()},
                  {"pitch", pitch_file.filename().string()},
                  {"harmonics", std::to_string(out.envelope.n_harmonics)},
                  {"hop_seconds", format_double(out.envelope.hop)},
                  {"frames", std::to_string(out.envelope.frames.size())}});
  return out;
}

}  // namespace webster
