#pragma once

// Analysis-by-synthesis recovery of the area function and the radiation
// coefficient from a reference waveform and its pitch trajectory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "webster/acoustics.hpp"
#include "webster/errors.hpp"
#include "webster/glottal.hpp"
#include "webster/metrics.hpp"
#include "webster/optimize.hpp"
#include "webster/synthesis.hpp"

namespace webster {

/// Unconstrained optimization vector. theta has one entry per control point;
/// the two endpoint entries are ignored by decode_area.
struct TractParams {
  std::vector<double> theta;
  double zeta_raw = 0.0;
};

struct PriorConfig {
  double a_min = 0.1;
  double a_max = 8.0;
  double anchor_weight = 1.0;
  double curvature_weight = 1e-5;
  double bounds_weight = 1.0;
  double zeta_min = 0.01;
  double zeta_max = 0.25;

  void validate() const {
    if (!(a_min > 0.0 && a_min < a_max)) throw ConfigError("prior: need 0 < a_min < a_max");
    if (anchor_weight < 0.0 || curvature_weight < 0.0 || bounds_weight < 0.0)
      throw ConfigError("prior: weights must be non-negative");
    if (!(zeta_min >= 0.0 && zeta_min < zeta_max)) throw ConfigError("prior: need 0 <= zeta_min < zeta_max");
  }
};

struct ObjectiveWeights {
  double stft = 1.0;
  double mel = 1.0;
  double probe = 0.01;  // per kHz of formant MAE
  double prior = 1.0;
};

enum class Optimizer { cmaes, nelder_mead };

struct InverseConfig {
  int control_points = 8;
  Optimizer optimizer = Optimizer::cmaes;
  std::uint64_t seed = 1;  // optimizer sampling
  std::size_t max_evals = 2000;
  double initial_step = 0.8;
  double max_lag_seconds = 0.05;
  double probe_fallback_khz = 1.0;  // probe term when LPC finds too few resonances
  PriorConfig prior;
  ObjectiveWeights weights;
};

inline double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

/// Control-point areas: softplus shifted so theta = 0 maps to 1, endpoints pinned to 1.
inline std::vector<double> decode_control_points(const std::vector<double>& theta) {
  const std::size_t k = theta.size();
  if (k < 4) throw DomainError("decode_area: need at least 4 control points");
  static const double shift = std::log(std::exp(1.0) - 1.0);
  std::vector<double> a(k);
  for (std::size_t j = 0; j < k; ++j) a[j] = softplus(theta[j] + shift);
  for (double& v : a) v = std::max(v, std::numeric_limits<double>::min());
  a.front() = 1.0;
  a.back() = 1.0;
  return a;
}

inline AreaFunction decode_area(const std::vector<double>& theta, int nx, double length = 0.17) {
  const AreaFunction control(length, decode_control_points(theta));
  return AreaFunction(length, resample_area(control, nx));
}

/// Logistic map of zeta_raw onto (zeta_min, zeta_max).
inline double decode_zeta(double zeta_raw, double zeta_min, double zeta_max) {
  return zeta_min + (zeta_max - zeta_min) / (1.0 + std::exp(-zeta_raw));
}

/// Inverse of decode_zeta for zeta strictly inside the range.
inline double encode_zeta(double zeta, double zeta_min, double zeta_max) {
  const double u = (zeta - zeta_min) / (zeta_max - zeta_min);
  if (!(u > 0.0 && u < 1.0)) throw DomainError("encode_zeta: zeta outside the open range");
  return std::log(u / (1.0 - u));
}

struct PriorTerms {
  double curvature = 0.0;  // mean (A'')^2, x normalized to [0, 1]
  double bounds = 0.0;     // mean squared excursion outside [a_min, a_max]
  double anchor = 0.0;     // (A(0) - 1)^2 + (A(L) - 1)^2
};

inline PriorTerms prior_terms(const AreaFunction& area, const PriorConfig& prior) {
  const auto a = area.samples();
  const std::size_t n = a.size();
  PriorTerms t;
  if (n >= 3) {
    const double dx = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double d2 = (a[i + 1] - 2.0 * a[i] + a[i - 1]) / (dx * dx);
      t.curvature += d2 * d2;
    }
    t.curvature /= static_cast<double>(n - 2);
  }
  for (double v : a) {
    const double below = std::max(0.0, prior.a_min - v);
    const double above = std::max(0.0, v - prior.a_max);
    t.bounds += below * below + above * above;
  }
  t.bounds /= static_cast<double>(n);
  t.anchor = (a.front() - 1.0) * (a.front() - 1.0) + (a.back() - 1.0) * (a.back() - 1.0);
  return t;
}

inline double prior_loss(const AreaFunction& area, const PriorConfig& prior) {
  const auto t = prior_terms(area, prior);
  return prior.curvature_weight * t.curvature + prior.bounds_weight * t.bounds + prior.anchor_weight * t.anchor;
}

struct ObjectiveTerms {
  double stft = 0.0;
  double mel = 0.0;
  double probe_khz = 0.0;
  double prior = 0.0;
  double total = 0.0;
  bool penalized = false;
};

/// Aligns `candidate` to `reference` and RMS-normalizes both.
inline std::pair<AudioSignal, AudioSignal> align_for_metrics(const AudioSignal& reference, const AudioSignal& candidate,
                                                             double max_lag_seconds) {
  const auto max_lag = static_cast<long>(std::llround(max_lag_seconds * reference.fs));
  const long lag = align_xcorr(reference, candidate, max_lag);
  auto [ra, cb] = apply_alignment(reference, candidate, lag);
  return {normalize_rms(ra), normalize_rms(cb)};
}

/// Grouped objective over the forward solver. Candidates that fail to render
/// (CFL violation, blowup) score exactly `kPenalty`.
class InverseProblem {
 public:
  static constexpr double kPenalty = 1e6;

  InverseProblem(AudioSignal reference, PitchTrajectory pitch, RenderSetup setup, InverseConfig config,
                 std::optional<GridSpec> grid = std::nullopt)
      : reference_(std::move(reference)), pitch_(std::move(pitch)), setup_(std::move(setup)),
        config_(std::move(config)), grid_(grid) {
    config_.prior.validate();
    if (config_.control_points < 4) throw ConfigError("inverse: need at least 4 control points");
    if (reference_.fs != setup_.fs) throw SampleRateError("inverse: reference rate differs from the render rate");
    if (rms(reference_) < 1e-9) throw SilenceError("inverse: reference is silent");
    setup_.duration = reference_.duration();
    try {
      reference_formants_ = formants_lpc(reference_);
    } catch (const EstimationError&) {
      reference_formants_.reset();
    }
  }

  const InverseConfig& config() const { return config_; }
  const RenderSetup& setup() const { return setup_; }
  const AudioSignal& reference() const { return reference_; }
  const PitchTrajectory& pitch() const { return pitch_; }

  /// Parameter vector of the optimizer: interior control points then zeta_raw.
  TractParams unpack(const std::vector<double>& x) const {
    const auto k = static_cast<std::size_t>(config_.control_points);
    TractParams p;
    p.theta.assign(k, 0.0);
    for (std::size_t j = 1; j + 1 < k; ++j) p.theta[j] = x[j - 1];
    p.zeta_raw = x[k - 2];
    return p;
  }

  std::size_t dimension() const { return static_cast<std::size_t>(config_.control_points) - 1; }

  double zeta_of(const TractParams& p) const {
    return decode_zeta(p.zeta_raw, config_.prior.zeta_min, config_.prior.zeta_max);
  }

  AreaFunction area_of(const TractParams& p) const { return decode_area(p.theta, setup_.nx, setup_.length); }

  AudioSignal render_candidate(const TractParams& p) const {
    const AreaFunction control(setup_.length, decode_control_points(p.theta));
    return render_with_grid(control, zeta_of(p), pitch_, setup_, grid_ ? *grid_ : setup_.grid());
  }

  ObjectiveTerms terms(const TractParams& p) const {
    ObjectiveTerms t;
    const AreaFunction control(setup_.length, decode_control_points(p.theta));
    t.prior = prior_loss(control, config_.prior);
    const auto& w = config_.weights;
    AudioSignal candidate;
    try {
      candidate = render_candidate(p);
      if (rms(candidate) < 1e-9) throw SilenceError("silent candidate");
      auto [ref, cand] = align_for_metrics(reference_, candidate, config_.max_lag_seconds);
      if (w.stft != 0.0) t.stft = multires_stft_error(ref, cand);
      if (w.mel != 0.0) t.mel = log_mel_envelope_distance(ref, cand);
      if (w.probe != 0.0 && reference_formants_) {
        try {
          t.probe_khz = formant_mae(*reference_formants_, formants_lpc(cand)) / 1000.0;
        } catch (const EstimationError&) {
          t.probe_khz = config_.probe_fallback_khz;
        }
      }
    } catch (const Error&) {
      t.penalized = true;
      t.total = kPenalty;
      return t;
    }
    t.total = w.stft * t.stft + w.mel * t.mel + w.probe * t.probe_khz + w.prior * t.prior;
    if (!std::isfinite(t.total)) {
      t.penalized = true;
      t.total = kPenalty;
    }
    return t;
  }

  double operator()(const TractParams& p) const { return terms(p).total; }

 private:
  AudioSignal reference_;
  PitchTrajectory pitch_;
  RenderSetup setup_;
  InverseConfig config_;
  std::optional<GridSpec> grid_;
  std::optional<FormantSet> reference_formants_;
};

inline double objective(const TractParams& params, const InverseProblem& problem) { return problem(params); }

struct FitMetrics {
  double lsd_db = 0.0;
  double mstft = 0.0;
  double log_mel = 0.0;
  std::optional<double> formant_mae_hz;
};

struct FitResult {
  AreaFunction area;          // on the solver grid
  AreaFunction control;       // control-point areas
  double zeta = 0.0;
  TractParams params;
  double loss = 0.0;
  std::vector<double> loss_trace;
  std::size_t evals = 0;
  FitMetrics final_metrics;
  bool convergence_warning = false;
  std::vector<std::string> warnings;
};

/// Envelope metrics of `candidate` against `reference` after alignment and RMS normalization.
inline FitMetrics envelope_metrics(const AudioSignal& reference, const AudioSignal& candidate, double max_lag_seconds) {
  auto [ref, cand] = align_for_metrics(reference, candidate, max_lag_seconds);
  FitMetrics m;
  m.lsd_db = lsd(ref, cand);
  m.mstft = multires_stft_error(ref, cand);
  m.log_mel = log_mel_envelope_distance(ref, cand);
  try {
    m.formant_mae_hz = formant_mae(formants_lpc(ref), formants_lpc(cand));
  } catch (const EstimationError&) {
    m.formant_mae_hz.reset();
  }
  return m;
}

/// Derivative-free search over (interior theta, zeta_raw) starting from the
/// uniform tube at the mid-range zeta.
inline FitResult estimate(const InverseProblem& problem) {
  const auto& cfg = problem.config();
  auto f = [&](const std::vector<double>& x) { return problem(problem.unpack(x)); };
  const std::vector<double> start(problem.dimension(), 0.0);
  OptimizeResult run;
  if (cfg.optimizer == Optimizer::cmaes) {
    CmaesOptions co;
    co.max_evals = cfg.max_evals;
    co.initial_sigma = cfg.initial_step;
    co.seed = cfg.seed;
    run = cmaes(f, start, co);
  } else {
    NelderMeadOptions nm;
    nm.max_evals = cfg.max_evals;
    nm.initial_step = cfg.initial_step;
    run = nelder_mead(f, start, nm);
  }

  FitResult fit;
  fit.params = problem.unpack(run.x);
  fit.zeta = problem.zeta_of(fit.params);
  fit.control = AreaFunction(problem.setup().length, decode_control_points(fit.params.theta));
  fit.area = problem.area_of(fit.params);
  fit.loss = run.value;
  fit.loss_trace = run.trace;
  fit.evals = run.evals;

  const std::size_t window = std::max<std::size_t>(1, cfg.max_evals / 5);
  const auto& tr = fit.loss_trace;
  double improvement = 0.0;
  if (tr.size() > window) {
    const double before = tr[tr.size() - 1 - window];
    improvement = (before - tr.back()) / std::max(std::abs(before), 1e-300);
  }
  if (improvement < 1e-4) {
    fit.convergence_warning = true;
    fit.warnings.push_back("ConvergenceWarning: relative loss improvement over the last 20% of the budget is below 1e-4");
  }

  try {
    fit.final_metrics = envelope_metrics(problem.reference(), problem.render_candidate(fit.params), cfg.max_lag_seconds);
  } catch (const Error& e) {
    fit.warnings.push_back(std::string("final metrics unavailable: ") + e.what());
  }
  return fit;
}

}  // namespace webster
