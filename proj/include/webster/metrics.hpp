#pragma once

// Objective evaluation: alignment, spectral distances, LPC formants and HNR.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "webster/errors.hpp"
#include "webster/signal.hpp"
#include "webster/spectral.hpp"

namespace webster {

struct StftResolution {
  std::size_t fft_size = 1024;
  std::size_t hop = 256;
};

inline std::vector<StftResolution> default_resolutions() { return {{512, 128}, {1024, 256}, {2048, 512}}; }

struct FormantSet {
  std::array<double, 3> hz{};

  double f1() const { return hz[0]; }
  double f2() const { return hz[1]; }
  double f3() const { return hz[2]; }
};

namespace detail {

constexpr double kSilenceRms = 1e-9;
constexpr double kMagnitudeFloor = 1e-7;

inline void require_same_rate(const AudioSignal& a, const AudioSignal& b) {
  if (a.fs != b.fs) throw SampleRateError("signals have different sample rates");
}

inline void require_audible(const AudioSignal& a, const char* what) {
  if (rms(a) < kSilenceRms) throw SilenceError(std::string(what) + ": signal is silent");
}

inline std::span<const double> head(const AudioSignal& a, std::size_t n) { return {a.samples.data(), n}; }

}  // namespace detail

/// Lag in [-max_lag, max_lag] maximizing the signed cross-correlation
/// sum_n b[n] a[n - lag]; normalizing by the signal norms would not move the peak.
inline long align_xcorr(const AudioSignal& a, const AudioSignal& b, long max_lag) {
  detail::require_same_rate(a, b);
  detail::require_audible(a, "align_xcorr");
  detail::require_audible(b, "align_xcorr");
  const auto corr = cross_correlation(a.samples, b.samples, max_lag);
  // ties within FFT round-off go to the smaller |lag|, then the positive one
  const double tol = 1e-9 * std::abs(*std::max_element(corr.begin(), corr.end(), [](double x, double y) {
    return std::abs(x) < std::abs(y);
  }));
  long best_lag = 0;
  double best = corr[static_cast<std::size_t>(max_lag)];
  for (long k = 1; k <= max_lag; ++k) {
    for (long lag : {k, -k}) {
      const double v = corr[static_cast<std::size_t>(lag + max_lag)];
      if (v > best + tol) {
        best = v;
        best_lag = lag;
      }
    }
  }
  return best_lag;
}

/// Mean over resolutions of spectral convergence plus mean absolute log-magnitude difference.
/// `a` is the reference. Signals are truncated to their common length.
inline double multires_stft_error(const AudioSignal& a, const AudioSignal& b,
                                  std::span<const StftResolution> resolutions) {
  detail::require_same_rate(a, b);
  detail::require_audible(a, "multires_stft_error");
  if (resolutions.empty()) throw DomainError("multires_stft_error: no resolutions");
  const std::size_t n = std::min(a.size(), b.size());
  double total = 0.0;
  for (const auto& res : resolutions) {
    const auto sa = stft_magnitude(detail::head(a, n), res.fft_size, res.hop);
    const auto sb = stft_magnitude(detail::head(b, n), res.fft_size, res.hop);
    double diff2 = 0.0, ref2 = 0.0, logl1 = 0.0;
    for (std::size_t i = 0; i < sa.mag.size(); ++i) {
      const double ma = sa.mag[i], mb = sb.mag[i];
      diff2 += (ma - mb) * (ma - mb);
      ref2 += ma * ma;
      logl1 += std::abs(std::log(std::max(ma, detail::kMagnitudeFloor)) - std::log(std::max(mb, detail::kMagnitudeFloor)));
    }
    if (ref2 == 0.0) throw SilenceError("multires_stft_error: reference spectrogram is zero");
    total += std::sqrt(diff2 / ref2) + logl1 / static_cast<double>(sa.mag.size());
  }
  return total / static_cast<double>(resolutions.size());
}

inline double multires_stft_error(const AudioSignal& a, const AudioSignal& b) {
  const auto res = default_resolutions();
  return multires_stft_error(a, b, res);
}

/// Log-spectral distance in dB: frame-averaged RMS of per-bin level differences.
inline double lsd(const AudioSignal& a, const AudioSignal& b, std::size_t fft_size = 1024, std::size_t hop = 256) {
  detail::require_same_rate(a, b);
  detail::require_audible(a, "lsd");
  const std::size_t n = std::min(a.size(), b.size());
  const auto sa = stft_magnitude(detail::head(a, n), fft_size, hop);
  const auto sb = stft_magnitude(detail::head(b, n), fft_size, hop);
  double acc = 0.0;
  for (std::size_t f = 0; f < sa.frames; ++f) {
    double frame = 0.0;
    for (std::size_t k = 0; k < sa.bins; ++k) {
      const double d = 20.0 * std::log10(std::max(sa.at(f, k), detail::kMagnitudeFloor) /
                                         std::max(sb.at(f, k), detail::kMagnitudeFloor));
      frame += d * d;
    }
    acc += std::sqrt(frame / static_cast<double>(sa.bins));
  }
  return acc / static_cast<double>(sa.frames);
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular HTK-scale filter bank, n_mels x bins, row-major.
inline std::vector<double> mel_filterbank(std::size_t n_mels, std::size_t fft_size, double fs, double fmin, double fmax) {
  if (n_mels == 0 || !(fmax > fmin) || fmin < 0.0 || fmax > fs / 2.0 + 1e-9)
    throw DomainError("mel_filterbank: need n_mels > 0 and 0 <= fmin < fmax <= fs/2");
  const std::size_t bins = fft_size / 2 + 1;
  std::vector<double> edges(n_mels + 2);
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  for (std::size_t m = 0; m < edges.size(); ++m)
    edges[m] = mel_to_hz(lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(n_mels + 1));
  std::vector<double> bank(n_mels * bins, 0.0);
  for (std::size_t m = 0; m < n_mels; ++m) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * fs / static_cast<double>(fft_size);
      double w = 0.0;
      if (f > edges[m] && f <= edges[m + 1]) w = (f - edges[m]) / (edges[m + 1] - edges[m]);
      else if (f > edges[m + 1] && f < edges[m + 2]) w = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      bank[m * bins + k] = w;
    }
  }
  return bank;
}

/// Time-averaged log-mel spectrum of the RMS-normalized signal.
inline std::vector<double> mean_log_mel(const AudioSignal& a, std::size_t n_mels, double fmin, double fmax,
                                        std::size_t fft_size = 1024, std::size_t hop = 256) {
  const auto x = normalize_rms(a, detail::kSilenceRms);
  const auto spec = stft_magnitude(x.samples, fft_size, hop);
  const auto bank = mel_filterbank(n_mels, fft_size, a.fs, fmin, fmax);
  std::vector<double> avg(n_mels, 0.0);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t m = 0; m < n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < spec.bins; ++k) {
        const double mag = spec.at(f, k);
        e += bank[m * spec.bins + k] * mag * mag;
      }
      avg[m] += std::log(e + 1e-10);
    }
  }
  for (double& v : avg) v /= static_cast<double>(spec.frames);
  return avg;
}

/// Mean absolute difference between the time-averaged log-mel spectra of the
/// RMS-normalized signals.
inline double log_mel_envelope_distance(const AudioSignal& a, const AudioSignal& b, std::size_t n_mels = 80,
                                        double fmin = 0.0, double fmax = -1.0) {
  detail::require_same_rate(a, b);
  detail::require_audible(a, "log_mel_envelope_distance");
  detail::require_audible(b, "log_mel_envelope_distance");
  if (fmax < 0.0) fmax = a.fs / 2.0;
  const std::size_t n = std::min(a.size(), b.size());
  const AudioSignal ta(std::vector<double>(a.samples.begin(), a.samples.begin() + static_cast<long>(n)), a.fs);
  const AudioSignal tb(std::vector<double>(b.samples.begin(), b.samples.begin() + static_cast<long>(n)), b.fs);
  const auto ma = mean_log_mel(ta, n_mels, fmin, fmax);
  const auto mb = mean_log_mel(tb, n_mels, fmin, fmax);
  double acc = 0.0;
  for (std::size_t m = 0; m < n_mels; ++m) acc += std::abs(ma[m] - mb[m]);
  return acc / static_cast<double>(n_mels);
}

struct LpcOptions {
  int order = 18;              // 2 + fs/1000 at 16 kHz
  double preemphasis = 0.97;
  double segment_seconds = 0.05;
  double max_bandwidth = 400.0;
  double min_frequency = 50.0;
};

/// Autocorrelation-method predictor coefficients a[0..order], a[0] = 1, via Levinson-Durbin.
inline std::vector<double> lpc_coefficients(std::span<const double> frame, int order) {
  const auto p = static_cast<std::size_t>(order);
  std::vector<double> r(p + 1, 0.0);
  for (std::size_t lag = 0; lag <= p; ++lag)
    for (std::size_t n = lag; n < frame.size(); ++n) r[lag] += frame[n] * frame[n - lag];
  if (r[0] <= 0.0) throw EstimationError("lpc_coefficients: zero-energy frame");
  r[0] *= 1.0 + 1e-9;
  std::vector<double> a(p + 1, 0.0), prev(p + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
    if (err <= 0.0) throw EstimationError("lpc_coefficients: prediction error vanished");
  }
  return a;
}

/// Roots of z^p + a1 z^(p-1) + ... + ap from the companion matrix.
inline std::vector<std::complex<double>> polynomial_roots(std::span<const double> a) {
  const auto p = static_cast<Eigen::Index>(a.size()) - 1;
  if (p < 1) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = -a[static_cast<std::size_t>(j + 1)] / a[0];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> roots;
  for (Eigen::Index i = 0; i < p; ++i) roots.push_back(solver.eigenvalues()[i]);
  return roots;
}

/// First `n` LPC resonances (ascending) with bandwidth below the limit, from a
/// hann-windowed, pre-emphasized segment at the middle of the signal.
inline std::vector<double> lpc_resonances(const AudioSignal& a, std::size_t n, const LpcOptions& opt = {}) {
  if (a.duration() < 0.1 - 1e-9) throw DomainError("formants_lpc: need at least 0.1 s of audio");
  detail::require_audible(a, "formants_lpc");
  const auto len = std::min(a.size(), static_cast<std::size_t>(std::llround(opt.segment_seconds * a.fs)));
  const std::size_t start = (a.size() - len) / 2;
  const auto window = hann_window(len);
  std::vector<double> frame(len);
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t j = start + i;
    const double prev = j > 0 ? a.samples[j - 1] : 0.0;
    frame[i] = (a.samples[j] - opt.preemphasis * prev) * window[i];
  }
  const auto coeffs = lpc_coefficients(frame, opt.order);
  std::vector<double> freqs;
  for (const auto& z : polynomial_roots(coeffs)) {
    if (z.imag() <= 0.0) continue;
    const double f = std::arg(z) * a.fs / (2.0 * std::numbers::pi);
    const double bw = -std::log(std::abs(z)) * a.fs / std::numbers::pi;
    if (f > opt.min_frequency && f < a.fs / 2.0 && bw < opt.max_bandwidth) freqs.push_back(f);
  }
  std::sort(freqs.begin(), freqs.end());
  if (freqs.size() < n) throw EstimationError("formants_lpc: fewer qualifying resonances than requested");
  freqs.resize(n);
  return freqs;
}

inline FormantSet formants_lpc(const AudioSignal& a, const LpcOptions& opt = {}) {
  const auto f = lpc_resonances(a, 3, opt);
  return FormantSet{{f[0], f[1], f[2]}};
}

inline double formant_mae(const FormantSet& x, const FormantSet& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) acc += std::abs(x.hz[i] - y.hz[i]);
  return acc / 3.0;
}

struct HnrOptions {
  double frame_seconds = 0.04;
  double hop_seconds = 0.01;
  double voicing_threshold = 0.3;
};

/// Per-frame peak of the window-corrected normalized autocorrelation within the
/// lag range implied by [f0_min, f0_max]. Frames with zero energy yield 0.
inline std::vector<double> framewise_periodicity(const AudioSignal& a, double f0_min, double f0_max,
                                                 const HnrOptions& opt = {}) {
  if (!(f0_min > 0.0) || !(f0_max >= f0_min)) throw DomainError("hnr: invalid f0 range");
  const auto len = static_cast<std::size_t>(std::llround(opt.frame_seconds * a.fs));
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.hop_seconds * a.fs)));
  const auto lag_min = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(a.fs / f0_max)));
  const auto lag_max = static_cast<std::size_t>(std::ceil(a.fs / f0_min)) + 1;
  if (lag_max + 1 >= len) throw DomainError("hnr: frame too short for the requested f0 range");

  const auto window = hann_window(len);
  std::vector<double> win_ac(lag_max + 2, 0.0);
  for (std::size_t lag = 0; lag < win_ac.size(); ++lag)
    for (std::size_t n = lag; n < len; ++n) win_ac[lag] += window[n] * window[n - lag];

  std::vector<double> out;
  std::vector<double> frame(len), corrected(lag_max + 2, 0.0);
  for (std::size_t start = 0; start + len <= a.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) mean += a.samples[start + i];
    mean /= static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) frame[i] = (a.samples[start + i] - mean) * window[i];
    double r0 = 0.0;
    for (double v : frame) r0 += v * v;
    if (r0 <= 0.0) {
      out.push_back(0.0);
      continue;
    }
    const std::size_t lo = lag_min > 1 ? lag_min - 1 : 1;
    for (std::size_t lag = lo; lag <= lag_max + 1; ++lag) {
      double acc = 0.0;
      for (std::size_t n = lag; n < len; ++n) acc += frame[n] * frame[n - lag];
      corrected[lag] = (acc / r0) / (win_ac[lag] / win_ac[0]);
    }
    double best = -1.0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      double peak = corrected[lag];
      const double l = corrected[lag - 1], r = corrected[lag + 1];
      if (peak >= l && peak >= r) {
        // parabolic refinement of a local maximum
        const double denom = l - 2.0 * peak + r;
        if (denom < 0.0) peak -= 0.125 * (r - l) * (r - l) / denom;
      }
      best = std::max(best, peak);
    }
    out.push_back(best);
  }
  return out;
}

/// Median framewise HNR in dB over voiced frames.
inline double hnr_framewise(const AudioSignal& a, double f0_min, double f0_max, const HnrOptions& opt = {}) {
  if (a.duration() < 0.2 - 1e-9) throw DomainError("hnr_framewise: need at least 0.2 s of audio");
  std::vector<double> db;
  for (double r : framewise_periodicity(a, f0_min, f0_max, opt)) {
    if (!(r > opt.voicing_threshold)) continue;
    const double c = std::clamp(r, 1e-6, 1.0 - 1e-6);
    db.push_back(10.0 * std::log10(c / (1.0 - c)));
  }
  if (db.empty()) throw UnvoicedError("hnr_framewise: no voiced frames");
  const std::size_t mid = db.size() / 2;
  std::nth_element(db.begin(), db.begin() + static_cast<long>(mid), db.end());
  if (db.size() % 2 == 1) return db[mid];
  const double upper = db[mid];
  const double lower = *std::max_element(db.begin(), db.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace webster
