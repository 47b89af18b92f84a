#pragma once

// Harmonic additive synthesizer driven by f0 and frame loudness; the
// non-physics envelope baseline.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "webster/errors.hpp"
#include "webster/glottal.hpp"
#include "webster/signal.hpp"
#include "webster/spectral.hpp"

namespace webster {

/// Harmonic amplitudes per analysis frame; frame j is centred at (j + 0.5) * hop.
struct HarmonicFrameEnvelope {
  std::size_t n_harmonics = 40;
  double hop = 0.02;  // s
  std::vector<std::vector<double>> frames;

  /// Amplitudes at time t, linearly interpolated between frame centres.
  std::vector<double> at(double t) const {
    if (frames.empty()) return std::vector<double>(n_harmonics, 0.0);
    const double pos = t / hop - 0.5;
    if (pos <= 0.0) return frames.front();
    const auto j = static_cast<std::size_t>(pos);
    if (j + 1 >= frames.size()) return frames.back();
    const double frac = pos - static_cast<double>(j);
    std::vector<double> out(n_harmonics);
    for (std::size_t k = 0; k < n_harmonics; ++k) out[k] = frames[j][k] + (frames[j + 1][k] - frames[j][k]) * frac;
    return out;
  }
};

struct DdspOptions {
  std::size_t n_harmonics = 40;
  double frame_seconds = 0.02;
  std::size_t zero_pad = 4;
};

/// Samples the reference spectrum at the bin nearest each harmonic of f0 per
/// frame, then rescales so the harmonic sum has the reference frame RMS.
inline HarmonicFrameEnvelope fit_harmonic_amplitudes(const AudioSignal& reference, const PitchTrajectory& pitch,
                                                     const DdspOptions& opt = {}) {
  pitch.validate();
  if (rms(reference) < 1e-9) throw SilenceError("fit_harmonic_amplitudes: reference is silent");
  const auto len = static_cast<std::size_t>(std::llround(opt.frame_seconds * reference.fs));
  if (len < 2) throw DomainError("fit_harmonic_amplitudes: frame too short");
  const std::size_t nfft = len * std::max<std::size_t>(1, opt.zero_pad);
  RealFft fft(nfft);
  const auto window = hann_window(len);
  double window_sum = 0.0;
  for (double w : window) window_sum += w;

  HarmonicFrameEnvelope env;
  env.n_harmonics = opt.n_harmonics;
  env.hop = opt.frame_seconds;
  const std::size_t n_frames = (reference.size() + len - 1) / len;
  std::vector<double> frame(len), mag(fft.bins());
  for (std::size_t j = 0; j < n_frames; ++j) {
    const std::size_t start = j * len;
    double energy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const double v = start + i < reference.size() ? reference.samples[start + i] : 0.0;
      if (start + i < reference.size()) {
        energy += v * v;
        ++count;
      }
      frame[i] = v * window[i];
    }
    const double frame_rms = std::sqrt(energy / static_cast<double>(std::max<std::size_t>(count, 1)));
    fft.magnitude(frame, mag);

    const double t_centre = (static_cast<double>(start) + 0.5 * static_cast<double>(len)) / reference.fs;
    const double t_end = static_cast<double>(start + len) / reference.fs;
    const double f0 = pitch.at(t_centre);
    const double f0_peak = std::max({pitch.at(static_cast<double>(start) / reference.fs), f0, pitch.at(t_end)});
    std::vector<double> amps(opt.n_harmonics, 0.0);
    double power = 0.0;
    for (std::size_t k = 0; k < opt.n_harmonics; ++k) {
      const double hz = static_cast<double>(k + 1) * f0;
      if (static_cast<double>(k + 1) * f0_peak >= reference.fs / 2.0) break;
      const auto bin = static_cast<std::size_t>(std::llround(hz * static_cast<double>(nfft) / reference.fs));
      if (bin >= mag.size()) break;
      amps[k] = 2.0 * mag[bin] / window_sum;
      power += 0.5 * amps[k] * amps[k];
    }
    if (power > 0.0 && frame_rms > 0.0) {
      const double gain = frame_rms / std::sqrt(power);
      for (double& v : amps) v *= gain;
    } else {
      std::fill(amps.begin(), amps.end(), 0.0);
    }
    env.frames.push_back(std::move(amps));
  }
  return env;
}

/// y(t) = sum_k a_k(t) sin(2 pi k phi(t)), phi accumulated per sample from f0.
/// Harmonics at or above fs/2 are skipped sample by sample.
inline AudioSignal render_additive(const PitchTrajectory& pitch, const HarmonicFrameEnvelope& env, double fs,
                                   double duration) {
  pitch.validate();
  if (!(fs > 0.0) || !(duration > 0.0)) throw DomainError("render_additive: fs and duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  const auto phase = accumulate_phase(pitch, fs, n);
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double f0 = pitch.at(t);
    const auto amps = env.at(t);
    double acc = 0.0;
    for (std::size_t k = 0; k < amps.size(); ++k) {
      const double h = static_cast<double>(k + 1);
      if (h * f0 >= fs / 2.0) break;
      if (amps[k] != 0.0) acc += amps[k] * std::sin(2.0 * std::numbers::pi * h * phase[i]);
    }
    y[i] = acc;
  }
  return AudioSignal(std::move(y), fs);
}

}  // namespace webster
