#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "webster/errors.hpp"

namespace webster {

/// Uniformly sampled waveform.
struct AudioSignal {
  std::vector<double> samples;
  double fs = 16000.0;

  AudioSignal() = default;
  AudioSignal(std::vector<double> s, double rate) : samples(std::move(s)), fs(rate) { validate(); }

  void validate() const {
    if (!(fs > 0.0)) throw DomainError("AudioSignal: sample rate must be positive");
    for (double v : samples)
      if (!std::isfinite(v)) throw DomainError("AudioSignal: non-finite sample");
  }

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / fs; }
};

inline double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double rms(const AudioSignal& a) { return rms(a.samples); }

inline AudioSignal scaled(const AudioSignal& a, double k) {
  AudioSignal out = a;
  for (double& v : out.samples) v *= k;
  return out;
}

/// Rescales to unit RMS. Throws SilenceError below `floor`.
inline AudioSignal normalize_rms(const AudioSignal& a, double floor = 1e-9) {
  const double r = rms(a);
  if (r < floor) throw SilenceError("normalize_rms: signal is silent");
  return scaled(a, 1.0 / r);
}

/// Periodic Hann window (the DFT-even variant used for STFT analysis).
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

/// Linear interpolation by an integer factor; output has x.size()*factor samples,
/// the tail holds the last input value.
inline std::vector<double> upsample_linear(std::span<const double> x, std::size_t factor) {
  if (factor == 0) throw DomainError("upsample_linear: factor must be positive");
  std::vector<double> out(x.size() * factor);
  const double inv = 1.0 / static_cast<double>(factor);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double a = x[n];
    const double b = n + 1 < x.size() ? x[n + 1] : x[n];
    for (std::size_t k = 0; k < factor; ++k) out[n * factor + k] = a + (b - a) * static_cast<double>(k) * inv;
  }
  return out;
}

/// Overlapping parts of `a` and `b` after undoing a lag, where `b[n] ~ a[n - lag]`.
inline std::pair<AudioSignal, AudioSignal> apply_alignment(const AudioSignal& a, const AudioSignal& b, long lag) {
  const long na = static_cast<long>(a.size());
  const long nb = static_cast<long>(b.size());
  // a[n] pairs with b[n + lag]
  const long start = std::max(0L, -lag);
  const long stop = std::min(na, nb - lag);
  AudioSignal ra, rb;
  ra.fs = a.fs;
  rb.fs = b.fs;
  if (stop > start) {
    ra.samples.assign(a.samples.begin() + start, a.samples.begin() + stop);
    rb.samples.assign(b.samples.begin() + start + lag, b.samples.begin() + stop + lag);
  }
  return {std::move(ra), std::move(rb)};
}

}  // namespace webster
