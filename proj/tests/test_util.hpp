#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "webster/signal.hpp"
#include "webster/spectral.hpp"

namespace testutil {

inline webster::AudioSignal sine(double hz, double seconds, double fs = 16000.0, double amp = 1.0, double phase = 0.0) {
  webster::AudioSignal a;
  a.fs = fs;
  a.samples.resize(static_cast<std::size_t>(std::llround(seconds * fs)));
  for (std::size_t n = 0; n < a.samples.size(); ++n)
    a.samples[n] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / fs + phase);
  return a;
}

inline webster::AudioSignal white_noise(double seconds, std::uint64_t seed, double fs = 16000.0) {
  webster::AudioSignal a;
  a.fs = fs;
  a.samples.resize(static_cast<std::size_t>(std::llround(seconds * fs)));
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  for (double& v : a.samples) v = d(gen);
  return a;
}

/// Sum of harmonics k*f0 (k = 1..amps.size()) with the given amplitudes.
inline webster::AudioSignal harmonic(double f0, const std::vector<double>& amps, double seconds, double fs = 16000.0) {
  webster::AudioSignal a;
  a.fs = fs;
  a.samples.assign(static_cast<std::size_t>(std::llround(seconds * fs)), 0.0);
  for (std::size_t n = 0; n < a.samples.size(); ++n)
    for (std::size_t k = 0; k < amps.size(); ++k)
      a.samples[n] += amps[k] * std::sin(2.0 * std::numbers::pi * f0 * static_cast<double>(k + 1) * static_cast<double>(n) / fs);
  return a;
}

/// Magnitude spectrum of the whole signal (Hann window, zero padded to a power of two >= 4x length).
inline std::vector<double> long_spectrum(const std::vector<double>& x, std::size_t& nfft) {
  nfft = 1;
  while (nfft < 4 * x.size()) nfft *= 2;
  std::vector<double> frame(nfft, 0.0);
  const auto w = webster::hann_window(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) frame[i] = x[i] * w[i];
  webster::RealFft fft(nfft);
  std::vector<double> mag(fft.bins());
  fft.magnitude(frame, mag);
  return mag;
}

/// Frequency of the largest magnitude within [lo, hi] Hz, refined by a parabola through the log magnitudes.
inline double peak_in_band(const std::vector<double>& mag, std::size_t nfft, double fs, double lo, double hi) {
  const double bin_hz = fs / static_cast<double>(nfft);
  auto k0 = static_cast<std::size_t>(std::ceil(lo / bin_hz));
  auto k1 = std::min(mag.size() - 2, static_cast<std::size_t>(std::floor(hi / bin_hz)));
  std::size_t best = k0;
  for (std::size_t k = k0; k <= k1; ++k)
    if (mag[k] > mag[best]) best = k;
  const double l = std::log(mag[best - 1] + 1e-300), c = std::log(mag[best] + 1e-300), r = std::log(mag[best + 1] + 1e-300);
  const double den = l - 2.0 * c + r;
  const double off = den < 0.0 ? 0.5 * (l - r) / den : 0.0;
  return (static_cast<double>(best) + off) * bin_hz;
}

}  // namespace testutil
