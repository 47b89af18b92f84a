#pragma once

// Rosenberg glottal-flow excitation driven by a pitch trajectory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "webster/errors.hpp"
#include "webster/signal.hpp"

namespace webster {

struct PitchTrajectory {
  std::vector<double> f0;  // Hz
  double rate = 100.0;     // trajectory samples per second

  PitchTrajectory() = default;
  PitchTrajectory(std::vector<double> values, double r) : f0(std::move(values)), rate(r) { validate(); }

  static PitchTrajectory constant(double hz, double duration, double r = 100.0) {
    const auto n = static_cast<std::size_t>(std::ceil(duration * r)) + 1;
    return PitchTrajectory(std::vector<double>(n, hz), r);
  }

  void validate() const {
    if (!(rate > 0.0)) throw DomainError("PitchTrajectory: rate must be positive");
    if (f0.empty()) throw DomainError("PitchTrajectory: empty trajectory");
    for (double v : f0)
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("PitchTrajectory: f0 must be positive");
  }

  /// Linear interpolation, held constant past either end.
  double at(double t) const {
    const double pos = t * rate;
    if (pos <= 0.0) return f0.front();
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= f0.size()) return f0.back();
    const double frac = pos - static_cast<double>(i);
    return f0[i] + (f0[i + 1] - f0[i]) * frac;
  }

  double max() const { return *std::max_element(f0.begin(), f0.end()); }
  double min() const { return *std::min_element(f0.begin(), f0.end()); }
};

struct RosenbergParams {
  double oq = 0.6;           // open quotient
  double cq = 0.4;           // closing fraction of the open phase
  double amplitude = 1.0;    // peak flow
  double aspiration = 0.02;  // noise-to-pulse RMS ratio

  void validate() const {
    if (!(oq > 0.0 && oq < 1.0)) throw DomainError("RosenbergParams: oq must lie in (0, 1)");
    if (!(cq > 0.0 && cq < 1.0)) throw DomainError("RosenbergParams: cq must lie in (0, 1)");
    if (!(amplitude > 0.0)) throw DomainError("RosenbergParams: amplitude must be positive");
    if (!(aspiration >= 0.0)) throw DomainError("RosenbergParams: aspiration must be >= 0");
  }
};

/// One period of the cosine-rise / quarter-cosine-fall pulse, phase in [0, 1).
inline double rosenberg_pulse(double phase, const RosenbergParams& p) {
  if (!(phase >= 0.0 && phase < 1.0)) throw DomainError("rosenberg_pulse: phase must lie in [0, 1)");
  const double rise = p.oq * (1.0 - p.cq);
  const double fall = p.oq * p.cq;
  if (phase < rise) return p.amplitude * 0.5 * (1.0 - std::cos(std::numbers::pi * phase / rise));
  if (phase < p.oq) return p.amplitude * std::cos(std::numbers::pi * (phase - rise) / (2.0 * fall));
  return 0.0;
}

inline PitchTrajectory pitch_shift(const PitchTrajectory& pitch, double ratio) {
  if (!(ratio > 0.0)) throw DomainError("pitch_shift: ratio must be positive");
  PitchTrajectory out = pitch;
  for (double& v : out.f0) v *= ratio;
  return out;
}

/// Phase at each of `n` samples; phase[0] = 0 and phase advances by f0(t)/rate.
inline std::vector<double> accumulate_phase(const PitchTrajectory& pitch, double rate, std::size_t n) {
  std::vector<double> phase(n);
  double phi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    phase[i] = phi;
    phi += pitch.at(static_cast<double>(i) / rate) / rate;
    phi -= std::floor(phi);
  }
  return phase;
}

/// Pulse train plus uniform white aspiration noise whose RMS is
/// `aspiration` times the pulse-train RMS.
inline std::vector<double> synthesize_glottal_flow(const PitchTrajectory& pitch, const RosenbergParams& p, double rate,
                                                   double duration, std::uint64_t seed) {
  pitch.validate();
  p.validate();
  if (!(duration > 0.0)) throw DomainError("synthesize_glottal_flow: duration must be positive");
  if (!(rate > 0.0)) throw DomainError("synthesize_glottal_flow: rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  const auto phase = accumulate_phase(pitch, rate, n);
  std::vector<double> flow(n);
  for (std::size_t i = 0; i < n; ++i) flow[i] = rosenberg_pulse(phase[i], p);

  if (p.aspiration > 0.0) {
    // uniform on [-h, h] has RMS h / sqrt(3)
    const double half_width = p.aspiration * rms(flow) * std::sqrt(3.0);
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> noise(-half_width, half_width);
    for (double& v : flow) v += noise(gen);
  }
  return flow;
}

}  // namespace webster
