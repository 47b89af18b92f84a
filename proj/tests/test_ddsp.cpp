#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "webster/ddsp.hpp"
#include "webster/errors.hpp"
#include "webster/metrics.hpp"

using namespace webster;

namespace {

double frame_rms(const AudioSignal& a, std::size_t start, std::size_t len) {
  return rms(std::span<const double>(a.samples.data() + start, len));
}

}  // namespace

TEST(DdspFit, SineConcentratesInFirstHarmonic) {
  const auto ref = testutil::sine(200.0, 0.8);
  const auto env = fit_harmonic_amplitudes(ref, PitchTrajectory::constant(200.0, 0.8), {10, 0.02, 4});
  ASSERT_FALSE(env.frames.empty());
  for (const auto& f : env.frames) {
    ASSERT_GT(f[0], 0.0);
    for (std::size_t k = 1; k < 10; ++k) EXPECT_LE(f[k], 0.01 * f[0]);
  }
}

TEST(DdspFit, SilentFramesGetZeroAmplitudes) {
  auto ref = testutil::sine(200.0, 0.8);
  for (std::size_t i = 0; i < 6400; ++i) ref.samples[i] = 0.0;
  const auto env = fit_harmonic_amplitudes(ref, PitchTrajectory::constant(200.0, 0.8));
  for (std::size_t j = 0; j < 15; ++j) {
    for (double v : env.frames[j]) EXPECT_EQ(v, 0.0);
  }
  const AudioSignal z{std::vector<double>(12800, 0.0), 16000.0};
  EXPECT_THROW(fit_harmonic_amplitudes(z, PitchTrajectory::constant(200.0, 0.8)), SilenceError);
}

TEST(DdspFit, AliasedHarmonicsZeroed) {
  const auto ref = testutil::harmonic(240.0, {1.0, 0.5, 0.3}, 0.8);
  const auto env = fit_harmonic_amplitudes(ref, PitchTrajectory::constant(240.0, 0.8));
  for (const auto& f : env.frames) {
    for (std::size_t k = 0; k < f.size(); ++k) {
      if ((k + 1) * 240.0 >= 8000.0) {
        EXPECT_EQ(f[k], 0.0);
      }
    }
  }
}

TEST(DdspRender, SingleHarmonicSine) {
  HarmonicFrameEnvelope env{1, 0.02, std::vector<std::vector<double>>(41, std::vector<double>{1.0})};
  const auto y = render_additive(PitchTrajectory::constant(200.0, 0.8), env, 16000.0, 0.8);
  EXPECT_EQ(y.size(), 12800u);
  EXPECT_NEAR(rms(y), 1.0 / std::sqrt(2.0), 1e-3);
  const auto sine = testutil::sine(200.0, 0.8);
  for (std::size_t n = 0; n < y.size(); n += 97) EXPECT_NEAR(y.samples[n], sine.samples[n], 1e-6);
}

TEST(DdspRender, ZeroEnvelopeIsSilent) {
  HarmonicFrameEnvelope env{5, 0.02, std::vector<std::vector<double>>(41, std::vector<double>(5, 0.0))};
  for (double v : render_additive(PitchTrajectory::constant(200.0, 0.8), env, 16000.0, 0.8).samples) EXPECT_EQ(v, 0.0);
}

TEST(DdspRoundTrip, FiveHarmonicReference) {
  const auto ref = testutil::harmonic(200.0, {1.0, 0.7, 0.4, 0.25, 0.1}, 0.8);
  const auto pitch = PitchTrajectory::constant(200.0, 0.8);
  const auto y = render_additive(pitch, fit_harmonic_amplitudes(ref, pitch), 16000.0, 0.8);
  EXPECT_LE(lsd(ref, y), 3.0);
}

// Off-grid f0 leaks window sidelobes into empty harmonics, so check the
// recovered amplitudes of the occupied ones rather than a log spectrum.
TEST(DdspFit, RecoversAmplitudesOffBinGrid) {
  const std::vector<double> amps{1.0, 0.7, 0.4, 0.25, 0.1};
  for (double f0 : {180.0, 240.0}) {
    const auto ref = testutil::harmonic(f0, amps, 0.8);
    const auto env = fit_harmonic_amplitudes(ref, PitchTrajectory::constant(f0, 0.8));
    for (std::size_t j = 1; j + 1 < env.frames.size(); ++j) {
      for (std::size_t k = 0; k < amps.size(); ++k) EXPECT_NEAR(env.frames[j][k], amps[k], 0.1) << "f0=" << f0;
    }
  }
}

TEST(DdspRoundTrip, FrameRmsMatches) {
  auto ref = testutil::harmonic(200.0, {1.0, 0.7, 0.4, 0.25, 0.1}, 0.8);
  for (std::size_t n = 0; n < ref.size(); ++n) ref.samples[n] *= 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * 1.5 * n / 16000.0);
  const auto pitch = PitchTrajectory::constant(200.0, 0.8);
  const auto y = render_additive(pitch, fit_harmonic_amplitudes(ref, pitch), 16000.0, 0.8);
  for (std::size_t start = 320; start + 320 <= 12480; start += 320) {
    const double r = frame_rms(ref, start, 320);
    EXPECT_NEAR(frame_rms(y, start, 320), r, 0.1 * r) << "frame at " << start;
  }
}

TEST(DdspRender, NoEnergyAboveHighestHarmonic) {
  const auto ref = testutil::harmonic(200.0, {1.0, 0.7, 0.4, 0.25, 0.1}, 0.8);
  const auto pitch = PitchTrajectory::constant(200.0, 0.8);
  DdspOptions opt;
  opt.n_harmonics = 10;
  const auto y = render_additive(pitch, fit_harmonic_amplitudes(ref, pitch, opt), 16000.0, 0.8);
  std::size_t nfft = 0;
  const auto mag = testutil::long_spectrum(y.samples, nfft);
  const double bin_hz = 16000.0 / static_cast<double>(nfft);
  double peak = 0.0, above = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    peak = std::max(peak, mag[k]);
    if (k * bin_hz > 10 * 200.0 + 200.0) above = std::max(above, mag[k]);
  }
  EXPECT_LT(20.0 * std::log10(above / peak), -40.0);
}
