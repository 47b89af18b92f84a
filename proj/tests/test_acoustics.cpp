#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "webster/acoustics.hpp"
#include "webster/errors.hpp"

using namespace webster;

namespace {

const PhysicalConstants kAir{};

GridSpec manual_grid(int nx, double dx, double dt) {
  GridSpec g;
  g.nx = nx;
  g.dx = dx;
  g.dt = dt;
  g.fs = 1.0 / dt;  // one solver step per output sample
  return g;
}

std::vector<double> impulse(std::size_t n) {
  std::vector<double> u(n, 0.0);
  u[0] = 1.0;
  return u;
}

std::vector<double> tube_peaks(int nx, double seconds = 0.5) {
  const auto grid = GridSpec::uniform(0.17, nx, 16000.0, 0.9, kAir.c);
  const AreaFunction tube(0.17, {1.0, 1.0});
  const auto ug = impulse(static_cast<std::size_t>(seconds * 16000.0) * grid.decimation());
  const auto out = simulate(tube, {0.06, kAir.c, 0.0}, kAir, grid, ug);
  std::size_t nfft = 0;
  const auto mag = testutil::long_spectrum(out.samples, nfft);
  return {testutil::peak_in_band(mag, nfft, 16000.0, 300.0, 800.0),
          testutil::peak_in_band(mag, nfft, 16000.0, 1200.0, 1850.0),
          testutil::peak_in_band(mag, nfft, 16000.0, 2150.0, 2900.0)};
}

// Leapfrog energy between levels n and n+1 for zero glottal flow and a rigid mouth.
double discrete_energy(const FieldState& s, const std::vector<double>& area, double dx, double dt, double c) {
  const auto& p0 = s.psi_prev;
  const auto& p1 = s.psi_curr;
  const std::size_t n = area.size();
  double kinetic = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double node = 0.25 * (area[i - 1] + 2.0 * area[i] + area[i + 1]);
    const double v = (p1[i] - p0[i]) / dt;
    kinetic += 0.5 * node * v * v;
  }
  double potential = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double face = 0.5 * (area[i] + area[i + 1]);
    potential += 0.5 * c * c * face * (p1[i + 1] - p1[i]) * (p0[i + 1] - p0[i]) / (dx * dx);
  }
  return kinetic + potential;
}

// Time until the remaining impulse-response energy falls below 1e-3 of the total.
double decay_time(double zeta) {
  const auto grid = GridSpec::uniform(0.17, 48, 16000.0, 0.9, kAir.c);
  const AreaFunction tube(0.17, {1.0, 1.0});
  const auto out = simulate(tube, {zeta, kAir.c, 0.0}, kAir, grid, impulse(16000 * grid.decimation()),
                            SimOptions{Antialias::none, 1e12});
  double total = 0.0;
  for (double v : out.samples) total += v * v;
  double tail = total;
  for (std::size_t n = 0; n < out.samples.size(); ++n) {
    if (tail < 1e-3 * total) return static_cast<double>(n) / out.fs;
    tail -= out.samples[n] * out.samples[n];
  }
  return out.duration();
}

}  // namespace

TEST(CheckCfl, Examples) {
  EXPECT_NEAR(check_cfl(manual_grid(5, 0.01, 2.9e-5), kAir), 0.9947, 1e-12);
  EXPECT_NEAR(check_cfl(manual_grid(5, 0.01, 0.01 / 343.0), kAir), 1.0, 1e-12);
  EXPECT_THROW(check_cfl(manual_grid(5, 0.01, 5e-5), kAir), StabilityError);
}

TEST(CheckCfl, UniformGridRespectsTarget) {
  for (int nx : {10, 48, 95, 200}) {
    for (double target : {0.5, 0.9, 0.99, 1.0}) {
      const auto g = GridSpec::uniform(0.17, nx, 16000.0, target, 343.0);
      EXPECT_LE(check_cfl(g, kAir), target + 1e-12);
      EXPECT_NO_THROW(g.validate());
    }
  }
}

TEST(ResampleArea, Examples) {
  for (double v : resample_area(AreaFunction(0.17, {1.0, 1.0, 1.0}), 7)) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(resample_area(AreaFunction(0.17, {1.0, 2.0}), 3), (std::vector<double>{1.0, 1.5, 2.0}));
  const AreaFunction odd(0.17, {0.3, 2.7, 0.11, 5.0, 1.9});
  const auto r = resample_area(odd, 13);
  EXPECT_EQ(r.front(), 0.3);
  EXPECT_EQ(r.back(), 1.9);
  for (double v : r) EXPECT_GT(v, 0.0);
  EXPECT_THROW(resample_area(odd, 2), DomainError);
}

TEST(WebsterStep, ZeroStateStaysZero) {
  const std::vector<double> area(6, 1.0);
  const auto g = manual_grid(6, 0.01, 0.5 * 0.01 / 343.0);
  const auto s = webster_step(FieldState::zeros(6), area, g, {0.06, 343.0, 0.0}, kAir, 0.0);
  for (double v : s.psi_curr) EXPECT_EQ(v, 0.0);
  for (double v : s.psi_prev) EXPECT_EQ(v, 0.0);
}

TEST(WebsterStep, HandEvaluatedStencil) {
  // Linear area so the face means are 1.5 .. 4.5 and the node weights equal the node areas.
  const std::vector<double> area{1.0, 2.0, 3.0, 4.0, 5.0};
  const double dx = 0.01, dt = 0.5 * dx / 343.0;  // lambda = 0.5, lambda^2 = 0.25
  const auto g = manual_grid(5, dx, dt);
  FieldState s;
  s.psi_prev = {0.0, 0.1, 0.2, 0.1, 0.0};
  s.psi_curr = {0.0, 0.3, -0.1, 0.4, 0.2};
  const double beta = 100.0, zeta = 0.05, alpha = 343.0, ug = 2e-4;
  const auto next = webster_step(s, area, g, {zeta, alpha, beta}, kAir, ug);

  const double d = 0.5 * beta * dt;
  // node 1: faces 1.5 and 2.5, node area 2
  const double n1 = (2 * 0.3 - (1 - d) * 0.1 + 0.25 / 2.0 * (2.5 * (-0.1 - 0.3) - 1.5 * (0.3 - 0.0))) / (1 + d);
  // node 2: faces 2.5 and 3.5, node area 3
  const double n2 = (2 * -0.1 - (1 - d) * 0.2 + 0.25 / 3.0 * (3.5 * (0.4 + 0.1) - 2.5 * (-0.1 - 0.3))) / (1 + d);
  // node 3: faces 3.5 and 4.5, node area 4
  const double n3 = (2 * 0.4 - (1 - d) * 0.1 + 0.25 / 4.0 * (4.5 * (0.2 - 0.4) - 3.5 * (0.4 + 0.1))) / (1 + d);
  EXPECT_NEAR(next.psi_curr[1], n1, 1e-14);
  EXPECT_NEAR(next.psi_curr[2], n2, 1e-14);
  EXPECT_NEAR(next.psi_curr[3], n3, 1e-14);
  EXPECT_NEAR(next.psi_curr[0], n1 - dx * alpha * ug / 1.0, 1e-14);
  const double r = zeta * dx / dt;
  EXPECT_NEAR(next.psi_curr[4], (n3 + r * 0.2) / (1 + r), 1e-14);
  EXPECT_EQ(next.psi_prev, s.psi_curr);
}

TEST(WebsterStep, RigidLosslessEnergyConserved) {
  for (bool uniform : {true, false}) {
    const int nx = 48;
    std::vector<double> area(nx, 1.0);
    if (!uniform)
      for (int i = 0; i < nx; ++i) area[i] = 1.0 + 0.4 * std::sin(0.21 * i) + 0.3 * std::cos(0.05 * i * i);
    const auto g = GridSpec::uniform(0.17, nx, 16000.0, 0.95, 343.0);
    FieldState s = FieldState::zeros(nx);
    for (int i = 1; i + 1 < nx; ++i) s.psi_curr[i] = s.psi_prev[i] = std::exp(-0.5 * std::pow((i - 20) / 3.0, 2));
    s.psi_curr[0] = s.psi_prev[0] = s.psi_curr[1];
    s.psi_curr[nx - 1] = s.psi_prev[nx - 1] = s.psi_curr[nx - 2];

    WebsterSolver solver(s, area, g, {0.0, 343.0, 0.0}, kAir);
    solver.step(0.0);
    const double e0 = discrete_energy(solver.state(), area, g.dx, g.dt, 343.0);
    ASSERT_GT(e0, 0.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      solver.step(0.0);
      worst = std::max(worst, std::abs(discrete_energy(solver.state(), area, g.dx, g.dt, 343.0) - e0) / e0);
    }
    EXPECT_LT(worst, 1e-6) << (uniform ? "uniform" : "shaped");
  }
}

TEST(WebsterStep, BlowupGuard) {
  const auto g = GridSpec::uniform(0.17, 20, 16000.0, 0.9, 343.0);
  WebsterSolver solver(std::vector<double>(20, 1.0), g, {0.06, 343.0, 0.0}, kAir, 1e-3);
  EXPECT_THROW(solver.step(1.0), NumericalBlowup);
}

TEST(Simulate, ZeroExcitationIsSilent) {
  const auto g = GridSpec::uniform(0.17, 48, 16000.0, 0.9, 343.0);
  const auto out = simulate(AreaFunction(0.17, {1.0, 2.0, 0.5, 1.0}), {0.06, 343.0, 0.0}, kAir, g,
                            std::vector<double>(1600 * g.decimation(), 0.0));
  EXPECT_EQ(out.size(), 1600u);
  for (double v : out.samples) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, QuarterWaveResonances) {
  const auto peaks = tube_peaks(48);
  for (int k = 1; k <= 3; ++k) {
    const double expected = (2 * k - 1) * 343.0 / (4 * 0.17);
    EXPECT_NEAR(peaks[k - 1], expected, 0.05 * expected) << "F" << k;
  }
}

TEST(Simulate, GridConvergence) {
  const auto coarse = tube_peaks(48);
  const auto fine = tube_peaks(95);
  for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(fine[k] - coarse[k]) / coarse[k], 0.02) << "F" << k + 1;
}

TEST(Simulate, Linearity) {
  const auto g = GridSpec::uniform(0.17, 48, 16000.0, 0.9, 343.0);
  const AreaFunction a(0.17, {1.0, 0.4, 2.2, 3.0, 0.8, 1.0});
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> ug(3200 * g.decimation());
  for (double& v : ug) v = d(gen);
  const auto base = simulate(a, {0.06, 343.0, 0.0}, kAir, g, ug);
  for (double k : {-2.0, 0.37, 3.7}) {
    std::vector<double> scaled_ug = ug;
    for (double& v : scaled_ug) v *= k;
    const auto out = simulate(a, {0.06, 343.0, 0.0}, kAir, g, scaled_ug);
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < out.size(); ++n) {
      num += std::pow(out.samples[n] - k * base.samples[n], 2);
      den += std::pow(k * base.samples[n], 2);
    }
    EXPECT_LT(std::sqrt(num / den), 1e-9) << "k=" << k;
  }
  // doubling the glottal scale alpha doubles the output
  const auto doubled = simulate(a, {0.06, 686.0, 0.0}, kAir, g, ug);
  for (std::size_t n = 0; n < base.size(); ++n) EXPECT_NEAR(doubled.samples[n], 2.0 * base.samples[n], 1e-9 * rms(base));
}

TEST(Simulate, StableForRandomAreasAtCourant099) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> area_dist(0.05, 10.0);
  std::uniform_real_distribution<double> ug_dist(-1.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> samples(2 + trial * 5);
    for (double& v : samples) v = area_dist(gen);
    const AreaFunction a(0.17, samples);
    const auto g = GridSpec::uniform(0.17, 40, 16000.0, 0.99, 343.0);
    std::vector<double> ug(16000 - 16000 % g.decimation());
    for (double& v : ug) v = ug_dist(gen);
    const double zeta = trial % 2 ? 0.0 : 0.06;
    AudioSignal out;
    ASSERT_NO_THROW(out = simulate(a, {zeta, 343.0, trial * 10.0}, kAir, g, ug)) << "trial " << trial;
    for (double v : out.samples) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Simulate, RejectsUnstableGridBeforeStepping) {
  auto g = GridSpec::uniform(0.17, 48, 16000.0, 0.9, 343.0);
  g.dt *= 1.3;
  g.fs = 1.0 / (g.dt * 7);
  EXPECT_THROW(simulate(AreaFunction(0.17, {1.0, 1.0}), {0.06, 343.0, 0.0}, kAir, g, std::vector<double>(70, 0.0)),
               StabilityError);
}

// Reflection (1 - zeta c) / (1 + zeta c): losses grow with zeta up to the matched value 1/c, then shrink.
TEST(Simulate, RadiationDampingMonotone) {
  const double matched = 1.0 / 343.0;
  double prev = decay_time(0.1 * matched);
  for (double z : {0.25 * matched, 0.5 * matched, 0.8 * matched}) {
    const double t = decay_time(z);
    EXPECT_LT(t, prev) << "zeta=" << z;
    prev = t;
  }
  prev = decay_time(2.0 * matched);
  for (double z : {0.01, 0.06, 0.25}) {
    const double t = decay_time(z);
    EXPECT_GT(t, prev) << "zeta=" << z;
    prev = t;
  }
}

TEST(RadiationImpedance, Examples) {
  EXPECT_NEAR(radiation_impedance_estimate(1.0, 0.127, 1.2), 9.449, 1e-3);
  EXPECT_NEAR(radiation_impedance_estimate(1.0, 0.06, 1.2), 20.0, 1e-12);
  EXPECT_NEAR(radiation_impedance_estimate(2.0, 0.06, 1.2), 10.0, 1e-12);
  EXPECT_THROW(radiation_impedance_estimate(1.0, 0.0, 1.2), DomainError);
}
