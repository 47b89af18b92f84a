#pragma once

// Explicit finite-difference solver for the time-domain Webster horn equation
//
//   (1/c^2) psi_tt + (beta/c^2) psi_t - (1/A) d/dx (A psi_x) = 0
//
// on x in [0, L], driven by a volume-flow boundary at the glottis (x = 0) and
// terminated by a Robin radiation boundary psi_x + zeta psi_t = 0 at the lips.
// Pressure is p = -rho psi_t, so the lip pressure is read off the last node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "webster/errors.hpp"
#include "webster/signal.hpp"

namespace webster {

struct PhysicalConstants {
  double rho = 1.2;   // kg/m^3
  double c = 343.0;   // m/s

  void validate() const {
    if (!(rho > 0.0) || !(c > 0.0)) throw DomainError("PhysicalConstants: rho and c must be positive");
  }
};

/// Cross-sectional area sampled uniformly from glottis (index 0) to lips (last index).
class AreaFunction {
 public:
  AreaFunction() = default;
  AreaFunction(double length_m, std::vector<double> samples) : length_(length_m), samples_(std::move(samples)) {
    if (!(length_ > 0.0)) throw DomainError("AreaFunction: length must be positive");
    if (samples_.size() < 2) throw DomainError("AreaFunction: need at least two samples");
    for (double a : samples_)
      if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("AreaFunction: areas must be finite and positive");
  }

  double length() const { return length_; }
  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double front() const { return samples_.front(); }
  double back() const { return samples_.back(); }

  /// Piecewise-linear value at normalized position u in [0, 1].
  double at_normalized(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    const double pos = u * static_cast<double>(samples_.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return samples_[i] + (samples_[i + 1] - samples_[i]) * frac;
  }

 private:
  double length_ = 0.17;
  std::vector<double> samples_;
};

struct GridSpec {
  int nx = 48;
  double dt = 0.0;
  double dx = 0.0;
  double fs = 16000.0;

  /// Grid over a tract of `length` with the smallest integer oversampling of
  /// `fs` whose Courant number does not exceed `courant`.
  static GridSpec uniform(double length, int nx, double fs, double courant, double c) {
    if (nx < 3) throw DomainError("GridSpec: nx must be at least 3");
    if (!(courant > 0.0)) throw DomainError("GridSpec: Courant target must be positive");
    if (!(fs > 0.0) || !(length > 0.0) || !(c > 0.0)) throw DomainError("GridSpec: fs, length and c must be positive");
    GridSpec g;
    g.nx = nx;
    g.fs = fs;
    g.dx = length / static_cast<double>(nx - 1);
    const double m = std::ceil(c / (fs * g.dx * courant) - 1e-12);
    g.dt = 1.0 / (fs * std::max(1.0, m));
    return g;
  }

  /// Solver steps per output sample.
  std::size_t decimation() const {
    const double m = 1.0 / (fs * dt);
    const double r = std::round(m);
    if (r < 1.0 || std::abs(m - r) > 1e-6 * r)
      throw DomainError("GridSpec: dt must divide the audio sample period");
    return static_cast<std::size_t>(r);
  }

  void validate() const {
    if (nx < 3) throw DomainError("GridSpec: nx must be at least 3");
    if (!(dt > 0.0) || !(dx > 0.0) || !(fs > 0.0)) throw DomainError("GridSpec: dt, dx and fs must be positive");
    (void)decimation();
  }
};

struct BoundaryParams {
  double zeta = 0.06;   // Robin radiation coefficient at the lips
  double alpha = 343.0; // glottal amplitude scale, c * u_scale
  double beta = 0.0;    // propagation damping, 1/s

  void validate() const {
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw DomainError("BoundaryParams: zeta must be finite and >= 0");
    if (!std::isfinite(alpha)) throw DomainError("BoundaryParams: alpha must be finite");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("BoundaryParams: beta must be finite and >= 0");
  }
};

/// Velocity potential at two consecutive time levels.
struct FieldState {
  std::vector<double> psi_prev;
  std::vector<double> psi_curr;

  static FieldState zeros(std::size_t nx) { return {std::vector<double>(nx, 0.0), std::vector<double>(nx, 0.0)}; }
};

enum class Antialias { none, one_pole, fir };

struct SimOptions {
  Antialias antialias = Antialias::fir;  // filter applied before integer-factor decimation
  double blowup_guard = 1e12;
};

/// Hann-windowed sinc low-pass at the solver rate, cut off at 0.45 of the
/// output rate, unit DC gain. Half-length 8 output periods.
inline std::vector<double> decimation_filter(std::size_t m) {
  const std::size_t half = 8 * m;
  const double cutoff = 0.45 / static_cast<double>(m);  // cycles per solver sample
  std::vector<double> h(2 * half + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double k = static_cast<double>(i) - static_cast<double>(half);
    const double sinc = k == 0.0 ? 2.0 * cutoff : std::sin(2.0 * std::numbers::pi * cutoff * k) / (std::numbers::pi * k);
    const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * k / static_cast<double>(half + 1));
    h[i] = sinc * w;
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

/// Courant number c*dt/dx. Throws StabilityError above 1.
inline double check_cfl(const GridSpec& grid, const PhysicalConstants& consts) {
  if (!(grid.dt > 0.0) || !(grid.dx > 0.0)) throw DomainError("check_cfl: dt and dx must be positive");
  consts.validate();
  const double courant = consts.c * grid.dt / grid.dx;
  if (courant > 1.0 + 1e-12)
    throw StabilityError("Courant number " + std::to_string(courant) + " exceeds 1; reduce dt or coarsen the grid");
  return courant;
}

/// Linear re-gridding of `a` onto `nx` uniform points over [0, L].
inline std::vector<double> resample_area(const AreaFunction& a, int nx) {
  if (nx < 3) throw DomainError("resample_area: nx must be at least 3");
  std::vector<double> out(static_cast<std::size_t>(nx));
  for (int i = 0; i < nx; ++i) out[static_cast<std::size_t>(i)] = a.at_normalized(static_cast<double>(i) / (nx - 1));
  out.front() = a.front();
  out.back() = a.back();
  return out;
}

/// Low-frequency radiation impedance rho / (A zeta) implied by the Robin boundary.
inline double radiation_impedance_estimate(double area_at_lips, double zeta, double rho) {
  if (!(area_at_lips > 0.0)) throw DomainError("radiation_impedance_estimate: area must be positive");
  if (zeta == 0.0) throw DomainError("radiation_impedance_estimate: zeta = 0 is a rigid termination");
  if (!(zeta > 0.0)) throw DomainError("radiation_impedance_estimate: zeta must be positive");
  return rho / (area_at_lips * zeta);
}

/// Precomputed stencil for one (area, grid, boundary) configuration. Steps in place.
class WebsterSolver {
 public:
  WebsterSolver(std::span<const double> area, const GridSpec& grid, const BoundaryParams& bc,
                const PhysicalConstants& consts, double blowup_guard = 1e12)
      : grid_(grid), guard_(blowup_guard) {
    const double courant = check_cfl(grid, consts);
    grid.validate();
    bc.validate();
    const auto nx = static_cast<std::size_t>(grid.nx);
    if (area.size() != nx) throw DomainError("WebsterSolver: area length must equal nx");
    for (double a : area)
      if (!(a > 0.0)) throw DomainError("WebsterSolver: area must be strictly positive");

    const double lam2 = courant * courant;
    up_.assign(nx, 0.0);
    down_.assign(nx, 0.0);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double face_up = 0.5 * (area[i] + area[i + 1]);
      const double face_down = 0.5 * (area[i - 1] + area[i]);
      // node weight is the mean of its two face areas, which keeps the
      // scheme stable for Courant <= 1 whatever the area profile
      const double node = 0.5 * (face_up + face_down);
      up_[i] = lam2 * face_up / node;
      down_[i] = lam2 * face_down / node;
    }
    const double damp = 0.5 * bc.beta * grid.dt;
    inv_lead_ = 1.0 / (1.0 + damp);
    lag_ = 1.0 - damp;
    glottis_gain_ = grid.dx * bc.alpha / area[0];
    mouth_ratio_ = bc.zeta * grid.dx / grid.dt;
    state_ = FieldState::zeros(nx);
    next_.assign(nx, 0.0);
  }

  explicit WebsterSolver(const FieldState& initial, std::span<const double> area, const GridSpec& grid,
                         const BoundaryParams& bc, const PhysicalConstants& consts, double blowup_guard = 1e12)
      : WebsterSolver(area, grid, bc, consts, blowup_guard) {
    if (initial.psi_prev.size() != area.size() || initial.psi_curr.size() != area.size())
      throw DomainError("WebsterSolver: state length must equal nx");
    state_ = initial;
  }

  /// Advances one time level; `ug_next` is the glottal flow at the new level.
  void step(double ug_next) {
    const auto& prev = state_.psi_prev;
    const auto& curr = state_.psi_curr;
    const std::size_t n = curr.size();
    double peak = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double lap = up_[i] * (curr[i + 1] - curr[i]) - down_[i] * (curr[i] - curr[i - 1]);
      const double v = (2.0 * curr[i] - lag_ * prev[i] + lap) * inv_lead_;
      next_[i] = v;
      peak = std::max(peak, std::abs(v));
    }
    next_[0] = next_[1] - glottis_gain_ * ug_next;
    next_[n - 1] = (next_[n - 2] + mouth_ratio_ * curr[n - 1]) / (1.0 + mouth_ratio_);
    peak = std::max({peak, std::abs(next_[0]), std::abs(next_[n - 1])});
    if (!(peak <= guard_)) throw NumericalBlowup("Webster solver diverged: |psi| exceeded the blowup guard");
    std::swap(state_.psi_prev, state_.psi_curr);
    std::swap(state_.psi_curr, next_);
  }

  const FieldState& state() const { return state_; }

  /// p = -rho dpsi/dt at the lips between the last two levels.
  double lip_pressure(double rho) const {
    const std::size_t last = state_.psi_curr.size() - 1;
    return -rho * (state_.psi_curr[last] - state_.psi_prev[last]) / grid_.dt;
  }

 private:
  GridSpec grid_;
  double guard_;
  std::vector<double> up_, down_;
  double inv_lead_ = 1.0, lag_ = 1.0;
  double glottis_gain_ = 0.0, mouth_ratio_ = 0.0;
  FieldState state_;
  std::vector<double> next_;
};

inline FieldState webster_step(const FieldState& state, std::span<const double> area, const GridSpec& grid,
                               const BoundaryParams& bc, const PhysicalConstants& consts, double ug_now,
                               double blowup_guard = 1e12) {
  WebsterSolver solver(state, area, grid, bc, consts, blowup_guard);
  solver.step(ug_now);
  return solver.state();
}

/// Runs the solver over `ug` (one value per solver step) and returns the lip
/// pressure decimated to grid.fs. ug.size() must be a multiple of the decimation factor.
inline AudioSignal simulate(const AreaFunction& area, const BoundaryParams& bc, const PhysicalConstants& consts,
                            const GridSpec& grid, std::span<const double> ug, const SimOptions& opts = {}) {
  const std::size_t m = grid.decimation();
  if (ug.size() % m != 0) throw DomainError("simulate: excitation length must be a multiple of the decimation factor");
  const auto nodes = resample_area(area, grid.nx);
  WebsterSolver solver(nodes, grid, bc, consts, opts.blowup_guard);

  std::vector<double> lip(ug.size());
  for (std::size_t n = 0; n < ug.size(); ++n) {
    solver.step(ug[n]);
    lip[n] = solver.lip_pressure(consts.rho);
  }

  std::vector<double> out(ug.size() / m);
  if (m == 1 || opts.antialias == Antialias::none) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = lip[j * m];
  } else if (opts.antialias == Antialias::one_pole) {
    // corner at 0.45 fs
    const double pole = std::exp(-2.0 * std::numbers::pi * 0.45 * grid.fs * grid.dt);
    double smoothed = 0.0;
    for (std::size_t n = 0; n < lip.size(); ++n) {
      smoothed = pole * smoothed + (1.0 - pole) * lip[n];
      if (n % m == 0) out[n / m] = smoothed;
    }
  } else {
    const auto h = decimation_filter(m);
    const auto half = static_cast<long>(h.size() / 2);
    const auto len = static_cast<long>(lip.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      const long centre = static_cast<long>(j * m);
      double acc = 0.0;
      for (long k = -half; k <= half; ++k) {
        const long idx = centre + k;
        if (idx >= 0 && idx < len) acc += h[static_cast<std::size_t>(k + half)] * lip[static_cast<std::size_t>(idx)];
      }
      out[j] = acc;
    }
  }
  return AudioSignal(std::move(out), grid.fs);
}

}  // namespace webster
