#pragma once

// Source -> tract -> lips rendering pipeline used by every command.

#include <cstdint>
#include <span>
#include <vector>

#include "webster/acoustics.hpp"
#include "webster/glottal.hpp"
#include "webster/signal.hpp"

namespace webster {

/// Everything besides the tract geometry and zeta that determines a render.
struct RenderSetup {
  PhysicalConstants consts;
  double length = 0.17;    // m
  int nx = 48;
  double courant = 0.9;    // upper bound; the realised number is at or below it
  double fs = 16000.0;
  double beta = 0.0;
  double u_scale = 1.0;    // glottal scale alpha = c * u_scale
  RosenbergParams source;
  double duration = 0.8;   // s
  std::uint64_t seed = 1;
  Antialias antialias = Antialias::fir;

  GridSpec grid() const { return GridSpec::uniform(length, nx, fs, courant, consts.c); }

  BoundaryParams boundary(double zeta) const { return {zeta, consts.c * u_scale, beta}; }
};

/// Glottal flow generated at the audio rate, then linearly upsampled to the
/// solver rate so the excitation does not depend on the grid.
inline std::vector<double> solver_excitation(const PitchTrajectory& pitch, const RenderSetup& setup,
                                             std::size_t decimation) {
  const auto flow = synthesize_glottal_flow(pitch, setup.source, setup.fs, setup.duration, setup.seed);
  return upsample_linear(flow, decimation);
}

inline AudioSignal render_with_grid(const AreaFunction& area, double zeta, const PitchTrajectory& pitch,
                                    const RenderSetup& setup, const GridSpec& grid) {
  const auto ug = solver_excitation(pitch, setup, grid.decimation());
  return simulate(area, setup.boundary(zeta), setup.consts, grid, ug, SimOptions{setup.antialias, 1e12});
}

inline AudioSignal render(const AreaFunction& area, double zeta, const PitchTrajectory& pitch,
                          const RenderSetup& setup) {
  return render_with_grid(area, zeta, pitch, setup, setup.grid());
}

}  // namespace webster
