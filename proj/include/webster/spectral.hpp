#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <algorithm>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "webster/errors.hpp"
#include "webster/signal.hpp"

namespace webster {

namespace detail {
// FFTW planning is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-to-complex DFT of a fixed size backed by an FFTW plan.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n == 0) throw DomainError("RealFft: size must be positive");
    in_.reset(fftw_alloc_real(n));
    out_.reset(fftw_alloc_complex(n / 2 + 1));
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Transforms `frame` zero-padded (or truncated) to size(); writes |X[k]|.
  void magnitude(std::span<const double> frame, std::span<double> mag) {
    load(frame);
    fftw_execute(plan_);
    for (std::size_t k = 0; k < bins(); ++k) mag[k] = std::hypot(out_.get()[k][0], out_.get()[k][1]);
  }

  void spectrum(std::span<const double> frame, std::span<std::complex<double>> spec) {
    load(frame);
    fftw_execute(plan_);
    for (std::size_t k = 0; k < bins(); ++k) spec[k] = {out_.get()[k][0], out_.get()[k][1]};
  }

 private:
  struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
  };

  void load(std::span<const double> frame) {
    const std::size_t n = std::min(frame.size(), n_);
    for (std::size_t i = 0; i < n; ++i) in_.get()[i] = frame[i];
    for (std::size_t i = n; i < n_; ++i) in_.get()[i] = 0.0;
  }

  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

/// c[lag + max_lag] = sum_n b[n] a[n - lag] for lag in [-max_lag, max_lag], via FFT.
inline std::vector<double> cross_correlation(std::span<const double> a, std::span<const double> b, long max_lag) {
  if (max_lag < 0) throw DomainError("cross_correlation: max_lag must be non-negative");
  std::size_t n = 1;
  while (n < a.size() + b.size() + 1) n <<= 1;
  const std::size_t bins = n / 2 + 1;
  struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
  };
  std::unique_ptr<double, FftwFree> real(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> fa(fftw_alloc_complex(bins)), fb(fftw_alloc_complex(bins));
  fftw_plan forward_a, forward_b, inverse;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), fa.get(), FFTW_ESTIMATE);
    forward_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), fb.get(), FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa.get(), real.get(), FFTW_ESTIMATE);
  }
  auto load = [&](std::span<const double> x) {
    std::fill(real.get(), real.get() + n, 0.0);
    std::copy(x.begin(), x.end(), real.get());
  };
  load(a);
  fftw_execute(forward_a);
  load(b);
  fftw_execute(forward_b);
  for (std::size_t k = 0; k < bins; ++k) {
    const std::complex<double> za(fa.get()[k][0], fa.get()[k][1]);
    const std::complex<double> zb(fb.get()[k][0], fb.get()[k][1]);
    const auto prod = zb * std::conj(za);
    fa.get()[k][0] = prod.real();
    fa.get()[k][1] = prod.imag();
  }
  fftw_execute(inverse);
  std::vector<double> out(static_cast<std::size_t>(2 * max_lag + 1), 0.0);
  const auto ln = static_cast<long>(n);
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    if (lag >= static_cast<long>(b.size()) || -lag >= static_cast<long>(a.size())) continue;
    const long idx = lag >= 0 ? lag : ln + lag;
    out[static_cast<std::size_t>(lag + max_lag)] = real.get()[idx] / static_cast<double>(n);
  }
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_a);
    fftw_destroy_plan(forward_b);
    fftw_destroy_plan(inverse);
  }
  return out;
}

/// Hann-windowed magnitude spectrogram, frames x (fft_size/2 + 1), row-major.
/// Frames start at 0 and advance by `hop`; a signal shorter than one frame is
/// zero-padded to a single frame.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> mag;

  double at(std::size_t f, std::size_t k) const { return mag[f * bins + k]; }
};

inline Spectrogram stft_magnitude(std::span<const double> x, std::size_t fft_size, std::size_t hop) {
  if (fft_size == 0 || hop == 0 || hop > fft_size) throw DomainError("stft_magnitude: need 0 < hop <= fft_size");
  RealFft fft(fft_size);
  const auto window = hann_window(fft_size);
  Spectrogram s;
  s.bins = fft.bins();
  s.frames = x.size() <= fft_size ? 1 : 1 + (x.size() - fft_size) / hop;
  s.mag.resize(s.frames * s.bins);
  std::vector<double> frame(fft_size);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < fft_size; ++i) {
      const std::size_t j = start + i;
      frame[i] = j < x.size() ? x[j] * window[i] : 0.0;
    }
    fft.magnitude(frame, std::span<double>(s.mag).subspan(f * s.bins, s.bins));
  }
  return s;
}

}  // namespace webster
