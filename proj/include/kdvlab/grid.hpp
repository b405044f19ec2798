#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace kdvlab {

/// Periodic function sampled on x_i = x_l + i (x_r - x_l) / n, i = 0..n-1, with n a power of two.
class GridFunction {
 public:
  GridFunction(double x_l, double x_r, std::vector<double> values);
  /// Samples f on the grid.
  template <class F>
  static GridFunction sample(double x_l, double x_r, std::size_t n, F&& f) {
    std::vector<double> v(n);
    const double dx = (x_r - x_l) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(x_l + dx * static_cast<double>(i));
    return GridFunction(x_l, x_r, std::move(v));
  }

  double x_left() const { return x_l_; }
  double x_right() const { return x_r_; }
  double length() const { return x_r_ - x_l_; }
  std::size_t size() const { return values_.size(); }
  double dx() const { return length() / static_cast<double>(values_.size()); }
  double x(std::size_t i) const { return x_l_ + dx() * static_cast<double>(i); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Trapezoid (spectrally accurate) integral over one period.
  double integral() const;

 private:
  double x_l_, x_r_;
  std::vector<double> values_;
};

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// Real-to-complex FFT of fixed length with owned, aligned buffers. Plans are created under a
/// process-wide lock; execution is thread-safe per instance.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  /// Unnormalised forward transform, n/2 + 1 coefficients.
  void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out);
  /// Inverse transform including the 1/n normalisation.
  void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Angular wavenumbers 2 pi j / L, j = 0..n/2.
std::vector<double> wavenumbers(std::size_t n, double length);

/// Applies a real Fourier multiplier symbol(k) to a grid function.
template <class Symbol>
GridFunction apply_symbol(const GridFunction& g, Symbol&& symbol);

/// d^order/dx^order by spectral differentiation (Nyquist mode zeroed for odd orders).
GridFunction spectral_derivative(const GridFunction& g, int order);

}  // namespace kdvlab

#include "kdvlab/grid_impl.hpp"
