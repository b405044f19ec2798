#include "kdvlab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <string>

#include "kdvlab/errors.hpp"

namespace kdvlab {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

GridFunction::GridFunction(double x_l, double x_r, std::vector<double> values)
    : x_l_(x_l), x_r_(x_r), values_(std::move(values)) {
  if (!(x_r > x_l)) throw DomainError("GridFunction: empty domain");
  if (!is_power_of_two(values_.size())) {
    throw DomainError("GridFunction: n_points must be a power of two, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("GridFunction: non-finite sample");
  }
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * dx();
}

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
  }
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2) throw DomainError("RealFft: length must be at least 2");
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->real = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  impl_->spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  if (!impl_->real || !impl_->spec) throw std::bad_alloc();
  const int ni = static_cast<int>(n);
  impl_->fwd = fftw_plan_dft_r2c_1d(ni, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(ni, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) {
  if (in.size() != n_) throw DomainError("RealFft: size mismatch");
  std::memcpy(impl_->real, in.data(), sizeof(double) * n_);
  fftw_execute(impl_->fwd);
  out.resize(n_ / 2 + 1);
  std::memcpy(static_cast<void*>(out.data()), impl_->spec, sizeof(fftw_complex) * (n_ / 2 + 1));
}

void RealFft::inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
  if (in.size() != n_ / 2 + 1) throw DomainError("RealFft: size mismatch");
  std::memcpy(impl_->spec, static_cast<const void*>(in.data()), sizeof(fftw_complex) * (n_ / 2 + 1));
  fftw_execute(impl_->inv);
  out.resize(n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = impl_->real[i] * scale;
}

std::vector<double> wavenumbers(std::size_t n, double length) {
  std::vector<double> k(n / 2 + 1);
  for (std::size_t j = 0; j < k.size(); ++j) k[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / length;
  return k;
}

GridFunction spectral_derivative(const GridFunction& g, int order) {
  if (order < 0) throw DomainError("spectral_derivative: negative order");
  RealFft fft(g.size());
  std::vector<std::complex<double>> hat;
  fft.forward(g.values(), hat);
  const auto k = wavenumbers(g.size(), g.length());
  const std::complex<double> I(0.0, 1.0);
  for (std::size_t j = 0; j < hat.size(); ++j) {
    std::complex<double> f = 1.0;
    for (int o = 0; o < order; ++o) f *= I * k[j];
    hat[j] *= f;
  }
  if (order % 2 == 1) hat.back() = 0.0;
  std::vector<double> out;
  fft.inverse(hat, out);
  return GridFunction(g.x_left(), g.x_right(), std::move(out));
}

}  // namespace kdvlab
