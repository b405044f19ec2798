#include "kdvlab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "kdvlab/errors.hpp"

namespace kdvlab {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

Scheme parse_scheme(const std::string& name) {
  if (name == "integrating_factor_rk4" || name == "if-rk4" || name == "ifrk4") return Scheme::integrating_factor_rk4;
  if (name == "etd_rk4" || name == "etd-rk4" || name == "etdrk4") return Scheme::etd_rk4;
  throw DomainError("unknown scheme '" + name + "'");
}

std::string to_string(Scheme s) {
  return s == Scheme::etd_rk4 ? "etd_rk4" : "integrating_factor_rk4";
}

std::size_t required_points(double length, double epsilon, double factor) {
  return next_power_of_two(static_cast<std::size_t>(std::ceil(factor * length / epsilon)));
}

namespace {

constexpr cplx I{0.0, 1.0};

/// Semi-discrete system v_t = L v + N(v) in Fourier space.
class SpectralSystem {
 public:
  SpectralSystem(const GridFunction& g, double epsilon, bool dealias)
      : x_l_(g.x_left()), x_r_(g.x_right()), n_(g.size()), eps_(epsilon), fft_(g.size()),
        k_(wavenumbers(g.size(), g.length())), mask_(k_.size(), 1.0), lin_(k_.size(), 0.0) {
    mask_.back() = 0.0;
    if (dealias) {
      const std::size_t cutoff = n_ / 3;
      for (std::size_t j = cutoff + 1; j < mask_.size(); ++j) mask_[j] = 0.0;
    }
    kmax_ = 0.0;
    for (std::size_t j = 0; j < k_.size(); ++j)
      if (mask_[j] != 0.0) kmax_ = k_[j];
  }
  virtual ~SpectralSystem() = default;

  virtual void nonlinear(const cvec& v, cvec& out) = 0;
  virtual std::vector<double> velocity(const cvec& v) = 0;
  virtual ConservationRecord invariants(const cvec& v, double t) const = 0;

  const cvec& linear() const { return lin_; }
  double kmax() const { return kmax_; }
  std::size_t size() const { return n_; }
  GridFunction grid(std::vector<double> u) const { return GridFunction(x_l_, x_r_, std::move(u)); }

  /// Parseval: integral of sum_j weight_j |v_j|^2 symbol_j over the period.
  double quadratic(const cvec& v, const std::function<double(double)>& symbol) const {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double w = (j == 0 || j == n_ / 2) ? 1.0 : 2.0;
      s += w * std::norm(v[j]) * symbol(k_[j]);
    }
    const double nd = static_cast<double>(n_);
    return s * (x_r_ - x_l_) / (nd * nd);
  }
  double mean_mode(const cvec& v) const { return v[0].real() * (x_r_ - x_l_) / static_cast<double>(n_); }

  /// Fraction of spectral magnitude carried by the top third of retained modes.
  double tail_fraction(const cvec& v) const {
    double top = 0.0, peak = 0.0;
    std::size_t last = 0;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (mask_[j] != 0.0) last = j;
    const std::size_t start = last - last / 3;
    for (std::size_t j = 0; j <= last; ++j) {
      const double a = std::abs(v[j]);
      peak = std::max(peak, a);
      if (j >= start) top = std::max(top, a);
    }
    return peak > 0.0 ? top / peak : 0.0;
  }

 protected:
  double x_l_, x_r_;
  std::size_t n_;
  double eps_;
  RealFft fft_;
  std::vector<double> k_;
  std::vector<double> mask_;
  cvec lin_;
  double kmax_ = 0.0;
  std::vector<double> work_;
  cvec hat_;
};

class KdvSystem final : public SpectralSystem {
 public:
  KdvSystem(const GridFunction& g, double epsilon, bool dealias) : SpectralSystem(g, epsilon, dealias) {
    for (std::size_t j = 0; j < k_.size(); ++j) lin_[j] = I * eps_ * eps_ * k_[j] * k_[j] * k_[j];
    lin_.back() = 0.0;
  }
  void nonlinear(const cvec& v, cvec& out) override {
    fft_.inverse(v, work_);
    double probe = 0.0;
    for (double& u : work_) {
      probe += u;
      u = u * u;
    }
    if (!std::isfinite(probe)) throw BlowUpError("non-finite solution", std::numeric_limits<double>::quiet_NaN());
    fft_.forward(work_, out);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= -3.0 * I * k_[j] * mask_[j];
  }
  std::vector<double> velocity(const cvec& v) override {
    std::vector<double> u;
    fft_.inverse(v, u);
    return u;
  }
  ConservationRecord invariants(const cvec& v, double t) const override {
    return {t, mean_mode(v), quadratic(v, [](double) { return 1.0; })};
  }
};

/// m_t = -d_x [3u^2 - eps^2 (2 u u_xx + u_x^2)], u = (1 - eps^2 d_xx)^(-1) m.
class ChSystem final : public SpectralSystem {
 public:
  ChSystem(const GridFunction& g, double epsilon, bool dealias) : SpectralSystem(g, epsilon, dealias) {}
  void nonlinear(const cvec& v, cvec& out) override {
    const std::size_t nk = v.size();
    uh_.resize(nk);
    for (std::size_t j = 0; j < nk; ++j) uh_[j] = v[j] / (1.0 + eps_ * eps_ * k_[j] * k_[j]);
    fft_.inverse(uh_, u_);
    hat_.resize(nk);
    for (std::size_t j = 0; j < nk; ++j) hat_[j] = I * k_[j] * uh_[j];
    hat_.back() = 0.0;
    fft_.inverse(hat_, ux_);
    for (std::size_t j = 0; j < nk; ++j) hat_[j] = -k_[j] * k_[j] * uh_[j];
    fft_.inverse(hat_, uxx_);
    work_.resize(n_);
    double probe = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double u = u_[i];
      work_[i] = 3.0 * u * u - eps_ * eps_ * (2.0 * u * uxx_[i] + ux_[i] * ux_[i]);
      probe += work_[i];
    }
    if (!std::isfinite(probe)) throw BlowUpError("non-finite solution", std::numeric_limits<double>::quiet_NaN());
    fft_.forward(work_, out);
    for (std::size_t j = 0; j < nk; ++j) out[j] *= -I * k_[j] * mask_[j];
  }
  std::vector<double> velocity(const cvec& v) override {
    cvec uh(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) uh[j] = v[j] / (1.0 + eps_ * eps_ * k_[j] * k_[j]);
    std::vector<double> u;
    fft_.inverse(uh, u);
    return u;
  }
  ConservationRecord invariants(const cvec& v, double t) const override {
    const double e2 = eps_ * eps_;
    // For u = m / (1 + e2 k^2): |u_k|^2 (1 + e2 k^2) = |m_k|^2 / (1 + e2 k^2).
    return {t, mean_mode(v), quadratic(v, [e2](double k) { return 1.0 / (1.0 + e2 * k * k); })};
  }

 private:
  cvec uh_;
  std::vector<double> u_, ux_, uxx_;
};

/// Fourth-order exponential integrators on a diagonal linear part.
class Integrator {
 public:
  Integrator(SpectralSystem& sys, Scheme scheme) : sys_(sys), scheme_(scheme) {}

  void step(cvec& v, double h) {
    if (h != h_) prepare(h);
    scheme_ == Scheme::etd_rk4 ? etd(v, h) : lawson(v, h);
  }

 private:
  void prepare(double h) {
    h_ = h;
    const cvec& L = sys_.linear();
    const std::size_t nk = L.size();
    e_.resize(nk);
    e2_.resize(nk);
    for (std::size_t j = 0; j < nk; ++j) {
      e_[j] = std::exp(L[j] * h);
      e2_[j] = std::exp(L[j] * h / 2.0);
    }
    if (scheme_ != Scheme::etd_rk4) return;
    // Contour-integral evaluation of the phi-functions avoids cancellation for small |L h|.
    constexpr int contour = 64;
    q_.assign(nk, 0.0);
    f1_.assign(nk, 0.0);
    f2_.assign(nk, 0.0);
    f3_.assign(nk, 0.0);
    for (std::size_t j = 0; j < nk; ++j) {
      cplx q = 0.0, a = 0.0, b = 0.0, c = 0.0;
      for (int r = 0; r < contour; ++r) {
        const cplx z = L[j] * h + std::exp(I * std::numbers::pi * ((r + 0.5) / (contour / 2.0)));
        const cplx ez = std::exp(z), ez2 = std::exp(z / 2.0), z3 = z * z * z;
        q += (ez2 - 1.0) / z;
        a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        b += (2.0 + z + ez * (z - 2.0)) / z3;
        c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      q_[j] = h * q / double(contour);
      f1_[j] = h * a / double(contour);
      f2_[j] = h * b / double(contour);
      f3_[j] = h * c / double(contour);
    }
  }

  void lawson(cvec& v, double h) {
    const std::size_t nk = v.size();
    k1_.resize(nk), k2_.resize(nk), k3_.resize(nk), k4_.resize(nk), tmp_.resize(nk);
    sys_.nonlinear(v, k1_);
    for (std::size_t j = 0; j < nk; ++j) tmp_[j] = e2_[j] * (v[j] + 0.5 * h * k1_[j]);
    sys_.nonlinear(tmp_, k2_);
    for (std::size_t j = 0; j < nk; ++j) tmp_[j] = e2_[j] * v[j] + 0.5 * h * k2_[j];
    sys_.nonlinear(tmp_, k3_);
    for (std::size_t j = 0; j < nk; ++j) tmp_[j] = e_[j] * v[j] + h * e2_[j] * k3_[j];
    sys_.nonlinear(tmp_, k4_);
    for (std::size_t j = 0; j < nk; ++j) {
      v[j] = e_[j] * v[j] +
             h / 6.0 * (e_[j] * k1_[j] + 2.0 * e2_[j] * (k2_[j] + k3_[j]) + k4_[j]);
    }
  }

  void etd(cvec& v, double) {
    const std::size_t nk = v.size();
    k1_.resize(nk), k2_.resize(nk), k3_.resize(nk), k4_.resize(nk), tmp_.resize(nk), a_.resize(nk);
    sys_.nonlinear(v, k1_);
    for (std::size_t j = 0; j < nk; ++j) a_[j] = e2_[j] * v[j] + q_[j] * k1_[j];
    sys_.nonlinear(a_, k2_);
    for (std::size_t j = 0; j < nk; ++j) tmp_[j] = e2_[j] * v[j] + q_[j] * k2_[j];
    sys_.nonlinear(tmp_, k3_);
    for (std::size_t j = 0; j < nk; ++j) tmp_[j] = e2_[j] * a_[j] + q_[j] * (2.0 * k3_[j] - k1_[j]);
    sys_.nonlinear(tmp_, k4_);
    for (std::size_t j = 0; j < nk; ++j) {
      v[j] = e_[j] * v[j] + k1_[j] * f1_[j] + 2.0 * (k2_[j] + k3_[j]) * f2_[j] + k4_[j] * f3_[j];
    }
  }

  SpectralSystem& sys_;
  Scheme scheme_;
  double h_ = -1.0;
  cvec e_, e2_, q_, f1_, f2_, f3_;
  cvec k1_, k2_, k3_, k4_, tmp_, a_;
};

void check_periodic(const GridFunction& u0) {
  const auto& v = u0.values();
  double interior = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) interior = std::max(interior, std::abs(v[i] - v[i - 1]));
  const double wrap = std::abs(v.front() - v.back());
  if (wrap > 1e-12 + 10.0 * interior) throw DomainError("initial data is not periodic on the domain");
}

void validate(const GridFunction& u0, const SolverParams& p, std::vector<double>& snaps) {
  if (!(p.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(p.t_end > 0.0)) throw DomainError("t_end must be positive");
  if (!(p.resolution_factor > 0.0)) throw DomainError("resolution factor must be positive");
  const std::size_t need = required_points(u0.length(), p.epsilon, p.resolution_factor);
  if (static_cast<double>(u0.size()) < p.resolution_factor * u0.length() / p.epsilon) {
    throw ResolutionError("grid of " + std::to_string(u0.size()) + " points under-resolves epsilon; use at least " +
                              std::to_string(need),
                          need);
  }
  check_periodic(u0);
  if (snaps.empty()) snaps.push_back(p.t_end);
  std::sort(snaps.begin(), snaps.end());
  if (snaps.front() < 0.0 || snaps.back() > p.t_end * (1.0 + 1e-14)) {
    throw DomainError("snapshot times must lie in [0, t_end]");
  }
}

double relative_drift(double value, double reference, double scale) {
  return std::abs(value - reference) / std::max({std::abs(reference), scale, 1e-300});
}

SolveReport run(SpectralSystem& sys, cvec v, const SolverParams& p, const std::vector<double>& snaps,
                Scheme scheme, double scale_mass) {
  SolveReport rep;
  double umax = 0.0;
  for (double u : sys.velocity(v)) umax = std::max(umax, std::abs(u));
  double dt = p.dt;
  if (!(dt > 0.0)) {
    // RK4 is stable on the imaginary axis up to 2.8 and the transport speed is 6|u|. A quarter of
    // that bound, capped by the O(eps) oscillation period, keeps dt-halving changes below 1e-9.
    const double cfl = 0.25 * 2.8 / (6.0 * std::max(umax, 1e-3) * sys.kmax());
    dt = std::min({cfl, 2e-3 * p.epsilon, p.t_end / 100.0});
  }
  rep.dt = dt;
  Integrator integ(sys, scheme);
  const ConservationRecord c0 = sys.invariants(v, 0.0);
  double t = 0.0;
  for (double ts : snaps) {
    const double span = ts - t;
    if (span > 0.0) {
      const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
      const double h = span / static_cast<double>(n);
      for (std::size_t s = 0; s < n; ++s) {
        try {
          integ.step(v, h);
        } catch (const BlowUpError&) {
          throw BlowUpError("non-finite solution at t=" + std::to_string(t + h * s), t + h * static_cast<double>(s));
        }
        ++rep.steps;
        if (rep.steps % 64 == 0 && sys.tail_fraction(v) > 1e-3) {
          const double tb = t + h * static_cast<double>(s + 1);
          throw BlowUpError("solution left the resolved band at t=" + std::to_string(tb), tb);
        }
      }
      t = ts;
    }
    auto u = sys.velocity(v);
    for (double x : u)
      if (!std::isfinite(x)) throw BlowUpError("non-finite solution at t=" + std::to_string(t), t);
    const ConservationRecord c = sys.invariants(v, t);
    rep.mass_drift = std::max(rep.mass_drift, relative_drift(c.mass, c0.mass, scale_mass));
    rep.energy_drift = std::max(rep.energy_drift, relative_drift(c.energy, c0.energy, 0.0));
    rep.conservation.push_back(c);
    rep.times.push_back(ts);
    rep.snapshots.push_back(sys.grid(std::move(u)));
  }
  return rep;
}

double abs_integral(const GridFunction& g) {
  double s = 0.0;
  for (double v : g.values()) s += std::abs(v);
  return s * g.dx();
}

}  // namespace

SolveReport kdv_run(const GridFunction& u0, const SolverParams& p, std::vector<double> snapshots) {
  validate(u0, p, snapshots);
  KdvSystem sys(u0, p.epsilon, p.dealias);
  RealFft fft(u0.size());
  cvec v;
  fft.forward(u0.values(), v);
  v.back() = 0.0;
  return run(sys, std::move(v), p, snapshots, p.scheme, abs_integral(u0));
}

std::vector<GridFunction> kdv_solve(const GridFunction& u0, const SolverParams& p, std::vector<double> snapshots) {
  return kdv_run(u0, p, std::move(snapshots)).snapshots;
}

SolveReport ch_run(const GridFunction& u0, const SolverParams& p, std::vector<double> snapshots) {
  validate(u0, p, snapshots);
  ChSystem sys(u0, p.epsilon, p.dealias);
  const GridFunction m0 = momentum_from_velocity(u0, p.epsilon);
  RealFft fft(u0.size());
  cvec v;
  fft.forward(m0.values(), v);
  v.back() = 0.0;
  return run(sys, std::move(v), p, snapshots, Scheme::integrating_factor_rk4, abs_integral(u0));
}

std::vector<GridFunction> ch_solve(const GridFunction& u0, const SolverParams& p, std::vector<double> snapshots) {
  return ch_run(u0, p, std::move(snapshots)).snapshots;
}

GridFunction helmholtz_resolvent(const GridFunction& m, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double e2 = epsilon * epsilon;
  return apply_symbol(m, [e2](double k) { return 1.0 / (1.0 + e2 * k * k); });
}

GridFunction miura_normalize(const GridFunction& m, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double e2 = epsilon * epsilon;
  return apply_symbol(m, [e2](double k) { return 1.0 / std::sqrt(1.0 + e2 * k * k); });
}

GridFunction momentum_from_velocity(const GridFunction& u, double epsilon) {
  const double e2 = epsilon * epsilon;
  return apply_symbol(u, [e2](double k) { return 1.0 + e2 * k * k; });
}

double max_abs_difference(const GridFunction& a, const GridFunction& b) {
  if (a.x_left() != b.x_left() || a.x_right() != b.x_right()) throw DomainError("grids on different domains");
  const GridFunction& fine = a.size() >= b.size() ? a : b;
  const GridFunction& coarse = a.size() >= b.size() ? b : a;
  const std::size_t stride = fine.size() / coarse.size();
  double d = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) d = std::max(d, std::abs(fine[i * stride] - coarse[i]));
  return d;
}

}  // namespace kdvlab
