#include "kdvlab/multiscale.hpp"

#include <cmath>

#include "kdvlab/errors.hpp"

namespace kdvlab {

Equation parse_equation(const std::string& name) {
  if (name == "kdv" || name == "KdV") return Equation::kdv;
  if (name == "ch" || name == "CH") return Equation::ch;
  throw DomainError("unknown equation '" + name + "'");
}

std::string to_string(Equation e) { return e == Equation::ch ? "ch" : "kdv"; }

MultiscaleFrame make_frame(const BreakupPoint& bp, double epsilon, Equation equation) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(bp.k > 0.0)) throw DomainError("breakup coefficient k must be positive");
  MultiscaleFrame f{bp, epsilon, equation, 0.0};
  if (equation == Equation::ch) {
    f.c0 = 4.0 * bp.u_c;
    if (f.c0 == 0.0) throw DomainError("CH scaling needs u_c != 0");
  }
  return f;
}

namespace {

// X = sx * (x - x_c - 6 u_c (t - t_c)),  T = st * (t - t_c).
struct Scales {
  double sx, st;
};

Scales scales(const MultiscaleFrame& f) {
  const double e = f.epsilon, k = f.bp.k;
  if (f.equation == Equation::kdv) {
    return {1.0 / (std::pow(e, 6.0 / 7.0) * std::pow(k, 1.0 / 7.0)),
            1.0 / (std::pow(e, 4.0 / 7.0) * std::pow(k, 3.0 / 7.0))};
  }
  const double c = std::abs(f.c0);
  return {-std::pow(e / (k * c * c * c), 1.0 / 7.0) / e,
          std::pow(1.0 / (e * e * e * e * k * k * k * f.c0 * f.c0), 1.0 / 7.0)};
}

}  // namespace

ScaledPoint rescale_coords(const MultiscaleFrame& frame, double x, double t) {
  const Scales s = scales(frame);
  const double tau = t - frame.bp.t_c;
  return {s.sx * (x - frame.bp.x_c - 6.0 * frame.bp.u_c * tau), s.st * tau};
}

PhysicalPoint physical_coords(const MultiscaleFrame& frame, double X, double T) {
  const Scales s = scales(frame);
  const double tau = T / s.st;
  return {X / s.sx + frame.bp.x_c + 6.0 * frame.bp.u_c * tau, frame.bp.t_c + tau};
}

double amplitude_scale(const MultiscaleFrame& frame) {
  const double e = frame.epsilon, k = frame.bp.k;
  if (frame.equation == Equation::kdv) return std::pow(e / k, 2.0 / 7.0);
  return -std::pow(e * e * std::abs(frame.c0) / (k * k), 1.0 / 7.0);
}

Pi2Cache::Pi2Cache(double half_width, double rel_tol) : half_width_(half_width), rel_tol_(rel_tol) {
  if (!(half_width >= 50.0)) throw DomainError("Pi2Cache: half width must be at least 50");
}

std::shared_ptr<const Pi2Solution> Pi2Cache::get(double T) {
  const auto key = static_cast<long long>(std::llround(T * 1e12));
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = solutions_.find(key);
  if (it != solutions_.end()) return it->second;
  const double w = pi2_tail_half_width(T, rel_tol_, half_width_);
  auto sol = std::make_shared<const Pi2Solution>(pi2_solve(T, -w, w, rel_tol_));
  solutions_.emplace(key, sol);
  return sol;
}

double Pi2Cache::U(double X, double T) {
  const auto sol = get(T);
  if (X < sol->x_left() || X > sol->x_right()) ++tail_hits_;
  return sol->value(X);
}

std::size_t Pi2Cache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return solutions_.size();
}

double kdv_multiscale_u(const MultiscaleFrame& frame, double x, double t, Pi2Cache& cache) {
  if (frame.equation != Equation::kdv) throw DomainError("kdv_multiscale_u: frame is not KdV");
  const ScaledPoint p = rescale_coords(frame, x, t);
  return frame.bp.u_c + amplitude_scale(frame) * cache.U(p.X, p.T);
}

double ch_multiscale_u(const MultiscaleFrame& frame, double x, double t, Pi2Cache& cache) {
  if (frame.equation != Equation::ch) throw DomainError("ch_multiscale_u: frame is not CH");
  const ScaledPoint p = rescale_coords(frame, x, t);
  return frame.bp.u_c + amplitude_scale(frame) * cache.U(p.X, p.T);
}

double multiscale_u(const MultiscaleFrame& frame, double x, double t, Pi2Cache& cache) {
  return frame.equation == Equation::kdv ? kdv_multiscale_u(frame, x, t, cache)
                                         : ch_multiscale_u(frame, x, t, cache);
}

}  // namespace kdvlab
