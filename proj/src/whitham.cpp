#include "kdvlab/whitham.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "kdvlab/errors.hpp"
#include "kdvlab/quadrature.hpp"
#include "kdvlab/specfun.hpp"

namespace kdvlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

// Coefficients of the hodograph rows, regular on 0 <= m <= 1.
//   lam_i = (v_i - 2 s1) / 2
//   c12   = 1/E + m/(E - m1 K)          (row 2 after dividing Phi2 - Phi1 by -2 K delta m1)
//   l2s   = lam2 / (2K)
//   d23   = 2 K N / ((E - m1 K)(K - E))  (row 3 after dividing Phi3 - Phi2 by -delta m)
struct RowCoeffs {
  double K = 0.0, E = 0.0;
  double lam1 = 0.0, lam2 = 0.0, lam3 = 0.0;
  double c12 = 0.0, l2s = 0.0, d23 = 0.0;
};

RowCoeffs row_coeffs(double delta, double m, double m1) {
  RowCoeffs c;
  if (m1 == 0.0) {
    c.K = kInf;
    c.E = 1.0;
    c.lam3 = -2.0 * delta;
    c.c12 = 2.0;
    c.d23 = 2.0;
    return c;
  }
  const EllipticCombos e = elliptic_combos(m, m1);
  // P = (E - m1 K)/m, Q = (K - E)/m, R = N/m^2, all finite at m = 0.
  double P, Q, R;
  if (m <= 0.5) {
    P = e.K * (0.5 - m * e.sigma);
    Q = e.K * (0.5 + m * e.sigma);
    R = e.K * (0.5 - (2.0 - m) * e.sigma);
  } else {
    P = e.E_minus_m1K / m;
    Q = e.K_minus_E / m;
    R = e.N / (m * m);
  }
  c.K = e.K;
  c.E = e.E;
  c.lam1 = 2.0 * delta * m1 * e.K / e.E;
  c.lam2 = -2.0 * delta * m1 * e.K / P;
  c.lam3 = -2.0 * delta * e.K / Q;
  c.c12 = 1.0 / e.E + 1.0 / P;
  c.l2s = -delta * m1 / P;
  c.d23 = 2.0 * R * e.K / (P * Q);
  return c;
}

struct Parametrization {
  double delta, m, m1;
};

Parametrization parametrize(const BetaTriple& b) {
  if (!(b.beta1 >= b.beta2 && b.beta2 >= b.beta3) || !std::isfinite(b.beta1) || !std::isfinite(b.beta3)) {
    throw DomainError("BetaTriple: requires beta1 >= beta2 >= beta3");
  }
  const double delta = b.beta1 - b.beta3;
  if (delta == 0.0) return {0.0, 0.0, 1.0};
  return {delta, (b.beta2 - b.beta3) / delta, (b.beta1 - b.beta2) / delta};
}

// Tensor rule for the phase integral: rho = A beta1 + B beta2 + C beta3, weights normalised to 1.
struct PhaseRule {
  std::vector<double> A, B, C, W;
};

const PhaseRule& phase_rule(int order) {
  static std::mutex mtx;
  static std::map<int, std::unique_ptr<PhaseRule>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it != cache.end()) return *it->second;
  const QuadratureRule mu = gauss_jacobi(order, -0.5, 0.0);
  const QuadratureRule nu = gauss_chebyshev(order);
  auto rule = std::make_unique<PhaseRule>();
  const double norm = 1.0 / (2.0 * std::sqrt(2.0) * kPi);
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      const double a = 0.5 * (1.0 + mu.nodes[i]);
      rule->A.push_back(a * 0.5 * (1.0 + nu.nodes[j]));
      rule->B.push_back(a * 0.5 * (1.0 - nu.nodes[j]));
      rule->C.push_back(0.5 * (1.0 - mu.nodes[i]));
      rule->W.push_back(norm * mu.weights[i] * nu.weights[j]);
    }
  }
  return *cache.emplace(order, std::move(rule)).first->second;
}

// Rows of the regularised hodograph system.
std::array<double, 3> rows(const BetaTriple& b, double x, double t, const InitialData& data, int order) {
  const Parametrization p = parametrize(b);
  const RowCoeffs c = row_coeffs(p.delta, p.m, p.m1);
  const PhaseDerivatives ph = phase_derivatives(b, data, order);
  const double s1 = b.beta1 + b.beta2 + b.beta3;
  const double g1 = 2.0 * t + ph.grad[0];
  const double g2 = 2.0 * t + ph.grad[1];
  return {2.0 * s1 * t + ph.q + c.lam1 * g1 - x, c.c12 * g1 + 2.0 * c.l2s * ph.hess[0][1],
          c.d23 * g2 + 2.0 * c.lam3 * ph.hess[1][2]};
}

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

// Damped Newton with a central-difference Jacobian. `valid` rejects trial points, F may throw
// DomainError for points outside the branch range (treated as invalid).
template <int N, class F, class Valid>
Vec<N> damped_newton(F&& f, Vec<N> z, Valid&& valid, double tol, int max_it, double hscale,
                     const char* what) {
  auto safe = [&](const Vec<N>& v, Vec<N>& out) {
    if (!valid(v)) return false;
    try {
      out = f(v);
    } catch (const DomainError&) {
      return false;
    }
    return out.allFinite();
  };
  Vec<N> r;
  if (!safe(z, r)) throw ConvergenceError(std::string(what) + ": invalid initial guess");
  std::vector<double> history;
  for (int it = 0; it < max_it; ++it) {
    const double rn = r.template lpNorm<Eigen::Infinity>();
    history.push_back(rn);
    if (rn < tol) return z;
    Eigen::Matrix<double, N, N> J;
    for (int j = 0; j < N; ++j) {
      const double h = 1e-6 * hscale;
      Vec<N> zp = z, zm = z, rp, rm;
      zp(j) += h;
      zm(j) -= h;
      const bool okp = safe(zp, rp), okm = safe(zm, rm);
      if (okp && okm) {
        J.col(j) = (rp - rm) / (2.0 * h);
      } else if (okp) {
        J.col(j) = (rp - r) / h;
      } else if (okm) {
        J.col(j) = (r - rm) / h;
      } else {
        throw ConvergenceError(std::string(what) + ": Jacobian stencil left the admissible region", history);
      }
    }
    const Vec<N> step = J.fullPivLu().solve(-r);
    if (!step.allFinite()) throw ConvergenceError(std::string(what) + ": singular Jacobian", history);
    double lam = 1.0;
    bool accepted = false;
    Vec<N> zn, rnext;
    while (lam > 1e-6) {
      zn = z + lam * step;
      if (safe(zn, rnext) && rnext.template lpNorm<Eigen::Infinity>() < rn) {
        accepted = true;
        break;
      }
      lam *= 0.5;
    }
    if (!accepted) {
      // Stagnation at the rounding floor counts as convergence if the residual is already small.
      if (rn < 1e3 * tol) return z;
      throw ConvergenceError(std::string(what) + ": line search failed", history);
    }
    const double stepn = (zn - z).template lpNorm<Eigen::Infinity>();
    z = zn;
    r = rnext;
    if (stepn <= 1e-15 * hscale && r.template lpNorm<Eigen::Infinity>() < 1e3 * tol) return z;
  }
  if (r.template lpNorm<Eigen::Infinity>() < 1e3 * tol) return z;
  throw ConvergenceError(std::string(what) + ": no convergence", history);
}

BetaTriple family_beta(double m, double b1, double b3) {
  return {b1, m == 1.0 ? b1 : b3 + m * (b1 - b3), b3};
}

FamilyPoint solve_family_at(double m, double t, const FamilyPoint& seed, const InitialData& data,
                            const WhithamOptions& opt) {
  const int order = opt.quadrature_order;
  auto F = [&](const Vec<2>& z) {
    const auto r = rows(family_beta(m, z(0), z(1)), 0.0, t, data, order);
    return Vec<2>(r[1], r[2]);
  };
  auto valid = [](const Vec<2>& z) { return z(0) > z(1); };
  Vec<2> z0(seed.beta.beta1, seed.beta.beta3);
  const double scale = std::max(seed.beta.delta(), 1e-6);
  const Vec<2> z = damped_newton<2>(F, z0, valid, opt.newton_tol, opt.max_newton, scale, "hodograph edge system");
  FamilyPoint out;
  out.m = m;
  out.beta = family_beta(m, z(0), z(1));
  out.x = rows(out.beta, 0.0, t, data, order)[0];
  return out;
}

}  // namespace

double BetaTriple::m() const { return parametrize(*this).m; }
double BetaTriple::m1() const { return parametrize(*this).m1; }
double BetaTriple::s() const { return std::sqrt(m()); }

double BetaTriple::alpha() const {
  const Parametrization p = parametrize(*this);
  if (p.delta == 0.0 || p.m == 0.0) return -beta3;
  if (p.m1 == 0.0) return -beta1;
  const EllipticCombos e = elliptic_combos(p.m, p.m1);
  // -beta1 + delta E/K = -beta3 - delta (K - E)/K
  return -beta3 - p.delta * e.K_minus_E / e.K;
}

double BetaTriple::tau() const {
  const Parametrization p = parametrize(*this);
  if (p.m == 0.0) return kInf;
  if (p.m1 == 0.0) return 0.0;
  return elliptic_combos(p.m1, p.m).K / elliptic_combos(p.m, p.m1).K;
}

double BetaTriple::ubar() const { return beta1 + beta2 + beta3 + 2.0 * alpha(); }

Velocities whitham_velocities(const BetaTriple& b) {
  const Parametrization p = parametrize(b);
  if (p.delta == 0.0) {
    throw DomainError("whitham_velocities: beta_i + alpha = 0 (all branch points coincide)");
  }
  const RowCoeffs c = row_coeffs(p.delta, p.m, p.m1);
  const double s1 = 2.0 * (b.beta1 + b.beta2 + b.beta3);
  return {s1 + 2.0 * c.lam1, s1 + 2.0 * c.lam2, s1 + 2.0 * c.lam3};
}

PhaseDerivatives phase_derivatives(const BetaTriple& b, const InitialData& data, int order) {
  const PhaseRule& rule = phase_rule(order);
  PhaseDerivatives out;
  double g[3] = {0, 0, 0};
  double h[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double q = 0.0;
  const std::size_t n = rule.W.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rule.A[i], bb = rule.B[i], c = rule.C[i], w = rule.W[i];
    const double rho = a * b.beta1 + bb * b.beta2 + c * b.beta3;
    const auto jet = data.f_minus_jet(rho);
    q += w * jet.f;
    const double w1 = w * jet.d1, w2 = w * jet.d2;
    g[0] += w1 * a;
    g[1] += w1 * bb;
    g[2] += w1 * c;
    h[0][0] += w2 * a * a;
    h[0][1] += w2 * a * bb;
    h[0][2] += w2 * a * c;
    h[1][1] += w2 * bb * bb;
    h[1][2] += w2 * bb * c;
    h[2][2] += w2 * c * c;
  }
  out.q = q;
  for (int i = 0; i < 3; ++i) out.grad[i] = g[i];
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) out.hess[i][j] = out.hess[j][i] = h[i][j];
  }
  return out;
}

double q_phase(const BetaTriple& b, const InitialData& data) {
  parametrize(b);
  double prev = phase_derivatives(b, data, 16).q;
  for (int order = 32; order <= 256; order *= 2) {
    const double cur = phase_derivatives(b, data, order).q;
    if (std::abs(cur - prev) < 1e-10) return cur;
    prev = cur;
  }
  return prev;
}

std::array<double, 3> hodograph_residual(const BetaTriple& b, double x, double t, const InitialData& data,
                                         const WhithamOptions& opt) {
  const Parametrization p = parametrize(b);
  const RowCoeffs c = row_coeffs(p.delta, p.m, p.m1);
  const PhaseDerivatives ph = phase_derivatives(b, data, opt.quadrature_order);
  const double s1 = b.beta1 + b.beta2 + b.beta3;
  const double lam[3] = {c.lam1, c.lam2, c.lam3};
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i) {
    const double v = 2.0 * s1 + 2.0 * lam[i];
    const double w = ph.q + lam[i] * ph.grad[i];
    r[i] = x - v * t - w;
  }
  return r;
}

BetaTriple hodograph_solve(double x, double t, const InitialData& data, const BetaTriple& guess,
                           const WhithamOptions& opt) {
  auto F = [&](const Vec<3>& z) {
    const auto r = rows({z(0), z(1), z(2)}, x, t, data, opt.quadrature_order);
    return Vec<3>(r[0], r[1], r[2]);
  };
  auto valid = [](const Vec<3>& z) { return z(0) >= z(1) && z(1) >= z(2) && z(0) > z(2); };
  const double scale = std::max(guess.delta(), 1e-6);
  const Vec<3> z = damped_newton<3>(F, Vec<3>(guess.beta1, guess.beta2, guess.beta3), valid, opt.newton_tol,
                                    opt.max_newton, scale, "hodograph_solve");
  return {z(0), z(1), z(2)};
}

WhithamZone::WhithamZone(double t, const InitialData& data, const WhithamOptions& opt)
    : t_(t), data_(data), opt_(opt), bp_(breakup_point(data)) {
  const double tau = t - bp_.t_c;
  if (tau < 0.0) return;
  empty_ = false;
  const double uc = bp_.u_c;
  if (tau <= 1e-14) {
    FamilyPoint p{0.0, {uc, uc, uc}, bp_.x_c};
    family_ = {p, FamilyPoint{1.0, {uc, uc, uc}, bp_.x_c}};
    return;
  }
  // Universal self-similar edges of the cubic model, scaled by sqrt(tau / k).
  const double r3 = std::sqrt(3.0);
  const double hat_trail[2] = {2.0 * r3, -0.5 * r3};
  const double hat_lead[2] = {0.5 * std::sqrt(15.0), -std::sqrt(20.0 / 3.0)};
  double tau_j = std::min(tau, 1e-5);
  auto seed = [&](const double* hat, double m, double tj) {
    const double r = std::sqrt(tj / bp_.k);
    FamilyPoint p;
    p.m = m;
    p.beta = family_beta(m, uc + r * hat[0], uc + r * hat[1]);
    return p;
  };
  if (tau <= 1e-9) {
    // The width scales like tau^(3/2) and is below double resolution of x; keep the
    // self-similar branch points on a collapsed zone.
    FamilyPoint a = seed(hat_trail, 0.0, tau), b = seed(hat_lead, 1.0, tau);
    a.x = b.x = bp_.x_c + 6.0 * uc * tau;
    family_ = {a, b};
    return;
  }
  const double lo = data_.branch_range().first;
  // beta3 approaching the minimum of u0 needs the increasing branch, which is not modelled.
  auto check_branch = [&](const FamilyPoint& lead, double tau_reached) {
    if (lead.beta.beta3 - lo < 0.1 * (uc - lo)) {
      throw DomainError("WhithamZone: at t = " + std::to_string(t) + " beta3 passes the minimum of u0 (near t = " +
                        std::to_string(bp_.t_c + tau_reached) + "); only the decreasing branch is supported");
    }
  };
  FamilyPoint trail = solve_family_at(0.0, bp_.t_c + tau_j, seed(hat_trail, 0.0, tau_j), data_, opt_);
  FamilyPoint lead = solve_family_at(1.0, bp_.t_c + tau_j, seed(hat_lead, 1.0, tau_j), data_, opt_);
  while (tau_j < tau) {
    double next = std::min(tau, 1.5 * tau_j);
    auto rescale = [&](FamilyPoint p) {
      const double ratio = std::sqrt(next / tau_j);
      p.beta = family_beta(p.m, uc + (p.beta.beta1 - uc) * ratio, uc + (p.beta.beta3 - uc) * ratio);
      return p;
    };
    // Shorter steps keep the extrapolated leading edge inside the branch range.
    while (rescale(lead).beta.beta3 <= lo && next > 1.001 * tau_j) next = tau_j + 0.5 * (next - tau_j);
    try {
      trail = solve_family_at(0.0, bp_.t_c + next, rescale(trail), data_, opt_);
      lead = solve_family_at(1.0, bp_.t_c + next, rescale(lead), data_, opt_);
    } catch (const ConvergenceError&) {
      check_branch(lead, tau_j);
      throw;
    }
    tau_j = next;
  }
  // Modulus family across the zone, clustered at both edges.
  const int n = std::max(opt_.family_samples, 3);
  family_.reserve(n);
  family_.push_back(trail);
  for (int i = 1; i < n - 1; ++i) {
    const double s = std::sin(0.5 * kPi * i / (n - 1));
    const double m = s * s;
    FamilyPoint guess = family_.back();
    guess.beta = family_beta(m, guess.beta.beta1, guess.beta.beta3);
    try {
      family_.push_back(solve_family_at(m, t_, guess, data_, opt_));
    } catch (const ConvergenceError&) {
      check_branch(lead, tau);
      throw;
    }
  }
  family_.push_back(lead);
  for (std::size_t i = 1; i < family_.size(); ++i) {
    if (!(family_[i].x > family_[i - 1].x)) {
      throw ConvergenceError("WhithamZone: modulus family is not monotone in x (t = " + std::to_string(t) +
                             "); the one-phase description has likely broken down");
    }
  }
}

double WhithamZone::x_minus() const {
  if (empty_) throw NoSolutionError("WhithamZone: empty zone before the catastrophe time");
  return family_.front().x;
}

double WhithamZone::x_plus() const {
  if (empty_) throw NoSolutionError("WhithamZone: empty zone before the catastrophe time");
  return family_.back().x;
}

FamilyPoint WhithamZone::solve_family(double m, const FamilyPoint& seed) const {
  return solve_family_at(m, t_, seed, data_, opt_);
}

BetaTriple WhithamZone::beta(double x) const {
  if (!contains(x)) {
    throw NoSolutionError("WhithamZone: x = " + std::to_string(x) + " lies outside the oscillatory zone");
  }
  if (x == family_.front().x) return family_.front().beta;
  if (x == family_.back().x) return family_.back().beta;
  auto it = std::upper_bound(family_.begin(), family_.end(), x,
                             [](double v, const FamilyPoint& p) { return v < p.x; });
  FamilyPoint lo = *(it - 1), hi = *it;
  auto interpolate = [&](double m) {
    const double w = (m - lo.m) / (hi.m - lo.m);
    FamilyPoint g;
    g.m = m;
    g.beta = family_beta(m, lo.beta.beta1 + w * (hi.beta.beta1 - lo.beta.beta1),
                         lo.beta.beta3 + w * (hi.beta.beta3 - lo.beta.beta3));
    return g;
  };
  // Illinois regula falsi on x(m) - x.
  double fa = lo.x - x, fb = hi.x - x;
  int side = 0;
  const double xtol = 1e-13 * (1.0 + std::abs(x));
  for (int it = 0; it < 100; ++it) {
    double m = (lo.m * fb - hi.m * fa) / (fb - fa);
    if (!(m > lo.m && m < hi.m)) m = 0.5 * (lo.m + hi.m);
    const FamilyPoint p = solve_family(m, interpolate(m));
    const double fm = p.x - x;
    if (std::abs(fm) <= xtol || hi.m - lo.m < 1e-15) return p.beta;
    if ((fm < 0) == (fa < 0)) {
      lo = p, fa = fm;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      hi = p, fb = fm;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  throw ConvergenceError("WhithamZone::beta: modulus search did not converge");
}

std::optional<std::pair<double, double>> whitham_edges(double t, const InitialData& data,
                                                       const WhithamOptions& opt) {
  WhithamOptions o = opt;
  o.family_samples = 3;
  const WhithamZone zone(t, data, o);
  if (zone.empty()) return std::nullopt;
  return std::make_pair(zone.x_minus(), zone.x_plus());
}

double finite_gap_eval(const BetaTriple& b, double q0, double x, double t, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("finite_gap_eval: epsilon must be positive");
  const Parametrization p = parametrize(b);
  const double ubar = b.ubar();
  if (p.delta == 0.0 || p.m == 0.0 || p.m1 == 0.0) return ubar;
  const EllipticCombos e = elliptic_combos(p.m, p.m1);
  const double kp = elliptic_combos(p.m1, p.m).K;
  const double s1 = b.beta1 + b.beta2 + b.beta3;
  const double z = std::sqrt(p.delta) * (x - 2.0 * t * s1 - q0) / (2.0 * epsilon * e.K);
  return ubar + p.delta / (2.0 * e.K * e.K) * d2_log_theta({z, kp / e.K});
}

AsymptoticSolution::AsymptoticSolution(double t, const InitialData& data, const WhithamOptions& opt)
    : data_(data), zone_(t, data, opt), opt_(opt) {}

double AsymptoticSolution::u(double x, double epsilon) const {
  if (!(epsilon > 0.0)) throw DomainError("asymptotic_u: epsilon must be positive");
  if (zone_.empty()) return hopf_evaluate(data_, x, zone_.t());
  if (x <= zone_.x_minus()) return hopf_evaluate_branch(data_, x, zone_.t(), -1);
  if (x >= zone_.x_plus()) return hopf_evaluate_branch(data_, x, zone_.t(), +1);
  const BetaTriple b = zone_.beta(x);
  const double q = phase_derivatives(b, data_, opt_.quadrature_order).q;
  return finite_gap_eval(b, q, x, zone_.t(), epsilon);
}

double AsymptoticSolution::ubar(double x) const {
  if (zone_.empty()) return hopf_evaluate(data_, x, zone_.t());
  if (x <= zone_.x_minus()) return hopf_evaluate_branch(data_, x, zone_.t(), -1);
  if (x >= zone_.x_plus()) return hopf_evaluate_branch(data_, x, zone_.t(), +1);
  return zone_.beta(x).ubar();
}

double asymptotic_u(double x, double t, double epsilon, const InitialData& data) {
  return AsymptoticSolution(t, data).u(x, epsilon);
}

}  // namespace kdvlab
