#include "kdvlab/hopf.hpp"

#include <algorithm>
#include <boost/math/interpolators/barycentric_rational.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kdvlab/errors.hpp"

namespace kdvlab {

class InitialData::Profile {
 public:
  virtual ~Profile() = default;
  virtual double u(double x) const = 0;
  virtual double d1(double x) const = 0;
  virtual double d2(double x) const = 0;
  virtual double d3(double x) const = 0;
  virtual double f(double y) const = 0;

  std::string name;
  double branch_lo = 0.0, branch_hi = 0.0;
  double range_lo = 0.0, range_hi = 0.0;
  double sup = 0.0;
  double xi_desc = 0.0, xi_asc = 0.0;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

template <class F>
double golden_min(F&& g, double a, double b) {
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double gc = g(c), gd = g(d);
  for (int i = 0; i < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (gc < gd) {
      b = d, d = c, gd = gc;
      c = b - kGolden * (b - a);
      gc = g(c);
    } else {
      a = c, c = d, gc = gd;
      d = a + kGolden * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

// Sample on [lo, hi], bracket the best sample, refine by golden section.
template <class F>
double sampled_argmin(F&& g, double lo, double hi, int n) {
  int best = 0;
  double gbest = kInf;
  const double h = (hi - lo) / n;
  for (int i = 0; i <= n; ++i) {
    const double v = g(lo + i * h);
    if (v < gbest) gbest = v, best = i;
  }
  const double a = lo + std::max(0, best - 1) * h;
  const double b = lo + std::min(n, best + 1) * h;
  return golden_min(g, a, b);
}

class NegSechSquared final : public InitialData::Profile {
 public:
  explicit NegSechSquared(double a) : a_(a) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw DomainError("neg_sech_squared: amplitude must be positive, got " + std::to_string(a));
    }
    name = "neg_sech_squared";
    branch_lo = -kInf;
    branch_hi = 0.0;
    range_lo = -a;
    range_hi = 0.0;
    sup = a;
  }
  double u(double x) const override {
    const double c = std::cosh(x);
    return -a_ / (c * c);
  }
  double d1(double x) const override {
    const double s2 = sech2(x), th = std::tanh(x);
    return 2.0 * a_ * s2 * th;
  }
  double d2(double x) const override {
    const double s2 = sech2(x), th = std::tanh(x);
    return 2.0 * a_ * s2 * (s2 - 2.0 * th * th);
  }
  double d3(double x) const override {
    const double s2 = sech2(x), th = std::tanh(x);
    return 8.0 * a_ * s2 * th * (th * th - 2.0 * s2);
  }
  double f(double y) const override {
    if (!(y >= -a_ && y < 0.0)) {
      throw DomainError("f_minus: argument " + std::to_string(y) + " outside the decreasing branch range [" +
                        std::to_string(-a_) + ", 0)");
    }
    return -std::acosh(std::sqrt(a_ / -y));
  }

 private:
  static double sech2(double x) {
    const double c = std::cosh(x);
    return 1.0 / (c * c);
  }
  double a_;
};

class TabulatedProfile final : public InitialData::Profile {
 public:
  TabulatedProfile(std::vector<double> x, std::vector<double> u) {
    if (x.size() != u.size() || x.size() < 8) {
      throw DomainError("user_table: need at least 8 (x, u) samples of equal length");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) throw DomainError("user_table: x must be strictly increasing");
    }
    name = "user_table";
    lo_ = x.front();
    hi_ = x.back();
    u_lo_ = u.front();
    u_hi_ = u.back();
    h_ = 1e-3 * (hi_ - lo_) / 10.0;
    sup = 0.0;
    for (double v : u) sup = std::max(sup, std::abs(v));
    interp_ = std::make_shared<boost::math::barycentric_rational<double>>(x.begin(), x.end(),
                                                                                       u.begin(), 3);
  }
  double u(double x) const override {
    if (x <= lo_) return u_lo_;
    if (x >= hi_) return u_hi_;
    return (*interp_)(x);
  }
  double d1(double x) const override {
    if (x <= lo_ || x >= hi_) return 0.0;
    return interp_->prime(x);
  }
  // Richardson-extrapolated 5-point stencils applied to the analytic first derivative.
  double d2(double x) const override {
    auto stencil = [&](double h) {
      return (d1(x - 2 * h) - 8 * d1(x - h) + 8 * d1(x + h) - d1(x + 2 * h)) / (12 * h);
    };
    return (16 * stencil(h_ / 2) - stencil(h_)) / 15;
  }
  double d3(double x) const override {
    auto stencil = [&](double h) {
      return (-d1(x - 2 * h) + 16 * d1(x - h) - 30 * d1(x) + 16 * d1(x + h) - d1(x + 2 * h)) / (12 * h * h);
    };
    return (16 * stencil(h_ / 2) - stencil(h_)) / 15;
  }
  double f(double y) const override {
    if (!(y >= range_lo && y <= range_hi)) {
      throw DomainError("f_minus: argument " + std::to_string(y) + " outside the decreasing branch range [" +
                        std::to_string(range_lo) + ", " + std::to_string(range_hi) + "]");
    }
    double a = branch_lo, b = branch_hi;  // u(a) >= y >= u(b)
    for (int i = 0; i < 200 && b - a > 1e-15 * (1 + std::abs(a)); ++i) {
      const double m = 0.5 * (a + b);
      (u(m) > y ? a : b) = m;
    }
    return 0.5 * (a + b);
  }
  void locate_branch() {
    const int n = 4000;
    const double h = (hi_ - lo_) / n;
    int i = static_cast<int>(std::lround((xi_desc - lo_) / h));
    if (!(d1(xi_desc) < 0.0)) throw DomainError("user_table: profile has no decreasing branch");
    int l = i, r = i;
    while (l > 0 && d1(lo_ + (l - 1) * h) < 0.0) --l;
    while (r < n && d1(lo_ + (r + 1) * h) < 0.0) ++r;
    branch_lo = lo_ + l * h;
    branch_hi = lo_ + r * h;
    range_lo = u(branch_hi);
    range_hi = u(branch_lo);
  }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  std::shared_ptr<boost::math::barycentric_rational<double>> interp_;
  double lo_, hi_, u_lo_, u_hi_, h_;
};

void locate_extrema(InitialData::Profile& p, double lo, double hi) {
  p.xi_desc = sampled_argmin([&](double x) { return p.d1(x); }, lo, hi, 8000);
  p.xi_asc = sampled_argmin([&](double x) { return -p.d1(x); }, lo, hi, 8000);
}

}  // namespace

InitialData::InitialData(std::shared_ptr<const Profile> p) : p_(std::move(p)) {}

InitialData InitialData::neg_sech_squared(double amplitude) {
  auto p = std::make_shared<NegSechSquared>(amplitude);
  locate_extrema(*p, -20.0, 20.0);
  return InitialData(std::move(p));
}

InitialData InitialData::from_table(std::vector<double> x, std::vector<double> u) {
  auto p = std::make_shared<TabulatedProfile>(std::move(x), std::move(u));
  locate_extrema(*p, p->lo(), p->hi());
  p->locate_branch();
  return InitialData(std::move(p));
}

InitialData make_initial_data(const std::string& profile_name, const std::vector<double>& parameters) {
  if (profile_name == "neg_sech_squared") {
    if (parameters.size() > 1) throw DomainError("neg_sech_squared takes at most one parameter (amplitude)");
    return InitialData::neg_sech_squared(parameters.empty() ? 1.0 : parameters[0]);
  }
  if (profile_name == "user_table") {
    if (parameters.size() % 2 != 0) throw DomainError("user_table expects interleaved (x, u) pairs");
    std::vector<double> x, u;
    for (std::size_t i = 0; i < parameters.size(); i += 2) {
      x.push_back(parameters[i]);
      u.push_back(parameters[i + 1]);
    }
    return InitialData::from_table(std::move(x), std::move(u));
  }
  throw DomainError("unknown initial profile '" + profile_name + "'");
}

const std::string& InitialData::name() const { return p_->name; }
double InitialData::u0(double x) const { return p_->u(x); }
double InitialData::u0_d1(double x) const { return p_->d1(x); }
double InitialData::u0_d2(double x) const { return p_->d2(x); }
double InitialData::u0_d3(double x) const { return p_->d3(x); }
double InitialData::f_minus(double y) const { return p_->f(y); }

double InitialData::f_minus_d1(double y) const { return 1.0 / p_->d1(p_->f(y)); }

double InitialData::f_minus_d2(double y) const {
  const double x = p_->f(y);
  const double g1 = p_->d1(x);
  return -p_->d2(x) / (g1 * g1 * g1);
}

double InitialData::f_minus_d3(double y) const {
  const double x = p_->f(y);
  const double g1 = p_->d1(x), g2 = p_->d2(x), g3 = p_->d3(x);
  const double g1sq = g1 * g1;
  return (3.0 * g2 * g2 - g1 * g3) / (g1sq * g1sq * g1);
}

InitialData::BranchJet InitialData::f_minus_jet(double y) const {
  BranchJet j;
  j.f = p_->f(y);
  const double g1 = p_->d1(j.f), g2 = p_->d2(j.f), g3 = p_->d3(j.f);
  const double r = 1.0 / g1;
  j.d1 = r;
  j.d2 = -g2 * r * r * r;
  j.d3 = (3.0 * g2 * g2 - g1 * g3) * r * r * r * r * r;
  return j;
}

std::pair<double, double> InitialData::branch_domain() const { return {p_->branch_lo, p_->branch_hi}; }
std::pair<double, double> InitialData::branch_range() const { return {p_->range_lo, p_->range_hi}; }
double InitialData::sup_abs() const { return p_->sup; }
double InitialData::xi_steepest_descent() const { return p_->xi_desc; }
double InitialData::xi_steepest_ascent() const { return p_->xi_asc; }

namespace {

// Safeguarded Newton on a bracket [a, b] with g(a), g(b) of opposite sign.
template <class G, class DG>
double bracketed_newton(G&& g, DG&& dg, double a, double b, double tol) {
  double ga = g(a);
  if (ga == 0.0) return a;
  if (g(b) == 0.0) return b;
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double gx = g(x);
    if (std::abs(gx) <= tol) return x;
    if ((gx < 0) == (ga < 0)) {
      a = x, ga = gx;
    } else {
      b = x;
    }
    const double d = dg(x);
    double next = (d != 0.0) ? x - gx / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (b - a <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace

std::vector<double> characteristic_roots(const InitialData& data, double x, double t) {
  if (!std::isfinite(x) || !std::isfinite(t)) throw DomainError("hopf: non-finite (x, t)");
  if (t == 0.0) return {x};
  auto g = [&](double xi) { return xi + 6.0 * t * data.u0(xi) - x; };
  auto dg = [&](double xi) { return 1.0 + 6.0 * t * data.u0_d1(xi); };
  const double reach = 6.0 * std::abs(t) * data.sup_abs() + 1.0;
  const double lo = x - reach, hi = x + reach;

  // Sample points for locating critical points of g; the extrema of u0' are always included
  // so a narrow fold just after breakup is not missed.
  const int n = 4096;
  std::vector<double> pts;
  pts.reserve(n + 3);
  for (int i = 0; i <= n; ++i) pts.push_back(lo + (hi - lo) * i / n);
  for (double xi : {data.xi_steepest_descent(), data.xi_steepest_ascent()}) {
    if (xi > lo && xi < hi) pts.push_back(xi);
  }
  std::sort(pts.begin(), pts.end());

  std::vector<double> breaks{lo};
  double prev = dg(pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double cur = dg(pts[i]);
    if ((cur < 0) != (prev < 0)) {
      double a = pts[i - 1], b = pts[i];
      const bool a_neg = prev < 0;
      for (int it = 0; it < 100 && b - a > 1e-15 * (1 + std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        ((dg(m) < 0) == a_neg ? a : b) = m;
      }
      breaks.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  breaks.push_back(hi);

  const double tol = 1e-14 * (1.0 + std::abs(x));
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const double ga = g(a), gb = g(b);
    if (std::abs(ga) <= tol && (roots.empty() || std::abs(roots.back() - a) > 1e-12)) roots.push_back(a);
    if ((ga < 0) != (gb < 0) && std::abs(ga) > tol && std::abs(gb) > tol) {
      roots.push_back(bracketed_newton(g, dg, a, b, tol));
    }
  }
  if (std::abs(g(hi)) <= tol) roots.push_back(hi);
  return roots;
}

double hopf_evaluate(const InitialData& data, double x, double t) {
  const auto roots = characteristic_roots(data, x, t);
  if (roots.empty()) throw ConvergenceError("hopf: no characteristic root found");
  if (roots.size() > 1) {
    throw MultivaluedError("hopf: (x, t) lies inside the fold; " + std::to_string(roots.size()) + " roots",
                           roots);
  }
  return data.u0(roots.front());
}

double hopf_evaluate_branch(const InitialData& data, double x, double t, int side) {
  const auto roots = characteristic_roots(data, x, t);
  if (roots.empty()) throw ConvergenceError("hopf: no characteristic root found");
  return data.u0(side < 0 ? roots.front() : roots.back());
}

BreakupPoint breakup_point(const InitialData& data) {
  double xi = data.xi_steepest_descent();
  // Newton polish on u0''(xi) = 0, kept only while it improves.
  for (int it = 0; it < 8; ++it) {
    const double g2 = data.u0_d2(xi), g3 = data.u0_d3(xi);
    if (g3 == 0.0) break;
    const double next = xi - g2 / g3;
    if (!(std::abs(data.u0_d2(next)) < std::abs(g2))) break;
    xi = next;
  }
  const double slope = data.u0_d1(xi);
  if (!(slope < 0.0)) throw DomainError("breakup_point: u0' >= 0 everywhere, no gradient catastrophe");
  const double curv = data.u0_d3(xi);
  const double scale = std::abs(slope) * std::abs(slope) * std::abs(slope) + 1e-300;
  if (!(curv > 1e-8 * std::cbrt(scale))) {
    throw DomainError("breakup_point: degenerate minimum of u0' (higher-order contact)");
  }
  BreakupPoint bp;
  bp.t_c = 1.0 / (-6.0 * slope);
  bp.u_c = data.u0(xi);
  bp.x_c = 6.0 * bp.t_c * bp.u_c + xi;
  const double s2 = slope * slope;
  // -f'''(u_c)/6 with u0''(xi) = 0.
  bp.k = (curv - 3.0 * data.u0_d2(xi) * data.u0_d2(xi) / slope) / (6.0 * s2 * s2);
  return bp;
}

double local_cubic(const BreakupPoint& bp, double x, double t) {
  const double tau = t - bp.t_c;
  const double d = x - bp.x_c - 6.0 * bp.u_c * tau;
  // k w^3 - 6 tau w + d = 0  ->  w^3 + p w + q = 0.
  const double p = -6.0 * tau / bp.k;
  const double q = d / bp.k;
  double w;
  const double disc = 4.0 * p * p * p + 27.0 * q * q;
  if (p < 0.0 && disc < 0.0) {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double phi = std::acos(std::clamp(3.0 * q / (p * r), -1.0, 1.0)) / 3.0;
    double roots[3];
    for (int j = 0; j < 3; ++j) roots[j] = r * std::cos(phi - 2.0 * std::numbers::pi * j / 3.0);
    std::sort(roots, roots + 3);
    w = roots[1];
  } else {
    const double sq = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    const double a = std::cbrt(-q / 2.0 + (q <= 0 ? sq : -sq));
    w = (a != 0.0) ? a - p / (3.0 * a) : 0.0;
  }
  for (int it = 0; it < 3; ++it) {
    const double f = w * w * w + p * w + q;
    const double fp = 3.0 * w * w + p;
    if (fp == 0.0) break;
    w -= f / fp;
  }
  return bp.u_c + w;
}

}  // namespace kdvlab
