#include "kdvlab/pi2.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "kdvlab/errors.hpp"
#include "kdvlab/quadrature.hpp"

namespace kdvlab {
namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// U = sum_p c_p Y^p with Y = X^{1/3}; d/dX Y^p = (p/3) Y^{p-3}.
struct PowerSeries {
  std::vector<std::pair<int, double>> terms;

  double eval(double Y) const {
    double s = 0.0;
    for (const auto& [p, c] : terms) s += c * std::pow(Y, p);
    return s;
  }
  PowerSeries derivative() const {
    PowerSeries d;
    for (const auto& [p, c] : terms) {
      if (p != 0) d.terms.emplace_back(p - 3, c * p / 3.0);
    }
    return d;
  }
};

Vec4 rhs(double X, double T, const Vec4& y) {
  return {y(1), y(2), y(3), 10.0 * (6.0 * T * y(0) - y(0) * y(0) * y(0) - 0.5 * y(1) * y(1) - y(0) * y(2) - X)};
}

Mat4 rhs_jacobian(double T, const Vec4& y) {
  Mat4 J = Mat4::Zero();
  J(0, 1) = J(1, 2) = J(2, 3) = 1.0;
  J(3, 0) = 10.0 * (6.0 * T - 3.0 * y(0) * y(0) - y(2));
  J(3, 1) = -10.0 * y(1);
  J(3, 2) = -10.0 * y(0);
  return J;
}

struct State {
  std::vector<double> mesh;
  std::vector<Vec4> y;
};

// C1 cubic through (y_i, F_i), (y_j, F_j) at s in [0, 1] on an interval of width h.
Vec4 hermite_cubic(const Vec4& ya, const Vec4& fa, const Vec4& yb, const Vec4& fb, double h, double s) {
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * ya + h10 * h * fa + h01 * yb + h11 * h * fb;
}

Vec4 hermite_cubic_slope(const Vec4& ya, const Vec4& fa, const Vec4& yb, const Vec4& fb, double h, double s) {
  const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
  return (d00 * ya + d01 * yb) / h + d10 * fa + d11 * fb;
}

struct Boundary {
  double Ul, U1l, Ur, U1r;
};

Boundary boundary_data(double T, double Xl, double Xr, double tail_tol) {
  TailJet l, r;
  try {
    l = laurent_tail_jet(Xl, T, 13, tail_tol);
    r = laurent_tail_jet(Xr, T, 13, tail_tol);
  } catch (const DomainError& e) {
    throw DomainError(std::string("pi2_solve: boundary tail inconsistent: ") + e.what());
  }
  return {l.U, l.U1, r.U, r.U1};
}

// Residual of the Lobatto IIIA (Simpson) collocation system with boundary rows interleaved.
Eigen::VectorXd system_residual(const State& s, double T, const Boundary& bc) {
  const int M = static_cast<int>(s.mesh.size()) - 1;
  Eigen::VectorXd R(4 * (M + 1));
  R(0) = s.y[0](0) - bc.Ul;
  R(1) = s.y[0](1) - bc.U1l;
  for (int i = 0; i < M; ++i) {
    const double h = s.mesh[i + 1] - s.mesh[i];
    const Vec4 fa = rhs(s.mesh[i], T, s.y[i]);
    const Vec4 fb = rhs(s.mesh[i + 1], T, s.y[i + 1]);
    const Vec4 ym = 0.5 * (s.y[i] + s.y[i + 1]) - h / 8.0 * (fb - fa);
    const Vec4 fm = rhs(s.mesh[i] + 0.5 * h, T, ym);
    R.segment<4>(2 + 4 * i) = s.y[i + 1] - s.y[i] - h / 6.0 * (fa + 4.0 * fm + fb);
  }
  R(4 * M + 2) = s.y[M](0) - bc.Ur;
  R(4 * M + 3) = s.y[M](1) - bc.U1r;
  return R;
}

Eigen::SparseMatrix<double> system_jacobian(const State& s, double T) {
  const int M = static_cast<int>(s.mesh.size()) - 1;
  const int n = 4 * (M + 1);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(M) * 32 + 4);
  trip.emplace_back(0, 0, 1.0);
  trip.emplace_back(1, 1, 1.0);
  const Mat4 I = Mat4::Identity();
  for (int i = 0; i < M; ++i) {
    const double h = s.mesh[i + 1] - s.mesh[i];
    const Vec4 fa = rhs(s.mesh[i], T, s.y[i]);
    const Vec4 fb = rhs(s.mesh[i + 1], T, s.y[i + 1]);
    const Vec4 ym = 0.5 * (s.y[i] + s.y[i + 1]) - h / 8.0 * (fb - fa);
    const Mat4 Ja = rhs_jacobian(T, s.y[i]);
    const Mat4 Jb = rhs_jacobian(T, s.y[i + 1]);
    const Mat4 Jm = rhs_jacobian(T, ym);
    const Mat4 A = -I - h / 6.0 * (Ja + 4.0 * Jm * (0.5 * I + h / 8.0 * Ja));
    const Mat4 B = I - h / 6.0 * (Jb + 4.0 * Jm * (0.5 * I - h / 8.0 * Jb));
    const int row = 2 + 4 * i;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (A(r, c) != 0.0) trip.emplace_back(row + r, 4 * i + c, A(r, c));
        if (B(r, c) != 0.0) trip.emplace_back(row + r, 4 * (i + 1) + c, B(r, c));
      }
    }
  }
  trip.emplace_back(4 * M + 2, 4 * M, 1.0);
  trip.emplace_back(4 * M + 3, 4 * M + 1, 1.0);
  Eigen::SparseMatrix<double> J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

void newton(State& s, double T, const Boundary& bc, int max_it, std::vector<double>& history) {
  const int n = 4 * static_cast<int>(s.mesh.size());
  Eigen::VectorXd R = system_residual(s, T, bc);
  double rn = R.norm();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  for (int it = 0; it < max_it; ++it) {
    history.push_back(R.lpNorm<Eigen::Infinity>());
    if (R.lpNorm<Eigen::Infinity>() < 1e-12) return;
    const Eigen::SparseMatrix<double> J = system_jacobian(s, T);
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw ConvergenceError("pi2_solve: singular collocation Jacobian", history);
    const Eigen::VectorXd d = lu.solve(-R);
    if (!d.allFinite()) throw ConvergenceError("pi2_solve: non-finite Newton step", history);
    double lam = 1.0;
    bool accepted = false;
    State trial = s;
    Eigen::VectorXd Rt;
    while (lam >= 1.0 / 1024.0) {
      for (int k = 0; k < n / 4; ++k) trial.y[k] = s.y[k] + lam * d.segment<4>(4 * k);
      Rt = system_residual(trial, T, bc);
      const double rt = Rt.norm();
      if (std::isfinite(rt) && rt <= (1.0 - 1e-4 * lam) * rn) {
        accepted = true;
        break;
      }
      lam *= 0.5;
    }
    if (!accepted) {
      if (R.lpNorm<Eigen::Infinity>() < 1e-9) return;  // rounding floor
      throw ConvergenceError("pi2_solve: Newton stagnated", history);
    }
    s = std::move(trial);
    R = std::move(Rt);
    rn = R.norm();
    double ymax = 1.0;
    for (const auto& v : s.y) ymax = std::max(ymax, v.cwiseAbs().maxCoeff());
    if (lam == 1.0 && d.lpNorm<Eigen::Infinity>() < 1e-11 * ymax) {
      history.push_back(R.lpNorm<Eigen::Infinity>());
      return;
    }
  }
  if (R.lpNorm<Eigen::Infinity>() < 1e-9) return;
  throw ConvergenceError("pi2_solve: Newton did not converge", history);
}

// Relative residual of the continuous cubic interpolant at two interior Lobatto points per interval.
std::vector<double> interval_errors(const State& s, double T) {
  const int M = static_cast<int>(s.mesh.size()) - 1;
  std::vector<double> err(M);
  const double off = std::sqrt(21.0) / 14.0;
  for (int i = 0; i < M; ++i) {
    const double h = s.mesh[i + 1] - s.mesh[i];
    const Vec4 fa = rhs(s.mesh[i], T, s.y[i]);
    const Vec4 fb = rhs(s.mesh[i + 1], T, s.y[i + 1]);
    double e = 0.0;
    for (double sp : {0.5 - off, 0.5 + off}) {
      const Vec4 S = hermite_cubic(s.y[i], fa, s.y[i + 1], fb, h, sp);
      const Vec4 dS = hermite_cubic_slope(s.y[i], fa, s.y[i + 1], fb, h, sp);
      const Vec4 F = rhs(s.mesh[i] + sp * h, T, S);
      for (int c = 0; c < 4; ++c) e = std::max(e, std::abs(dS(c) - F(c)) / (1.0 + std::abs(F(c))));
    }
    err[i] = e;
  }
  return err;
}

// Split intervals whose error exceeds tol into enough pieces for a third-order error decay.
State refine(const State& s, double T, const std::vector<double>& err, double tol) {
  State out;
  const int M = static_cast<int>(s.mesh.size()) - 1;
  for (int i = 0; i < M; ++i) {
    out.mesh.push_back(s.mesh[i]);
    out.y.push_back(s.y[i]);
    if (err[i] <= tol) continue;
    const int pieces = std::clamp(static_cast<int>(std::ceil(std::cbrt(err[i] / (0.25 * tol)))), 2, 8);
    const double h = s.mesh[i + 1] - s.mesh[i];
    const Vec4 fa = rhs(s.mesh[i], T, s.y[i]);
    const Vec4 fb = rhs(s.mesh[i + 1], T, s.y[i + 1]);
    for (int k = 1; k < pieces; ++k) {
      const double sp = static_cast<double>(k) / pieces;
      out.mesh.push_back(s.mesh[i] + sp * h);
      out.y.push_back(hermite_cubic(s.y[i], fa, s.y[i + 1], fb, h, sp));
    }
  }
  out.mesh.push_back(s.mesh.back());
  out.y.push_back(s.y.back());
  return out;
}

double tail_tolerance(double rel_tol) { return std::max(1e-9, 1e-2 * rel_tol); }

// U0 = -X (X^2 + 1)^{-1/3}, a mollified -X^{1/3}.
Vec4 initial_guess(double X) {
  auto g = [](double x) { return -x / std::cbrt(x * x + 1.0); };
  const double h = 1e-2;
  const double f0 = g(X), fp = g(X + h), fm = g(X - h), fp2 = g(X + 2 * h), fm2 = g(X - 2 * h);
  return {f0, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h), (fp2 - 2 * fp + 2 * fm - fm2) / (2 * h * h * h)};
}

// Nodes equidistributing 1 + c sqrt(|U_XX|) of the initial guess.
std::vector<double> initial_mesh(double Xl, double Xr, int n) {
  const int fine = 20 * n;
  std::vector<double> xs(fine + 1), cum(fine + 1, 0.0);
  double peak = 0.0;
  std::vector<double> rho(fine + 1);
  for (int i = 0; i <= fine; ++i) {
    xs[i] = Xl + (Xr - Xl) * i / fine;
    rho[i] = std::sqrt(std::abs(initial_guess(xs[i])(2)));
    peak = std::max(peak, rho[i]);
  }
  for (int i = 0; i <= fine; ++i) rho[i] = 1.0 + 5.0 * rho[i] / peak;
  for (int i = 1; i <= fine; ++i) cum[i] = cum[i - 1] + 0.5 * (rho[i] + rho[i - 1]) * (xs[i] - xs[i - 1]);
  std::vector<double> mesh(n + 1);
  mesh[0] = Xl;
  mesh[n] = Xr;
  int j = 1;
  for (int k = 1; k < n; ++k) {
    const double target = cum[fine] * k / n;
    while (cum[j] < target) ++j;
    const double w = (target - cum[j - 1]) / (cum[j] - cum[j - 1]);
    mesh[k] = xs[j - 1] + w * (xs[j] - xs[j - 1]);
  }
  return mesh;
}

Pi2Solution package(const State& s, double T, double tol, std::vector<double> history) {
  Pi2Solution sol;
  sol.T = T;
  sol.mesh = s.mesh;
  const std::size_t n = s.mesh.size();
  sol.U.resize(n);
  sol.U_X.resize(n);
  sol.U_XX.resize(n);
  sol.U_XXX.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.U[i] = s.y[i](0);
    sol.U_X[i] = s.y[i](1);
    sol.U_XX[i] = s.y[i](2);
    sol.U_XXX[i] = s.y[i](3);
  }
  sol.tol = tol;
  sol.newton_history = std::move(history);
  return sol;
}

State unpack(const Pi2Solution& sol) {
  State s;
  s.mesh = sol.mesh;
  for (std::size_t i = 0; i < sol.mesh.size(); ++i) s.y.emplace_back(sol.U[i], sol.U_X[i], sol.U_XX[i], sol.U_XXX[i]);
  return s;
}

Pi2Solution adapt(State s, double T, double rel_tol, const Pi2Options& opt) {
  const Boundary bc = boundary_data(T, s.mesh.front(), s.mesh.back(), tail_tolerance(rel_tol));
  std::vector<double> history;
  for (int pass = 0; pass < 40; ++pass) {
    newton(s, T, bc, opt.max_newton, history);
    const auto err = interval_errors(s, T);
    const double worst = *std::max_element(err.begin(), err.end());
    for (const auto& v : s.y) {
      if (!v.allFinite()) throw ConvergenceError("pi2_solve: non-finite solution", history);
    }
    if (worst <= rel_tol) return package(s, T, worst, std::move(history));
    State next = refine(s, T, err, rel_tol);
    if (static_cast<int>(next.mesh.size()) > opt.max_nodes) {
      throw ConvergenceError("pi2_solve: node limit reached before the residual met rel_tol (worst " +
                                 std::to_string(worst) + ")",
                             history);
    }
    s = std::move(next);
  }
  throw ConvergenceError("pi2_solve: mesh adaptation did not terminate", history);
}

}  // namespace

std::array<double, 14> laurent_coefficients(double T) {
  std::array<double, 14> a{};
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T6 = T3 * T3, T7 = T6 * T;
  a[1] = 2.0 * T;
  a[5] = -8.0 * T3 / 3.0;
  a[6] = 1.0 / 18.0;
  a[7] = 16.0 * T4 / 3.0;
  a[8] = -5.0 * T / 27.0;
  a[10] = -14.0 * T2 / 27.0;
  a[11] = -256.0 * T6 / 9.0;
  a[12] = 16.0 * T3 / 3.0;
  a[13] = 640.0 * T7 / 9.0 - 7.0 / 108.0;
  return a;
}

TailJet laurent_tail_jet(double X, double T, int n_terms, double tail_tol) {
  if (!std::isfinite(X) || X == 0.0) throw DomainError("laurent_tail: X must be finite and nonzero");
  if (n_terms < 0 || n_terms > 13) throw DomainError("laurent_tail: n_terms must lie in [0, 13]");
  const auto a = laurent_coefficients(T);
  const double Y = std::cbrt(X);
  PowerSeries s;
  s.terms.emplace_back(1, -1.0);
  double last = std::abs(Y);
  for (int n = 1; n <= n_terms; ++n) {
    if (a[n] == 0.0) continue;
    const double c = (n % 2 ? -1.0 : 1.0) * a[n];
    s.terms.emplace_back(-n, c);
    last = std::abs(c * std::pow(Y, -n));
  }
  if (last > tail_tol) {
    throw DomainError("laurent_tail: tail not converged at X = " + std::to_string(X) +
                      " (last term " + std::to_string(last) + ")");
  }
  TailJet j;
  j.truncation = last;
  j.U = s.eval(Y);
  const PowerSeries d1 = s.derivative(), d2 = d1.derivative(), d3 = d2.derivative();
  j.U1 = d1.eval(Y);
  j.U2 = d2.eval(Y);
  j.U3 = d3.eval(Y);
  return j;
}

double laurent_tail(double X, double T, int n_terms, double tail_tol) {
  return laurent_tail_jet(X, T, n_terms, tail_tol).U;
}

Pi2Solution pi2_solve_from(const Pi2Solution& start, double T, double rel_tol, const Pi2Options& opt) {
  if (!(rel_tol >= 1e-10)) throw DomainError("pi2_solve: rel_tol must be >= 1e-10");
  return adapt(unpack(start), T, rel_tol, opt);
}

Pi2Solution pi2_solve(double T, double X_l, double X_r, double rel_tol, const Pi2Options& opt) {
  if (!std::isfinite(T)) throw DomainError("pi2_solve: T must be finite");
  if (!(X_r >= 50.0) || std::abs(X_r + X_l) > 1e-12 * X_r) {
    throw DomainError("pi2_solve: requires X_r = -X_l >= 50");
  }
  if (!(rel_tol >= 1e-10)) throw DomainError("pi2_solve: rel_tol must be >= 1e-10");
  // Validate the endpoint tails before any work.
  boundary_data(T, X_l, X_r, tail_tolerance(rel_tol));

  State s;
  s.mesh = initial_mesh(X_l, X_r, opt.initial_nodes);
  for (double X : s.mesh) s.y.push_back(initial_guess(X));
  const double loose = std::max(rel_tol, 1e-4);
  Pi2Solution sol = adapt(std::move(s), 0.0, T == 0.0 ? rel_tol : loose, opt);
  const int steps = static_cast<int>(std::ceil(std::abs(T) / opt.continuation_step - 1e-12));
  for (int k = 1; k <= steps; ++k) {
    const double Tk = T * k / steps;
    sol = pi2_solve_from(sol, Tk, k == steps ? rel_tol : loose, opt);
  }
  return sol;
}

double pi2_tail_half_width(double T, double rel_tol, double min_half_width) {
  double X = min_half_width;
  for (int j = 0; j <= 6; ++j, X *= 2.0) {
    try {
      laurent_tail_jet(-X, T, 13, tail_tolerance(rel_tol));
      laurent_tail_jet(X, T, 13, tail_tolerance(rel_tol));
      return X;
    } catch (const DomainError&) {
    }
  }
  throw DomainError("pi2_tail_half_width: tail does not converge for T = " + std::to_string(T));
}

double Pi2Solution::value(double X) const {
  if (X < mesh.front() || X > mesh.back()) return laurent_tail(X, T, 13, std::numeric_limits<double>::infinity());
  auto it = std::upper_bound(mesh.begin(), mesh.end(), X);
  const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - mesh.begin(), 1) - 1, mesh.size() - 2);
  const double h = mesh[i + 1] - mesh[i];
  const double s = (X - mesh[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * U[i] + h10 * h * U_X[i] + h01 * U[i + 1] + h11 * h * U_X[i + 1];
}

double Pi2Solution::value_smooth(double X) const {
  if (X < mesh.front() || X > mesh.back()) return laurent_tail(X, T, 13, std::numeric_limits<double>::infinity());
  // Monomial coefficients c4..c7 of the degree-7 two-point Hermite interpolant.
  static const Eigen::Matrix4d inv = [] {
    Eigen::Matrix4d M;
    for (int j = 0; j < 4; ++j) {
      for (int k = 4; k < 8; ++k) {
        double f = 1.0;
        for (int q = 0; q < j; ++q) f *= (k - q);
        M(j, k - 4) = f;
      }
    }
    return Eigen::Matrix4d(M.inverse());
  }();
  auto it = std::upper_bound(mesh.begin(), mesh.end(), X);
  const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - mesh.begin(), 1) - 1, mesh.size() - 2);
  const double h = mesh[i + 1] - mesh[i];
  const double s = (X - mesh[i]) / h;
  const double L[4] = {U[i], h * U_X[i], h * h * U_XX[i] / 2.0, h * h * h * U_XXX[i] / 6.0};
  const double R[4] = {U[i + 1], h * U_X[i + 1], h * h * U_XX[i + 1], h * h * h * U_XXX[i + 1]};
  // Right-end derivative conditions minus the contribution of c0..c3.
  Eigen::Vector4d rhs_v;
  for (int j = 0; j < 4; ++j) {
    double lower = 0.0;
    for (int k = j; k < 4; ++k) {
      double f = 1.0;
      for (int q = 0; q < j; ++q) f *= (k - q);
      lower += f * L[k];
    }
    rhs_v(j) = R[j] - lower;
  }
  const Eigen::Vector4d hi = inv * rhs_v;
  const double c[8] = {L[0], L[1], L[2], L[3], hi(0), hi(1), hi(2), hi(3)};
  double v = 0.0;
  for (int k = 7; k >= 0; --k) v = v * s + c[k];
  return v;
}

double Pi2Residual::max_abs() const {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

Pi2Residual pi2_residual(const Pi2Solution& sol, double X_a, double X_b) {
  if (!(X_b > X_a)) throw DomainError("pi2_residual: empty interval");
  // Overlapping panels of unit width on a half stride; only the central half of each panel is kept,
  // away from the ill-conditioned endpoint rows of the fourth-derivative matrix.
  const int order = 20;
  const double width = 1.0;
  const auto nodes = chebyshev_lobatto(order);
  const auto Dref = chebyshev_diff_matrix(order);
  const int m = order + 1;
  Eigen::MatrixXd D(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) D(i, j) = -Dref[i * m + j] * 2.0 / width;  // nodes run right to left
  }
  const Eigen::MatrixXd D2 = D * D;
  const Eigen::MatrixXd D4 = D2 * D2;
  Pi2Residual out;
  const int panels = static_cast<int>(std::ceil(2.0 * (X_b - X_a))) + 1;
  for (int p = 0; p < panels; ++p) {
    const double c = X_a + 0.5 * p;
    Eigen::VectorXd X(m), Uv(m);
    for (int i = 0; i < m; ++i) {
      X(i) = c - 0.5 * width * nodes[i];
      Uv(i) = sol.value_smooth(X(i));
    }
    const Eigen::VectorXd U1 = D * Uv, U2 = D2 * Uv, U4 = D4 * Uv;
    for (int i = 0; i < m; ++i) {
      const bool central = X(i) >= c - 0.25 && (X(i) < c + 0.25 || (p == panels - 1 && X(i) <= c + 0.25));
      if (!central || X(i) < X_a || X(i) > X_b) continue;
      const double r = X(i) - 6.0 * sol.T * Uv(i) + Uv(i) * Uv(i) * Uv(i) + 0.5 * U1(i) * U1(i) +
                       Uv(i) * U2(i) + U4(i) / 10.0;
      out.X.push_back(X(i));
      out.r.push_back(r);
    }
  }
  return out;
}

}  // namespace kdvlab
