#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kdvlab/errors.hpp"
#include "kdvlab/pde.hpp"

using namespace kdvlab;

namespace {

constexpr double kL = 5.0 * std::numbers::pi;

double soliton(double x, double t, double eps, double c = 1.0, double x0 = -3.0) {
  const double s = 1.0 / std::cosh(std::sqrt(c) * (x - x0 - c * t) / (2.0 * eps));
  return 0.5 * c * s * s;
}

double sech2(double x) { return -1.0 / (std::cosh(x) * std::cosh(x)); }

double max_error(const GridFunction& g, double t, double eps) {
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(g[i] - soliton(g.x(i), t, eps)));
  return e;
}

}  // namespace

TEST_CASE("grid function invariants") {
  CHECK_THROWS_AS(GridFunction(0.0, 1.0, std::vector<double>(100, 0.0)), DomainError);
  CHECK_THROWS_AS(GridFunction(0.0, 1.0, {0.0, std::nan("")}), DomainError);
  CHECK_THROWS_AS(GridFunction(1.0, 1.0, {0.0, 0.0}), DomainError);
  const auto g = GridFunction::sample(-1.0, 1.0, 8, [](double x) { return x; });
  CHECK(g.dx() == doctest::Approx(0.25));
  CHECK(g.x(7) == doctest::Approx(0.75));
  CHECK(next_power_of_two(25133) == 32768);
  CHECK(required_points(2 * kL, 0.01) == 32768);
}

TEST_CASE("the soliton is transported exactly by both exponential integrators") {
  const double eps = 0.1;
  const auto u0 = GridFunction::sample(-kL, kL, 4096, [&](double x) { return soliton(x, 0.0, eps); });
  for (Scheme s : {Scheme::integrating_factor_rk4, Scheme::etd_rk4}) {
    CAPTURE(to_string(s));
    SolverParams p;
    p.epsilon = eps;
    p.t_end = 1.0;
    p.scheme = s;
    const auto rep = kdv_run(u0, p);
    CHECK(max_error(rep.snapshots.back(), 1.0, eps) < 1e-6);
    CHECK(rep.mass_drift < 1e-10);
    CHECK(rep.energy_drift < 1e-8);

    SolverParams half = p;
    half.dt = rep.dt / 2.0;
    const auto finer = kdv_run(u0, half);
    CHECK(max_abs_difference(rep.snapshots.back(), finer.snapshots.back()) < 1e-9);
  }
}

TEST_CASE("time integration is fourth order") {
  const double eps = 0.1;
  const auto u0 = GridFunction::sample(-kL, kL, 4096, [&](double x) { return soliton(x, 0.0, eps); });
  SolverParams p;
  p.epsilon = eps;
  p.t_end = 1.0;
  p.dt = 2e-3;
  const double e1 = max_error(kdv_solve(u0, p).back(), 1.0, eps);
  p.dt = 1e-3;
  const double e2 = max_error(kdv_solve(u0, p).back(), 1.0, eps);
  CHECK(std::log2(e1 / e2) >= 3.8);
}

TEST_CASE("snapshots are returned at the requested times in order") {
  const double eps = 0.1;
  const auto u0 = GridFunction::sample(-kL, kL, 4096, [&](double x) { return soliton(x, 0.0, eps); });
  SolverParams p;
  p.epsilon = eps;
  p.t_end = 0.5;
  const auto rep = kdv_run(u0, p, {0.5, 0.0, 0.25});
  REQUIRE(rep.snapshots.size() == 3);
  CHECK(rep.times == std::vector<double>{0.0, 0.25, 0.5});
  CHECK(max_abs_difference(rep.snapshots[0], u0) < 1e-15);
  CHECK(max_error(rep.snapshots[1], 0.25, eps) < 1e-6);
  CHECK_THROWS_AS(kdv_run(u0, p, {0.7}), DomainError);
}

TEST_CASE("under-resolved grids are refused with a suggestion") {
  const auto u0 = GridFunction::sample(-kL, kL, 1024, sech2);
  SolverParams p;
  p.epsilon = 0.01;
  p.t_end = 0.1;
  try {
    kdv_run(u0, p);
    FAIL("expected a resolution error");
  } catch (const ResolutionError& e) {
    CHECK(e.suggested_points() == 32768);
  }
  CHECK_THROWS_AS(ch_run(u0, p), ResolutionError);
}

TEST_CASE("non-periodic data is rejected") {
  const auto ramp = GridFunction::sample(-kL, kL, 4096, [](double x) { return x; });
  SolverParams p;
  p.epsilon = 0.1;
  p.t_end = 0.1;
  CHECK_THROWS_AS(kdv_run(ramp, p), DomainError);
}

TEST_CASE("an unstable step size is reported as blow-up with its time") {
  const auto u0 = GridFunction::sample(-kL, kL, 4096, [](double x) { return 40.0 * sech2(x); });
  SolverParams p;
  p.epsilon = 0.1;
  p.t_end = 1.0;
  p.dt = 0.05;
  try {
    kdv_run(u0, p);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 1.0);
  }
}

TEST_CASE("KdV conserves mass and energy through breakup") {
  const double eps = 0.1;
  const auto u0 = GridFunction::sample(-kL, kL, required_points(2 * kL, eps), sech2);
  SolverParams p;
  p.epsilon = eps;
  p.t_end = 0.3;
  const auto rep = kdv_run(u0, p, {0.1, 0.2, 0.3});
  CHECK(rep.mass_drift < 1e-10);
  CHECK(rep.energy_drift < 1e-8);
  CHECK(rep.conservation.front().mass == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("CH keeps constants and conserves both invariants") {
  SolverParams p;
  p.epsilon = 0.1;
  p.t_end = 0.3;
  const auto c = GridFunction::sample(-kL, kL, 4096, [](double) { return -0.4; });
  const auto out = ch_solve(c, p).back();
  for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(std::abs(out[i] + 0.4) < 1e-13);

  const auto u0 = GridFunction::sample(-kL, kL, 4096, sech2);
  const auto rep = ch_run(u0, p, {0.1, 0.2, 0.3});
  CHECK(rep.mass_drift < 1e-8);
  CHECK(rep.energy_drift < 1e-8);
}

TEST_CASE("CH momentum-form evolution satisfies the velocity form of the equation") {
  const double eps = 0.1, t0 = 0.15, h = 1e-3;
  const auto u0 = GridFunction::sample(-kL, kL, 4096, sech2);
  SolverParams p;
  p.epsilon = eps;
  p.t_end = t0 + 2 * h;
  p.dt = 2.5e-4;
  const auto s = ch_solve(u0, p, {t0 - 2 * h, t0 - h, t0, t0 + h, t0 + 2 * h});
  auto ddt = [&](const GridFunction& a, const GridFunction& b, const GridFunction& c, const GridFunction& d,
                 std::size_t i) { return (-a[i] + 8 * b[i] - 8 * c[i] + d[i]) / (12 * h); };
  const GridFunction& u = s[2];
  const GridFunction ux = spectral_derivative(u, 1), uxx = spectral_derivative(u, 2), uxxx = spectral_derivative(u, 3);
  std::vector<GridFunction> sxx;
  for (const auto& g : s) sxx.push_back(spectral_derivative(g, 2));
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ut = ddt(s[4], s[3], s[1], s[0], i);
    const double uxxt = ddt(sxx[4], sxx[3], sxx[1], sxx[0], i);
    const double r = ut + 6 * u[i] * ux[i] - eps * eps * (uxxt + 4 * ux[i] * uxx[i] + 2 * u[i] * uxxx[i]);
    worst = std::max(worst, std::abs(r));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("Helmholtz resolvent is the diagonal inverse of 1 - eps^2 d_xx") {
  const double eps = 0.05, L = 2.0 * std::numbers::pi;
  const int k = 7;
  const auto m = GridFunction::sample(0.0, L, 256, [&](double x) { return std::cos(k * x); });
  const auto u = helmholtz_resolvent(m, eps);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(m[i] / (1 + eps * eps * k * k)).epsilon(1e-13));
  const auto c = helmholtz_resolvent(GridFunction::sample(0.0, L, 64, [](double) { return 2.5; }), eps);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(2.5).epsilon(1e-14));

  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  std::vector<double> r(512);
  for (auto& v : r) v = nd(rng);
  const GridFunction rand(0.0, L, r);
  const auto back = momentum_from_velocity(helmholtz_resolvent(rand, eps), eps);
  CHECK(max_abs_difference(back, rand) < 1e-12);
  CHECK_THROWS_AS(helmholtz_resolvent(rand, 0.0), DomainError);
}

TEST_CASE("normalised momentum squares to the resolvent") {
  const double eps = 0.05;
  const auto m = GridFunction::sample(-kL, kL, 1024, sech2);
  const auto twice = miura_normalize(miura_normalize(m, eps), eps);
  CHECK(max_abs_difference(twice, helmholtz_resolvent(m, eps)) < 1e-12);
  const auto c = miura_normalize(GridFunction::sample(-kL, kL, 64, [](double) { return -1.5; }), eps);
  CHECK(c[3] == doctest::Approx(-1.5).epsilon(1e-14));
}

TEST_CASE("normalised momentum matches its eps expansion to sixth order") {
  const auto m = GridFunction::sample(-kL, kL, 1024, sech2);
  const auto m2 = spectral_derivative(m, 2), m4 = spectral_derivative(m, 4);
  auto defect = [&](double eps) {
    const auto u = miura_normalize(m, eps);
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double series = m[i] + 0.5 * eps * eps * m2[i] + 0.375 * std::pow(eps, 4) * m4[i];
      d = std::max(d, std::abs(u[i] - series));
    }
    return d;
  };
  const double a = defect(0.04), b = defect(0.02);
  CHECK(std::log2(a / b) == doctest::Approx(6.0).epsilon(0.05));
}
