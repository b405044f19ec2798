#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kdvlab/errors.hpp"
#include "kdvlab/hopf.hpp"

using namespace kdvlab;

namespace {

// Independent closed form of the decreasing-branch inverse for u0 = -sech^2 x.
long double branch_inverse(long double u) { return -std::acosh(1.0L / std::sqrt(-u)); }

// Central difference with one Richardson step, O(h^4).
long double third_derivative(long double (*f)(long double), long double y, long double h) {
  auto d = [&](long double s) { return (f(y + 2 * s) - 2 * f(y + s) + 2 * f(y - s) - f(y - 2 * s)) / (2 * s * s * s); };
  return (4 * d(h / 2) - d(h)) / 3;
}

// Plain bisection on the characteristic equation over a bracket with a single root.
double bisect_characteristic(double x, double t, double a, double b) {
  auto g = [&](double xi) { return xi - 6.0 * t / (std::cosh(xi) * std::cosh(xi)) - x; };
  double ga = g(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b), gm = g(m);
    if ((gm < 0) == (ga < 0)) a = m, ga = gm;
    else b = m;
  }
  return -1.0 / (std::cosh(0.5 * (a + b)) * std::cosh(0.5 * (a + b)));
}

}  // namespace

TEST_CASE("branch inverse is a left inverse of u0 on the decreasing branch") {
  const auto data = InitialData::neg_sech_squared();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> xs(-6.0, -0.05);
  for (int i = 0; i < 200; ++i) {
    const double x = xs(rng);
    CHECK(data.f_minus(data.u0(x)) == doctest::Approx(x).epsilon(1e-10));
  }
}

TEST_CASE("branch inverse derivatives match an independent finite-difference oracle") {
  const auto data = InitialData::neg_sech_squared();
  for (double y : {-0.9, -2.0 / 3.0, -0.4, -0.1}) {
    const auto jet = data.f_minus_jet(y);
    CHECK(jet.f == doctest::Approx(double(branch_inverse(y))).epsilon(1e-12));
    CHECK(jet.d3 == doctest::Approx(double(third_derivative(branch_inverse, y, 1e-4L))).epsilon(1e-6));
  }
}

TEST_CASE("breakup point matches the closed forms for -sech^2") {
  const auto bp = breakup_point(InitialData::neg_sech_squared());
  const double s3 = std::sqrt(3.0);
  CHECK(bp.t_c == doctest::Approx(s3 / 8.0).epsilon(1e-12));
  CHECK(bp.u_c == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(bp.x_c == doctest::Approx(-s3 / 2.0 + std::log((s3 - 1.0) / std::sqrt(2.0))).epsilon(1e-10));
  CHECK(bp.k == doctest::Approx(double(-third_derivative(branch_inverse, -2.0L / 3.0L, 1e-4L) / 6.0L)).epsilon(1e-7));
}

TEST_CASE("amplitude scaling of the breakup point") {
  // u0 -> a u0 rescales time by 1/a and leaves x_c - 6 u_c t_c = xi_c unchanged.
  const auto b1 = breakup_point(InitialData::neg_sech_squared(1.0));
  const auto b2 = breakup_point(InitialData::neg_sech_squared(2.5));
  CHECK(b2.t_c == doctest::Approx(b1.t_c / 2.5).epsilon(1e-12));
  CHECK(b2.u_c == doctest::Approx(2.5 * b1.u_c).epsilon(1e-12));
  CHECK(b2.x_c == doctest::Approx(b1.x_c).epsilon(1e-10));
}

TEST_CASE("hopf_evaluate agrees with bisection before breakup") {
  const auto data = InitialData::neg_sech_squared();
  CHECK(hopf_evaluate(data, -1.4, 0.2) == doctest::Approx(bisect_characteristic(-1.4, 0.2, -8.0, 8.0)).epsilon(1e-12));
  for (double x : {-3.0, -1.0, 0.0, 0.7, 2.0}) {
    CHECK(hopf_evaluate(data, x, 0.1) == doctest::Approx(bisect_characteristic(x, 0.1, -8.0, 8.0)).epsilon(1e-12));
  }
  CHECK(hopf_evaluate(data, 0.3, 0.0) == doctest::Approx(data.u0(0.3)));
}

TEST_CASE("hopf field satisfies u_t + 6 u u_x = 0") {
  const auto data = InitialData::neg_sech_squared();
  const double h = 1e-4;
  auto d4 = [](auto f, double h) { return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h); };
  for (double x : {-2.0, -1.2, 0.0, 1.0}) {
    const double t = 0.15;
    const double u = hopf_evaluate(data, x, t);
    const double ut = d4([&](double s) { return hopf_evaluate(data, x, t + s); }, h);
    const double ux = d4([&](double s) { return hopf_evaluate(data, x + s, t); }, h);
    CHECK(std::abs(ut + 6.0 * u * ux) < 1e-7);
  }
}

TEST_CASE("after breakup the fold is reported as multivalued") {
  const auto data = InitialData::neg_sech_squared();
  const auto bp = breakup_point(data);
  const double t = 0.25, x = bp.x_c + 6.0 * bp.u_c * (t - bp.t_c);
  const auto roots = characteristic_roots(data, x, t);
  REQUIRE(roots.size() == 3);
  CHECK_THROWS_AS(hopf_evaluate(data, x, t), MultivaluedError);
  try {
    hopf_evaluate(data, x, t);
  } catch (const MultivaluedError& e) {
    CHECK(e.roots().size() == 3);
  }
  CHECK(hopf_evaluate_branch(data, x, t, -1) == doctest::Approx(data.u0(roots.front())));
  CHECK(hopf_evaluate_branch(data, x, t, +1) == doctest::Approx(data.u0(roots.back())));
}

TEST_CASE("local cubic approximates the hopf solution at t_c with O(d^(2/3)) relative error") {
  const auto data = InitialData::neg_sech_squared();
  const auto bp = breakup_point(data);
  double prev = 1.0;
  for (double d : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double exact = hopf_evaluate(data, bp.x_c + d, bp.t_c);
    const double err = std::abs(local_cubic(bp, bp.x_c + d, bp.t_c) - exact);
    // |u - u_c| ~ d^(1/3) and the next term is O(d^(2/3)), so halving the decade cuts the error ~ 10^(2/3).
    CHECK(err < prev);
    CHECK(err < 2.0 * std::pow(d, 2.0 / 3.0));
    prev = err;
  }
}

TEST_CASE("invalid inputs raise typed errors") {
  CHECK_THROWS_AS(InitialData::neg_sech_squared(-1.0), DomainError);
  CHECK_THROWS_AS(make_initial_data("nope", {}), DomainError);
  CHECK_THROWS_AS(make_initial_data("user_table", {0.0, 1.0, 2.0}), DomainError);
  const auto data = InitialData::neg_sech_squared();
  CHECK_THROWS_AS(data.f_minus(0.5), DomainError);
  CHECK_THROWS_AS(hopf_evaluate(data, std::nan(""), 0.1), DomainError);
}

TEST_CASE("tabulated profile reproduces the analytic breakup point") {
  std::vector<double> params;
  for (int i = 0; i <= 4000; ++i) {
    const double x = -10.0 + 20.0 * i / 4000.0;
    params.push_back(x);
    params.push_back(-1.0 / (std::cosh(x) * std::cosh(x)));
  }
  const auto tab = make_initial_data("user_table", params);
  const auto bp = breakup_point(tab);
  CHECK(bp.t_c == doctest::Approx(std::sqrt(3.0) / 8.0).epsilon(1e-5));
  CHECK(bp.u_c == doctest::Approx(-2.0 / 3.0).epsilon(1e-5));
}
