#include <cmath>
#include <complex>

#include "doctest.h"
#include "kdvlab/errors.hpp"
#include "kdvlab/hopf.hpp"
#include "kdvlab/multiscale.hpp"

using namespace kdvlab;

namespace {

const BreakupPoint& sech_bp() {
  static const BreakupPoint bp = breakup_point(InitialData::neg_sech_squared());
  return bp;
}

// Real root of U^3 - 6 T U + X = 0 continuous in X, by Newton from the large-|X| branch.
double cubic_root(double X, double T) {
  double U = -std::cbrt(X);
  for (int i = 0; i < 100; ++i) U -= (U * U * U - 6 * T * U + X) / (3 * U * U - 6 * T);
  return U;
}

Pi2Cache& shared_cache() {
  static Pi2Cache cache;
  return cache;
}

}  // namespace

TEST_CASE("KdV scaled coordinates match the hand-derived frame") {
  const auto& bp = sech_bp();
  const double eps = 0.02;
  const auto f = make_frame(bp, eps, Equation::kdv);
  const double x = bp.x_c + 0.03, t = bp.t_c - 0.01;
  const double tau = t - bp.t_c, d = x - bp.x_c - 6 * bp.u_c * tau;
  const auto s = rescale_coords(f, x, t);
  CHECK(s.X == doctest::Approx(d / (std::pow(eps, 6.0 / 7) * std::pow(bp.k, 1.0 / 7))).epsilon(1e-13));
  CHECK(s.T == doctest::Approx(tau / (std::pow(eps, 4.0 / 7) * std::pow(bp.k, 3.0 / 7))).epsilon(1e-13));
  CHECK(amplitude_scale(f) == doctest::Approx(std::pow(eps / bp.k, 2.0 / 7)).epsilon(1e-13));
}

TEST_CASE("CH scaled coordinates match the hand-derived frame with reversed X") {
  const auto& bp = sech_bp();
  const double eps = 0.02;
  const auto f = make_frame(bp, eps, Equation::ch);
  CHECK(f.c0 == doctest::Approx(4 * bp.u_c));
  const double c = std::abs(f.c0);
  const double x = bp.x_c + 0.03, t = bp.t_c + 0.01;
  const double tau = t - bp.t_c, d = x - bp.x_c - 6 * bp.u_c * tau;
  const auto s = rescale_coords(f, x, t);
  CHECK(s.X == doctest::Approx(-std::pow(eps / (bp.k * c * c * c), 1.0 / 7) * d / eps).epsilon(1e-13));
  CHECK(s.T == doctest::Approx(std::pow(std::pow(eps, 4) * std::pow(bp.k, 3) * c * c, -1.0 / 7) * tau).epsilon(1e-13));
  CHECK(amplitude_scale(f) == doctest::Approx(-std::pow(eps * eps * c / (bp.k * bp.k), 1.0 / 7)).epsilon(1e-13));
  CHECK(rescale_coords(f, x + 0.01, t).X < s.X);
  CHECK(rescale_coords(make_frame(bp, eps, Equation::kdv), x + 0.01, t).X >
        rescale_coords(make_frame(bp, eps, Equation::kdv), x, t).X);
}

TEST_CASE("the breakup point maps to the origin and coordinates round-trip") {
  const auto& bp = sech_bp();
  for (Equation eq : {Equation::kdv, Equation::ch}) {
    const auto f = make_frame(bp, 0.01, eq);
    const auto o = rescale_coords(f, bp.x_c, bp.t_c);
    CHECK(std::abs(o.X) < 1e-14);
    CHECK(std::abs(o.T) < 1e-14);
    for (double dx : {-0.2, -0.01, 0.05}) {
      for (double dt : {-0.05, 0.0, 0.02}) {
        const auto s = rescale_coords(f, bp.x_c + dx, bp.t_c + dt);
        const auto p = physical_coords(f, s.X, s.T);
        CHECK(std::abs(p.x - (bp.x_c + dx)) < 1e-14);
        CHECK(std::abs(p.t - (bp.t_c + dt)) < 1e-14);
      }
    }
  }
}

TEST_CASE("halving eps scales X and T by the expected powers") {
  const auto& bp = sech_bp();
  const auto a = make_frame(bp, 0.02, Equation::kdv), b = make_frame(bp, 0.04, Equation::kdv);
  const double x = bp.x_c - 0.07, t = bp.t_c + 0.015;
  const auto sa = rescale_coords(a, x, t), sb = rescale_coords(b, x, t);
  CHECK(sb.X / sa.X == doctest::Approx(std::pow(2.0, -6.0 / 7)).epsilon(1e-13));
  CHECK(sb.T / sa.T == doctest::Approx(std::pow(2.0, -4.0 / 7)).epsilon(1e-13));
  CHECK(amplitude_scale(b) / amplitude_scale(a) == doctest::Approx(std::pow(2.0, 2.0 / 7)).epsilon(1e-13));
}

TEST_CASE("dispersionless part of the scaled profile is the local cubic") {
  const auto& bp = sech_bp();
  for (Equation eq : {Equation::kdv, Equation::ch}) {
    const auto f = make_frame(bp, 0.01, eq);
    for (double dx : {-0.05, 0.02, 0.08}) {
      const double x = bp.x_c + dx, t = bp.t_c - 0.02;
      const auto s = rescale_coords(f, x, t);
      CHECK(bp.u_c + amplitude_scale(f) * cubic_root(s.X, s.T) ==
            doctest::Approx(local_cubic(bp, x, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("multiscale profile at the breakup point") {
  const auto& bp = sech_bp();
  const double eps = 0.01;
  const auto f = make_frame(bp, eps, Equation::kdv);
  const double u = kdv_multiscale_u(f, bp.x_c, bp.t_c, shared_cache());
  CHECK(u == doctest::Approx(bp.u_c + std::pow(eps / bp.k, 2.0 / 7) * -0.2747283752).epsilon(1e-6));
  const auto g = make_frame(bp, eps, Equation::ch);
  const double v = ch_multiscale_u(g, bp.x_c, bp.t_c, shared_cache());
  CHECK(v == doctest::Approx(bp.u_c + amplitude_scale(g) * -0.2747283752).epsilon(1e-6));
  CHECK(multiscale_u(g, bp.x_c, bp.t_c, shared_cache()) == v);
  CHECK_THROWS_AS(kdv_multiscale_u(g, bp.x_c, bp.t_c, shared_cache()), DomainError);
  CHECK_THROWS_AS(ch_multiscale_u(f, bp.x_c, bp.t_c, shared_cache()), DomainError);
}

TEST_CASE("far from the origin the PI2 profile approaches the cubic root") {
  auto& cache = shared_cache();
  for (double T : {-0.3, 0.0, 0.3}) {
    double prev = 1e300;
    for (double X : {20.0, 60.0, 90.0}) {
      const double gap = std::abs(cache.U(X, T) - cubic_root(X, T));
      CHECK(gap < prev);
      prev = gap;
    }
    CHECK(prev < 1e-2);
  }
}

TEST_CASE("handover from the mesh to the tail is continuous") {
  auto& cache = shared_cache();
  const auto sol = cache.get(0.1);
  const double w = sol->x_right();
  const std::size_t before = cache.tail_evaluations();
  for (double edge : {-w, w}) {
    const double inside = cache.U(edge - std::copysign(1e-9, edge), 0.1);
    const double outside = cache.U(edge + std::copysign(1e-9, edge), 0.1);
    CHECK(std::abs(inside - outside) < 1e-6);
  }
  CHECK(cache.tail_evaluations() == before + 2);
}

TEST_CASE("the cache reuses solutions") {
  Pi2Cache cache(50.0, 1e-6);
  const auto a = cache.get(0.05);
  const auto b = cache.get(0.05 + 1e-14);
  CHECK(a.get() == b.get());
  CHECK(cache.size() == 1);
  cache.get(-0.05);
  CHECK(cache.size() == 2);
  CHECK(a->x_right() >= 50.0);
  CHECK_THROWS_AS(make_frame(sech_bp(), 0.0, Equation::kdv), DomainError);
  CHECK(parse_equation("ch") == Equation::ch);
  CHECK_THROWS_AS(parse_equation("nls"), DomainError);
}
