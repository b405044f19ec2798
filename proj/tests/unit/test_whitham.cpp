#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "kdvlab/errors.hpp"
#include "kdvlab/grid.hpp"
#include "kdvlab/specfun.hpp"
#include "kdvlab/whitham.hpp"

using namespace kdvlab;
using boost::math::quadrature::gauss_kronrod;

namespace {

const InitialData& sech_data() {
  static const InitialData d = InitialData::neg_sech_squared();
  return d;
}

// Phase integral with mu = 1 - w^2 and nu = cos(phi), which removes both endpoint singularities.
double brute_phase(double b1, double b2, double b3) {
  auto inner = [&](double phi) {
    const double nu = std::cos(phi);
    auto f = [&](double w) {
      const double mu = 1.0 - w * w;
      const double arg = 0.5 * (1 + mu) * (0.5 * (1 + nu) * b1 + 0.5 * (1 - nu) * b2) + 0.5 * (1 - mu) * b3;
      return 2.0 * -std::acosh(1.0 / std::sqrt(-arg));
    };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, std::sqrt(2.0), 15, 1e-13);
  };
  return gauss_kronrod<double, 61>::integrate(inner, 0.0, std::numbers::pi, 15, 1e-13) /
         (2.0 * std::sqrt(2.0) * std::numbers::pi);
}

// E/K by direct quadrature of the Legendre integrals.
double ratio_EK(double m) {
  auto k = [&](double th) { return 1.0 / std::sqrt(1.0 - m * std::sin(th) * std::sin(th)); };
  auto e = [&](double th) { return std::sqrt(1.0 - m * std::sin(th) * std::sin(th)); };
  const double K = gauss_kronrod<double, 61>::integrate(k, 0.0, std::numbers::pi / 2, 15, 1e-15);
  const double E = gauss_kronrod<double, 61>::integrate(e, 0.0, std::numbers::pi / 2, 15, 1e-15);
  return E / K;
}

double residual_norm(const BetaTriple& b, double x, double t) {
  const auto r = hodograph_residual(b, x, t, sech_data());
  return std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]);
}

}  // namespace

TEST_CASE("velocities match a quadrature-based evaluation at (1, 0, -1)") {
  const BetaTriple b{1.0, 0.0, -1.0};
  const double alpha = -1.0 + 2.0 * ratio_EK(0.5);
  const auto v = whitham_velocities(b);
  CHECK(v.v1 == doctest::Approx(4.0 * (1.0 * 2.0) / (1.0 + alpha)).epsilon(1e-10));
  CHECK(v.v2 == doctest::Approx(4.0 * (-1.0 * 1.0) / (0.0 + alpha)).epsilon(1e-10));
  CHECK(v.v3 == doctest::Approx(4.0 * (-2.0 * -1.0) / (-1.0 + alpha)).epsilon(1e-10));
  CHECK(b.alpha() == doctest::Approx(alpha).epsilon(1e-12));
}

TEST_CASE("degenerate speed limits reduce to the Hopf speed") {
  for (double b1 : {0.3, -0.2}) {
    const double b = -0.7;
    const auto v = whitham_velocities({b1, b, b});
    CHECK(std::abs(v.v1 - 6.0 * b1) < 1e-10);
    const auto w = whitham_velocities({b1, b1, b});
    CHECK(std::abs(w.v3 - 6.0 * b) < 1e-10);
  }
  // Approaching the limits continuously.
  const auto near = whitham_velocities({0.3, -0.7 + 1e-9, -0.7});
  CHECK(std::abs(near.v1 - 1.8) < 1e-6);
  CHECK_THROWS_AS(whitham_velocities({0.1, 0.1, 0.1}), DomainError);
}

TEST_CASE("phase collapses to the branch inverse at coincident betas") {
  for (double beta : {-0.9, -2.0 / 3.0, -0.3}) {
    CHECK(std::abs(q_phase({beta, beta, beta}, sech_data()) - sech_data().f_minus(beta)) < 1e-9);
  }
}

TEST_CASE("phase matches brute-force quadrature and is symmetric in beta1, beta2") {
  const double q = q_phase({-0.4, -0.55, -0.8}, sech_data());
  CHECK(std::abs(q - brute_phase(-0.4, -0.55, -0.8)) < 1e-8);
  CHECK(std::abs(q - brute_phase(-0.55, -0.4, -0.8)) < 1e-8);
}

TEST_CASE("phase gradient agrees with finite differences of the phase") {
  const BetaTriple b{-0.45, -0.6, -0.8};
  const auto pd = phase_derivatives(b, sech_data(), 64);
  const double h = 1e-5;
  std::array<double, 3> fd{};
  for (int i = 0; i < 3; ++i) {
    double p[3] = {b.beta1, b.beta2, b.beta3}, m[3] = {b.beta1, b.beta2, b.beta3};
    p[i] += h, m[i] -= h;
    fd[i] = (phase_derivatives({p[0], p[1], p[2]}, sech_data(), 64).q -
             phase_derivatives({m[0], m[1], m[2]}, sech_data(), 64).q) / (2 * h);
    CHECK(pd.grad[i] == doctest::Approx(fd[i]).epsilon(1e-6));
  }
}

TEST_CASE("phase outside the branch range is a domain error") {
  CHECK_THROWS_AS(q_phase({0.2, -0.5, -0.8}, sech_data()), DomainError);
  CHECK_THROWS_AS(q_phase({-0.5, -0.4, -0.8}, sech_data()), DomainError);
}

TEST_CASE("zone collapses at the catastrophe and is empty before it") {
  const auto bp = breakup_point(sech_data());
  CHECK_FALSE(whitham_edges(bp.t_c - 1e-3, sech_data()).has_value());
  const auto e = whitham_edges(bp.t_c + 1e-12, sech_data());
  REQUIRE(e.has_value());
  CHECK(std::abs(e->first - bp.x_c) < 1e-6);
  CHECK(std::abs(e->second - bp.x_c) < 1e-6);
}

TEST_CASE("zone width grows monotonically after breakup") {
  const auto bp = breakup_point(sech_data());
  double prev = 0.0;
  for (double t : {bp.t_c + 1e-4, bp.t_c + 1e-3, 0.22, 0.23, 0.24, 0.25}) {
    const auto e = whitham_edges(t, sech_data());
    REQUIRE(e.has_value());
    const double width = e->second - e->first;
    CHECK(width > prev);
    prev = width;
  }
}

TEST_CASE("edges carry the expected degeneracies and match the Hopf branches") {
  const WhithamZone zone(0.23, sech_data());
  const auto& trail = zone.trailing_edge();
  const auto& lead = zone.leading_edge();
  CHECK(std::abs(trail.beta.beta2 - trail.beta.beta3) < 1e-10);
  CHECK(std::abs(lead.beta.beta1 - lead.beta.beta2) < 1e-10);
  CHECK(trail.beta.beta1 == doctest::Approx(hopf_evaluate_branch(sech_data(), zone.x_minus(), 0.23, -1)).epsilon(1e-8));
  CHECK(lead.beta.beta3 == doctest::Approx(hopf_evaluate_branch(sech_data(), zone.x_plus(), 0.23, +1)).epsilon(1e-8));
}

TEST_CASE("hodograph solution agrees with a coarse-to-fine grid search") {
  const auto bp = breakup_point(sech_data());
  const double x = bp.x_c - 0.065, t = 0.23;
  const WhithamZone zone(t, sech_data());
  REQUIRE(zone.contains(x));
  const BetaTriple newton = zone.beta(x);
  const auto r = hodograph_residual(newton, x, t, sech_data());
  CHECK(std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]) < 1e-10);

  // Search starts from the centre of the admissible range, not from the Newton answer.
  double c[3] = {-0.5, -0.65, -0.8}, step = 0.04;
  for (int level = 0; level < 7; ++level) {
    double best = std::numeric_limits<double>::infinity(), arg[3] = {c[0], c[1], c[2]};
    for (int i = -5; i <= 5; ++i)
      for (int j = -5; j <= 5; ++j)
        for (int k = -5; k <= 5; ++k) {
          const BetaTriple b{c[0] + i * step, c[1] + j * step, c[2] + k * step};
          if (!(b.beta1 > b.beta2 && b.beta2 > b.beta3) || b.beta1 >= 0.0 || b.beta3 <= -1.0) continue;
          const double v = residual_norm(b, x, t);
          if (v < best) best = v, arg[0] = b.beta1, arg[1] = b.beta2, arg[2] = b.beta3;
        }
    c[0] = arg[0], c[1] = arg[1], c[2] = arg[2];
    step /= 4.0;
  }
  CHECK(std::abs(c[0] - newton.beta1) < 1e-4);
  CHECK(std::abs(c[1] - newton.beta2) < 1e-4);
  CHECK(std::abs(c[2] - newton.beta3) < 1e-4);
}

TEST_CASE("outside the zone beta(x) reports no solution") {
  const WhithamZone zone(0.23, sech_data());
  CHECK_THROWS_AS(zone.beta(zone.x_plus() + 0.01), NoSolutionError);
  CHECK_THROWS_AS(zone.beta(zone.x_minus() - 0.01), NoSolutionError);
}

TEST_CASE("beta field satisfies the Whitham equations with second-order finite-difference residual") {
  const double t = 0.235;
  const WhithamZone zone(t, sech_data());
  const double x = 0.5 * (zone.x_minus() + zone.x_plus());
  const BetaTriple b0 = zone.beta(x);
  auto at = [&](double xx, double tt) { return hodograph_solve(xx, tt, sech_data(), b0); };
  auto residual = [&](double h) {
    const BetaTriple xp = at(x + h, t), xm = at(x - h, t), tp = at(x, t + h), tm = at(x, t - h);
    const auto v = whitham_velocities(b0);
    const double r1 = (tp.beta1 - tm.beta1) / (2 * h) + v.v1 * (xp.beta1 - xm.beta1) / (2 * h);
    const double r2 = (tp.beta2 - tm.beta2) / (2 * h) + v.v2 * (xp.beta2 - xm.beta2) / (2 * h);
    const double r3 = (tp.beta3 - tm.beta3) / (2 * h) + v.v3 * (xp.beta3 - xm.beta3) / (2 * h);
    return std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
  };
  const double coarse = residual(2e-3), fine = residual(1e-3);
  CHECK(fine < coarse);
  CHECK(std::log2(coarse / fine) > 1.7);
}

TEST_CASE("finite-gap formula is an exact KdV solution") {
  const BetaTriple b{0.5, -0.2, -0.9};
  const double eps = 0.1, q0 = 0.3, t = 0.2;
  const double K = elliptic_KE(b.s()).K;
  const double period = 2.0 * eps * K / std::sqrt(b.delta());
  const std::size_t n = 128;
  auto field = [&](double tt) {
    return GridFunction::sample(0.0, period, n, [&](double x) { return finite_gap_eval(b, q0, x, tt, eps); });
  };
  const GridFunction u = field(t);
  const GridFunction ux = spectral_derivative(u, 1), uxxx = spectral_derivative(u, 3);
  const double h = 1e-3;
  const GridFunction p1 = field(t + h), m1 = field(t - h), p2 = field(t + 2 * h), m2 = field(t - 2 * h);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ut = (-p2[i] + 8 * p1[i] - 8 * m1[i] + m2[i]) / (12 * h);
    worst = std::max(worst, std::abs(ut + 6 * u[i] * ux[i] + eps * eps * uxxx[i]));
    scale = std::max(scale, std::abs(ut));
  }
  CHECK(worst < 1e-6 * std::max(1.0, scale));
}

TEST_CASE("asymptotic solution equals Hopf before breakup and outside the zone") {
  CHECK(asymptotic_u(-1.0, 0.15, 0.01, sech_data()) == hopf_evaluate(sech_data(), -1.0, 0.15));
  const AsymptoticSolution a(0.23, sech_data());
  const double x = a.zone().x_minus() - 0.2;
  CHECK(a.u(x, 0.01) == doctest::Approx(hopf_evaluate(sech_data(), x, 0.23)).epsilon(1e-12));
}
