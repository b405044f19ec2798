#include "kdvlab/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kdvlab/errors.hpp"

namespace kdvlab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesCut = 1e-17;

struct AgmResult {
  double K;
  double S;      // sum_{n>=1} 2^{n-1} c_n^2
  double sigma;  // S / m^2
};

// a0 = 1, b0 = sqrt(m1), c0 = sqrt(m); c_{n+1} = c_n^2 / (4 a_{n+1}) avoids a - b cancellation.
AgmResult agm(double m, double m1) {
  double a = 1.0;
  double b = std::sqrt(m1);
  double r = 0.0;  // c_n / m for n >= 1
  double S = 0.0;
  double sigma = 0.0;
  double weight = 1.0;  // 2^{n-1}
  for (int n = 0; n < 64; ++n) {
    const double a_next = 0.5 * (a + b);
    const double b_next = std::sqrt(a * b);
    r = (n == 0) ? 1.0 / (4.0 * a_next) : m * r * r / (4.0 * a_next);
    const double term = weight * r * r;
    sigma += term;
    S += term * m * m;
    weight *= 2.0;
    a = a_next;
    b = b_next;
    if (std::abs(a - b) <= 2e-16 * a) break;
  }
  return {kPi / (2.0 * a), S, sigma};
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("theta: tau must be positive and finite, got " + std::to_string(tau));
  }
}

// Reduce z to [-1/2, 1/2] and return |z| so evenness is exact.
double reduce(double z) {
  if (!std::isfinite(z)) throw DomainError("theta: non-finite argument");
  double r = z - std::floor(z + 0.5);
  return std::abs(r);
}

struct SeriesValue {
  double theta;
  double d2log;
};

SeriesValue direct_series(double z, double tau) {
  double s0 = 1.0, s1 = 0.0, s2 = 0.0;
  for (int n = 1;; ++n) {
    const double w = std::exp(-kPi * n * n * tau);
    if (w < kSeriesCut) break;
    const double ang = 2.0 * kPi * n * z;
    const double c = std::cos(ang), s = std::sin(ang);
    const double k = 2.0 * kPi * n;
    s0 += 2.0 * w * c;
    s1 += -2.0 * w * k * s;
    s2 += -2.0 * w * k * k * c;
  }
  return {s0, s2 / s0 - (s1 / s0) * (s1 / s0)};
}

// theta(z; i tau) = tau^{-1/2} sum_m exp(-pi (z - m)^2 / tau).
SeriesValue modular_series(double z, double tau) {
  // Gaussian weights relative to the largest one (m = 0 since |z| <= 1/2).
  double sum = 0.0, mean = 0.0, second = 0.0;
  const double scale = 2.0 * kPi / tau;
  const int reach = static_cast<int>(std::ceil(std::sqrt(40.0 * tau / kPi))) + 2;
  for (int m = -reach; m <= reach; ++m) {
    const double d = z - m;
    const double e = -kPi * (d * d - z * z) / tau;
    const double w = std::exp(e);
    if (w < kSeriesCut && std::abs(m) > 1) continue;
    const double dm = -scale * d;
    sum += w;
    mean += w * dm;
    second += w * dm * dm;
  }
  mean /= sum;
  second /= sum;
  const double theta = std::exp(-kPi * z * z / tau) * sum / std::sqrt(tau);
  return {theta, -scale + (second - mean * mean)};
}

SeriesValue evaluate(ThetaArgument arg) {
  check_tau(arg.tau);
  const double z = reduce(arg.z);
  return arg.tau >= 1.0 ? direct_series(z, arg.tau) : modular_series(z, arg.tau);
}

}  // namespace

EllipticPair elliptic_KE(double s) {
  if (std::isnan(s) || s < 0.0 || s > 1.0) {
    throw DomainError("elliptic_KE: modulus must lie in [0,1), got " + std::to_string(s));
  }
  if (s == 1.0) {
    throw SaturationError("elliptic_KE: K diverges at s = 1 (solitonic edge)");
  }
  const double m = s * s;
  const double m1 = (1.0 - s) * (1.0 + s);
  if (m1 <= 0.0) throw SaturationError("elliptic_KE: K overflows as s -> 1 (solitonic edge)");
  const EllipticCombos c = elliptic_combos(m, m1);
  if (!std::isfinite(c.K)) throw SaturationError("elliptic_KE: K overflows as s -> 1 (solitonic edge)");
  return {c.K, c.E, s};
}

EllipticCombos elliptic_combos(double m, double m1) {
  if (std::isnan(m) || std::isnan(m1) || m < 0.0 || m > 1.0 || m1 < 0.0 || m1 > 1.0) {
    throw DomainError("elliptic_combos: parameter outside [0,1]");
  }
  if (m1 == 0.0) throw SaturationError("elliptic_combos: K diverges at m = 1 (solitonic edge)");
  const AgmResult g = agm(m, m1);
  EllipticCombos out;
  out.K = g.K;
  out.sigma = g.sigma;
  if (m <= 0.5) {
    out.K_minus_E = g.K * (0.5 * m + g.S);
    out.E_minus_m1K = g.K * (0.5 * m - g.S);
    out.E = g.K - out.K_minus_E;
    out.N = g.K * (0.5 * m * m - (2.0 - m) * g.S);
  } else {
    out.E = g.K * (1.0 - 0.5 * m - g.S);
    out.K_minus_E = g.K - out.E;
    out.E_minus_m1K = out.E - m1 * g.K;
    out.N = (2.0 - m) * out.E - 2.0 * m1 * g.K;
  }
  return out;
}

double theta3(ThetaArgument arg) { return evaluate(arg).theta; }

double d2_log_theta(ThetaArgument arg) { return evaluate(arg).d2log; }

}  // namespace kdvlab
