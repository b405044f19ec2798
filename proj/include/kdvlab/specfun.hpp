#pragma once

namespace kdvlab {

/// Complete elliptic integrals K(s), E(s) for modulus s.
struct EllipticPair {
  double K = 0.0;
  double E = 0.0;
  double s = 0.0;
};

/// K and E by the arithmetic-geometric mean; 0 <= s < 1.
/// Throws DomainError outside [0,1] and SaturationError at s = 1 (or when K overflows).
EllipticPair elliptic_KE(double s);

/// Elliptic integrals in the parameter m = s^2 together with cancellation-free
/// combinations. m and its complement m1 = 1 - m are passed separately so that
/// both edges keep full relative precision.
struct EllipticCombos {
  double K = 0.0;
  double E = 0.0;
  double K_minus_E = 0.0;     // K - E
  double E_minus_m1K = 0.0;   // E - m1 K
  double N = 0.0;             // (2 - m) E - 2 m1 K
  double sigma = 0.0;         // S / m^2, with E - m1 K = K (m/2 - S); equals 1/16 at m = 0
};

/// Requires m1 > 0. Throws DomainError for m, m1 outside [0,1].
EllipticCombos elliptic_combos(double m, double m1);

/// Argument of the Jacobi theta function with purely imaginary modulus i*tau.
struct ThetaArgument {
  double z = 0.0;
  double tau = 1.0;
};

/// theta(z; i tau) = sum_n exp(-pi n^2 tau + 2 pi i n z). Throws DomainError for tau <= 0.
double theta3(ThetaArgument arg);

/// d^2/dz^2 log theta(z; i tau) from term-wise differentiated series.
double d2_log_theta(ThetaArgument arg);

}  // namespace kdvlab
