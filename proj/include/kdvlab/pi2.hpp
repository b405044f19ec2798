#pragma once

#include <array>
#include <string>
#include <vector>

namespace kdvlab {

/// Coefficients a_1..a_13 of the large-|X| expansion (index 0 unused).
std::array<double, 14> laurent_coefficients(double T);

/// U and its first three X-derivatives from the truncated expansion, with the size of the last
/// retained term as a truncation estimate.
struct TailJet {
  double U = 0.0, U1 = 0.0, U2 = 0.0, U3 = 0.0;
  double truncation = 0.0;
};

/// Branch convention of the expansion: U = -Y + sum_n (-1)^n a_n / Y^n with Y the real cube root of X.
inline constexpr const char* kLaurentBranch = "U = -Y + sum (-1)^n a_n Y^-n, Y = cbrt(X)";

/// Truncated tail. Throws DomainError (tail not converged) when the last retained term exceeds tail_tol.
double laurent_tail(double X, double T, int n_terms = 13, double tail_tol = 1e-10);
TailJet laurent_tail_jet(double X, double T, int n_terms = 13, double tail_tol = 1e-10);

/// Smooth real solution of X = 6 T U - (U^3 + U_X^2/2 + U U_XX + U_XXXX/10) on [X_l, X_r].
struct Pi2Solution {
  double T = 0.0;
  std::vector<double> mesh;
  std::vector<double> U, U_X, U_XX, U_XXX;
  double tol = 0.0;            // achieved maximal relative collocation residual
  std::vector<double> newton_history;
  std::string branch = kLaurentBranch;

  double x_left() const { return mesh.front(); }
  double x_right() const { return mesh.back(); }
  /// Piecewise cubic Hermite value; the Laurent tail outside the mesh.
  double value(double X) const;
  /// Two-point Hermite interpolant of degree 7 (uses U..U_XXX); returns U at X.
  double value_smooth(double X) const;
};

struct Pi2Options {
  int initial_nodes = 400;
  int max_nodes = 100000;
  double continuation_step = 0.05;
  int max_newton = 40;
};

/// Collocation solve with Laurent boundary data for U and U_X at both ends.
Pi2Solution pi2_solve(double T, double X_l, double X_r, double rel_tol, const Pi2Options& opt = {});

/// Smallest min_half_width * 2^j (j <= 6) at which the tail meets the boundary tolerance for
/// rel_tol at both ends; large |T| pushes the admissible truncation point outwards.
double pi2_tail_half_width(double T, double rel_tol, double min_half_width = 100.0);

/// Warm-started solve from an existing solution (same interval), used by continuation in T.
Pi2Solution pi2_solve_from(const Pi2Solution& start, double T, double rel_tol, const Pi2Options& opt = {});

/// Independent ODE residual: U resampled on Chebyshev panels and differentiated spectrally.
struct Pi2Residual {
  std::vector<double> X;
  std::vector<double> r;
  double max_abs() const;
};
Pi2Residual pi2_residual(const Pi2Solution& sol, double X_a = -10.0, double X_b = 10.0);

}  // namespace kdvlab
