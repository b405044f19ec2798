#pragma once

#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

/// Polynomial in T with exact rational coefficients, c[j] multiplying T^j.
struct Poly {
  std::vector<Rational> c;

  bool is_zero() const;
  double eval(double T) const;
  std::string str() const;
  friend bool operator==(const Poly& a, const Poly& b);
};

/// a_1..a_13 (index 0 unused) obtained by exact order matching of
/// U = lead * Y + sum (-1)^n a_n Y^-n, Y^3 = X, in X = 6 T U - (U^3 + U_X^2/2 + U U_XX + U_XXXX/10).
/// Throws std::runtime_error if the leading balance fails for the given lead sign.
std::array<Poly, 14> order_matching(int lead = -1);

/// The tabulated coefficient list, a_n polynomials in T.
std::array<Poly, 14> printed_coefficients();

}  // namespace oracle
