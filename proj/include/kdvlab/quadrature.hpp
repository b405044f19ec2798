#pragma once

#include <vector>

namespace kdvlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Jacobi rule for the weight (1 - x)^alpha (1 + x)^beta on [-1, 1] (Golub-Welsch).
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Chebyshev rule for the weight (1 - x^2)^{-1/2} on [-1, 1].
QuadratureRule gauss_chebyshev(int n);

/// Chebyshev points of the second kind cos(pi j / n), j = 0..n (descending).
std::vector<double> chebyshev_lobatto(int n);

/// Differentiation matrix on chebyshev_lobatto(n), row-major (n+1) x (n+1).
std::vector<double> chebyshev_diff_matrix(int n);

}  // namespace kdvlab
