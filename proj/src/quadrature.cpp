#include "kdvlab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kdvlab/errors.hpp"

namespace kdvlab {

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw DomainError("gauss_jacobi: need at least one node");
  if (!(alpha > -1.0 && beta > -1.0)) throw DomainError("gauss_jacobi: alpha, beta must exceed -1");
  const double ab = alpha + beta;
  Eigen::VectorXd diag(n), off(std::max(n - 1, 1));
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    diag(k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    off(k - 1) = std::sqrt(num / den);
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                              std::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = diag(0);
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off.head(n - 1), Eigen::ComputeEigenvectors);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v * v;
  }
  return rule;
}

QuadratureRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

QuadratureRule gauss_chebyshev(int n) {
  if (n < 1) throw DomainError("gauss_chebyshev: need at least one node");
  QuadratureRule rule;
  for (int i = 1; i <= n; ++i) {
    rule.nodes.push_back(std::cos((2.0 * i - 1.0) * std::numbers::pi / (2.0 * n)));
    rule.weights.push_back(std::numbers::pi / n);
  }
  return rule;
}

std::vector<double> chebyshev_lobatto(int n) {
  std::vector<double> x(n + 1);
  for (int j = 0; j <= n; ++j) x[j] = std::cos(std::numbers::pi * j / n);
  return x;
}

std::vector<double> chebyshev_diff_matrix(int n) {
  const auto x = chebyshev_lobatto(n);
  const int m = n + 1;
  std::vector<double> D(m * m, 0.0);
  auto c = [n](int j) { return (j == 0 || j == n ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0); };
  for (int i = 0; i < m; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      D[i * m + j] = c(i) / (c(j) * (x[i] - x[j]));
      rowsum += D[i * m + j];
    }
    D[i * m + i] = -rowsum;  // negative-sum trick
  }
  return D;
}

}  // namespace kdvlab
