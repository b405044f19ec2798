#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace kdvlab {

/// Initial profile u0(x) with the inverse f_- of its decreasing branch.
/// Immutable; copies share the underlying profile.
class InitialData {
 public:
  class Profile;

  /// u0(x) = -a sech^2 x with analytic inverse on the branch x < 0.
  static InitialData neg_sech_squared(double amplitude = 1.0);
  /// Profile interpolated from samples (strictly increasing x), held constant beyond the ends.
  static InitialData from_table(std::vector<double> x, std::vector<double> u);

  const std::string& name() const;

  double u0(double x) const;
  double u0_d1(double x) const;
  double u0_d2(double x) const;
  double u0_d3(double x) const;

  double f_minus(double y) const;
  double f_minus_d1(double y) const;
  double f_minus_d2(double y) const;
  double f_minus_d3(double y) const;

  /// f_- and its first three derivatives at y from a single inversion.
  struct BranchJet {
    double f = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  };
  BranchJet f_minus_jet(double y) const;

  /// x-interval of the decreasing branch.
  std::pair<double, double> branch_domain() const;
  /// Open interval of values attained on the decreasing branch (min, max).
  std::pair<double, double> branch_range() const;
  /// Bound on |u0| over the real line.
  double sup_abs() const;
  /// Location of the steepest descent (argmin u0') and steepest ascent (argmax u0').
  double xi_steepest_descent() const;
  double xi_steepest_ascent() const;

 private:
  explicit InitialData(std::shared_ptr<const Profile> p);
  std::shared_ptr<const Profile> p_;
};

/// Named constructor used by the CLI: "neg_sech_squared" takes an optional amplitude,
/// "user_table" takes interleaved (x, u) pairs.
InitialData make_initial_data(const std::string& profile_name, const std::vector<double>& parameters);

/// Gradient catastrophe data.
struct BreakupPoint {
  double x_c = 0.0;
  double t_c = 0.0;
  double u_c = 0.0;
  double k = 0.0;
};

/// Solution of the Hopf equation by characteristics: x = 6 t u0(xi) + xi, u = u0(xi).
/// Throws MultivaluedError when several characteristics reach (x, t).
double hopf_evaluate(const InitialData& data, double x, double t);

/// Hopf value on an outer branch: side < 0 takes the leftmost characteristic (smallest xi),
/// side > 0 the rightmost. Coincides with hopf_evaluate wherever the root is unique.
double hopf_evaluate_branch(const InitialData& data, double x, double t, int side);

/// All characteristic parameters xi reaching (x, t), ascending.
std::vector<double> characteristic_roots(const InitialData& data, double x, double t);

/// Breakup time t_c = 1 / max(-6 u0'), with x_c, u_c and the cubic coefficient k = -f_-'''(u_c)/6.
BreakupPoint breakup_point(const InitialData& data);

/// Root u of x - x_c - 6 u_c (t - t_c) = 6 (t - t_c)(u - u_c) - k (u - u_c)^3.
/// Inside the fold (three real roots) the middle root is returned.
double local_cubic(const BreakupPoint& bp, double x, double t);

}  // namespace kdvlab
