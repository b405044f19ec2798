#pragma once

#include <array>
#include <optional>
#include <vector>

#include "kdvlab/hopf.hpp"

namespace kdvlab {

/// Whitham branch points beta1 >= beta2 >= beta3 (equalities are the degenerate edges).
struct BetaTriple {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;

  double delta() const { return beta1 - beta3; }
  /// s^2 = (beta2 - beta3) / (beta1 - beta3).
  double m() const;
  /// 1 - s^2 = (beta1 - beta2) / (beta1 - beta3), computed without cancellation.
  double m1() const;
  double s() const;
  /// alpha = -beta1 + (beta1 - beta3) E(s) / K(s).
  double alpha() const;
  /// Imaginary part of the theta modulus, K(s') / K(s); infinite at s = 0.
  double tau() const;
  /// Mean value beta1 + beta2 + beta3 + 2 alpha.
  double ubar() const;
};

struct Velocities {
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
};

/// Whitham characteristic speeds, with the degenerate limits evaluated without cancellation.
Velocities whitham_velocities(const BetaTriple& b);

/// q and its first and second partial derivatives in beta.
struct PhaseDerivatives {
  double q = 0.0;
  std::array<double, 3> grad{};
  std::array<std::array<double, 3>, 3> hess{};
};

/// Phase q(beta1, beta2, beta3) with quadrature order raised until successive values agree to 1e-10.
double q_phase(const BetaTriple& b, const InitialData& data);

/// q with derivatives at a fixed tensor quadrature order (order x order nodes).
PhaseDerivatives phase_derivatives(const BetaTriple& b, const InitialData& data, int order = 48);

struct WhithamOptions {
  int quadrature_order = 48;
  double newton_tol = 1e-12;
  int max_newton = 60;
  /// Number of samples of the modulus family tabulated across the zone.
  int family_samples = 33;
};

/// Hodograph residuals x - v_i t - w_i for i = 1, 2, 3.
std::array<double, 3> hodograph_residual(const BetaTriple& b, double x, double t, const InitialData& data,
                                         const WhithamOptions& opt = {});

/// Newton solve of the hodograph system from a guess. Throws ConvergenceError on failure.
BetaTriple hodograph_solve(double x, double t, const InitialData& data, const BetaTriple& guess,
                           const WhithamOptions& opt = {});

/// Point of the one-parameter family of hodograph solutions at time t with fixed modulus m.
struct FamilyPoint {
  double m = 0.0;
  BetaTriple beta;
  double x = 0.0;
};

/// Oscillatory zone at a fixed time: edges and a tabulated beta field.
class WhithamZone {
 public:
  /// Builds the zone by continuation in t from the catastrophe. For t < t_c the zone is empty.
  WhithamZone(double t, const InitialData& data, const WhithamOptions& opt = {});

  double t() const { return t_; }
  bool empty() const { return empty_; }
  double x_minus() const;
  double x_plus() const;
  const BreakupPoint& breakup() const { return bp_; }
  /// m = 0 (beta2 = beta3) at x_minus, m = 1 (beta1 = beta2) at x_plus.
  const FamilyPoint& trailing_edge() const { return family_.front(); }
  const FamilyPoint& leading_edge() const { return family_.back(); }
  const std::vector<FamilyPoint>& family() const { return family_; }

  bool contains(double x) const { return !empty_ && x >= x_minus() && x <= x_plus(); }
  /// beta(x) inside the zone. Throws NoSolutionError outside.
  BetaTriple beta(double x) const;

 private:
  FamilyPoint solve_family(double m, const FamilyPoint& seed) const;

  double t_;
  InitialData data_;
  WhithamOptions opt_;
  BreakupPoint bp_;
  bool empty_ = true;
  std::vector<FamilyPoint> family_;
};

/// Zone edges (x_minus, x_plus); nullopt for t < t_c.
std::optional<std::pair<double, double>> whitham_edges(double t, const InitialData& data,
                                                       const WhithamOptions& opt = {});

/// Glued leading-order asymptotics at a fixed time: Hopf outside the zone, theta formula inside.
class AsymptoticSolution {
 public:
  AsymptoticSolution(double t, const InitialData& data, const WhithamOptions& opt = {});
  double u(double x, double epsilon) const;
  /// Mean (weak-limit) value: Hopf outside, ubar inside.
  double ubar(double x) const;
  const WhithamZone& zone() const { return zone_; }

 private:
  InitialData data_;
  WhithamZone zone_;
  WhithamOptions opt_;
};

double asymptotic_u(double x, double t, double epsilon, const InitialData& data);

/// One-phase solution ubar + 2 eps^2 d^2/dx^2 log theta with constant branch points and phase q0.
double finite_gap_eval(const BetaTriple& b, double q0, double x, double t, double epsilon);

}  // namespace kdvlab
