#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kdvlab/grid.hpp"

namespace kdvlab {

enum class Scheme { integrating_factor_rk4, etd_rk4 };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

/// Default lower bound on points per unit length times epsilon.
inline constexpr double kResolutionFactor = 8.0;

struct SolverParams {
  double epsilon = 0.1;
  /// Time step; a non-positive value selects a step from the CFL bound of the nonlinear term.
  double dt = 0.0;
  double t_end = 1.0;
  bool dealias = true;
  /// Ignored by the CH solver, which always uses explicit RK4 on the momentum form.
  Scheme scheme = Scheme::integrating_factor_rk4;
  double resolution_factor = kResolutionFactor;
};

struct ConservationRecord {
  double time = 0.0;
  /// Integral of u.
  double mass = 0.0;
  /// Integral of u^2 (KdV) or u^2 + eps^2 u_x^2 (CH).
  double energy = 0.0;
};

struct SolveReport {
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  std::vector<ConservationRecord> conservation;
  double mass_drift = 0.0;    ///< max relative deviation of the mass
  double energy_drift = 0.0;  ///< max relative deviation of the energy
  double dt = 0.0;            ///< nominal step actually used
  std::size_t steps = 0;
};

/// Smallest admissible power-of-two grid for the domain length and epsilon.
std::size_t required_points(double length, double epsilon, double factor = kResolutionFactor);

/// u_t + 6 u u_x + eps^2 u_xxx = 0 on a periodic grid. Snapshot times must lie in [0, t_end];
/// an empty list means {t_end}.
SolveReport kdv_run(const GridFunction& u0, const SolverParams& p, std::vector<double> snapshots = {});
std::vector<GridFunction> kdv_solve(const GridFunction& u0, const SolverParams& p,
                                    std::vector<double> snapshots = {});

/// u_t + 6 u u_x - eps^2 (u_xxt + 4 u_x u_xx + 2 u u_xxx) = 0, evolved in m = u - eps^2 u_xx.
SolveReport ch_run(const GridFunction& u0, const SolverParams& p, std::vector<double> snapshots = {});
std::vector<GridFunction> ch_solve(const GridFunction& u0, const SolverParams& p,
                                   std::vector<double> snapshots = {});

/// Solves u - eps^2 u_xx = m.
GridFunction helmholtz_resolvent(const GridFunction& m, double epsilon);
/// (1 - eps^2 d_xx)^(-1/2) m with the exact symbol.
GridFunction miura_normalize(const GridFunction& m, double epsilon);
/// m = u - eps^2 u_xx.
GridFunction momentum_from_velocity(const GridFunction& u, double epsilon);

/// L-infinity distance between two grids on the same domain; the finer grid is subsampled.
double max_abs_difference(const GridFunction& a, const GridFunction& b);

}  // namespace kdvlab
