#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "kdvlab/config.hpp"
#include "kdvlab/hopf.hpp"
#include "kdvlab/multiscale.hpp"
#include "kdvlab/pde.hpp"

namespace kdvlab {

struct Interval {
  double left = std::numeric_limits<double>::quiet_NaN();
  double right = std::numeric_limits<double>::quiet_NaN();
  bool empty() const { return !(right >= left); }
  double width() const { return empty() ? 0.0 : right - left; }
  bool contains(double x) const { return !empty() && x >= left && x <= right; }
};

/// Center of the comparison window, x_c + 6 u_c (t - t_c).
double window_center(const BreakupPoint& bp, double t);
/// center -+ alpha eps^(6/7).
Interval comparison_window(const BreakupPoint& bp, double t, double epsilon, double alpha);

/// max |a - b| over samples with x in the window; non-finite samples are skipped.
double linf_window(const std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b,
                   const Interval& window);

/// t_c + sign 0.1 eps^(4/7).
double t_plusminus(const BreakupPoint& bp, double epsilon, int sign);

/// Least squares for -log10(delta) = -a log10(eps) + b.
struct RegressionFit {
  double a = 0.0;
  double b = 0.0;
  double r = 0.0;
  double sigma_a = 0.0;
  std::size_t n = 0;
};
RegressionFit scaling_fit(const std::vector<double>& epsilons, const std::vector<double>& deltas);

/// Twice the median spacing of sign changes of a signal; 0 if it changes sign fewer than twice.
double oscillation_period(const std::vector<double>& x, const std::vector<double>& signal);
/// Maximum of |v| over [x_i - width/2, x_i + width/2].
std::vector<double> moving_max(const std::vector<double>& x, const std::vector<double>& v, double width);

/// Maximal interval around `center` on which the smoothed |delta_multiscale| < |delta_asymptotic|.
/// Both errors are smoothed by a moving maximum; a non-positive width selects one oscillation
/// period estimated from the sign changes of delta_asymptotic (signed values expected).
Interval better_zone(const std::vector<double>& x, const std::vector<double>& delta_multiscale,
                     const std::vector<double>& delta_asymptotic, double center, double smoothing_width = -1.0);

/// Evaluation time: absolute, t_c, or t_c -+ 0.1 eps^(4/7).
struct TimeSpec {
  enum class Kind { absolute, critical, minus, plus };
  Kind kind = Kind::critical;
  double value = 0.0;

  static TimeSpec parse(const std::string& text);
  double resolve(const BreakupPoint& bp, double epsilon) const;
  std::string label() const;
};

struct ExperimentConfig {
  std::string initial_data = "neg_sech_squared";
  std::vector<double> data_parameters;
  Equation equation = Equation::kdv;
  std::vector<double> epsilons;
  std::vector<TimeSpec> times;
  double alpha = 3.0;
  double half_length = 0.0;  ///< domain [-L, L); 0 selects 5 pi
  double resolution_factor = kResolutionFactor;
  Scheme scheme = Scheme::integrating_factor_rk4;
  bool dealias = true;
  double dt = 0.0;
  bool self_convergence_gate = true;
  double gate_tolerance = 1e-8;
  double pi2_half_width = 100.0;
  double pi2_rel_tol = 1e-6;
  /// Approximants are sampled on PDE grid points within this distance of the window center.
  double profile_span = 1.5;
  std::string out_dir;

  void validate() const;
};

std::vector<double> default_epsilons();
ExperimentConfig config_from_key_values(const KeyValues& kv);

/// One (eps, t) comparison: the PDE snapshot and every approximant sampled on the same grid points.
struct Cell {
  double epsilon = 0.0;
  double t = 0.0;
  std::string label;
  std::size_t n_points = 0;
  double gate_difference = std::numeric_limits<double>::quiet_NaN();
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  Interval whitham_zone;
  std::vector<double> x, u_num, u_hopf, u_asymptotic, u_multiscale;
};

struct CellErrors {
  double delta_hopf = 0.0;
  double delta_asymptotic = 0.0;
  double delta_multiscale = 0.0;
  Interval zone;
};

CellErrors cell_errors(const Cell& cell, const BreakupPoint& bp, double alpha);

struct FitRecord {
  std::string experiment;  ///< hopf, asymptotic, multiscale (error versus the PDE) or zone-width
  std::string time;        ///< time label
  double alpha = 0.0;
  RegressionFit fit;
};

/// Fits per time label and error kind; series with fewer than three positive values are skipped.
std::vector<FitRecord> fit_records(const std::vector<Cell>& cells, const BreakupPoint& bp, double alpha);

struct ExperimentReport {
  ExperimentConfig config;
  BreakupPoint bp;
  std::vector<Cell> cells;
  std::vector<CellErrors> errors;
  std::vector<FitRecord> fits;

  /// Cell lookup by epsilon and time label; throws DomainError if absent.
  const Cell& cell(double epsilon, const std::string& label) const;
  const FitRecord& fit(const std::string& experiment, const std::string& time) const;
};

/// Runs every (eps, t) cell, enforcing the self-convergence gate, then fits across eps. Outputs are
/// written when config.out_dir is non-empty.
ExperimentReport run_experiment(const ExperimentConfig& config);

void write_outputs(const ExperimentReport& report, const std::string& dir);

}  // namespace kdvlab
