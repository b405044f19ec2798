#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "kdvlab/hopf.hpp"
#include "kdvlab/pi2.hpp"

namespace kdvlab {

enum class Equation { kdv, ch };

Equation parse_equation(const std::string& name);
std::string to_string(Equation e);

struct MultiscaleFrame {
  BreakupPoint bp;
  double epsilon = 0.0;
  Equation equation = Equation::kdv;
  double c0 = 0.0;  ///< 4 u_c for CH, unused for KdV
};

/// Validated frame; sets c0 = 4 u_c for CH.
MultiscaleFrame make_frame(const BreakupPoint& bp, double epsilon, Equation equation);

struct ScaledPoint {
  double X = 0.0;
  double T = 0.0;
};

struct PhysicalPoint {
  double x = 0.0;
  double t = 0.0;
};

ScaledPoint rescale_coords(const MultiscaleFrame& frame, double x, double t);
PhysicalPoint physical_coords(const MultiscaleFrame& frame, double X, double T);

/// Amplitude factor a in u = u_c + a U (negative for CH).
double amplitude_scale(const MultiscaleFrame& frame);

/// Lazily filled cache of PI2 solutions keyed by T rounded to 1e-12. Thread-safe. The interval is
/// [-w, w] with w the smallest admissible tail width not below half_width.
class Pi2Cache {
 public:
  explicit Pi2Cache(double half_width = 100.0, double rel_tol = 1e-6);

  std::shared_ptr<const Pi2Solution> get(double T);
  /// U(X, T); the Laurent tail is used outside the solved interval.
  double U(double X, double T);

  std::size_t size() const;
  /// Number of evaluations that fell outside the mesh and used the tail.
  std::size_t tail_evaluations() const { return tail_hits_.load(); }
  double half_width() const { return half_width_; }
  double rel_tol() const { return rel_tol_; }

 private:
  double half_width_;
  double rel_tol_;
  mutable std::mutex mutex_;
  std::map<long long, std::shared_ptr<const Pi2Solution>> solutions_;
  std::atomic<std::size_t> tail_hits_{0};
};

double kdv_multiscale_u(const MultiscaleFrame& frame, double x, double t, Pi2Cache& cache);
double ch_multiscale_u(const MultiscaleFrame& frame, double x, double t, Pi2Cache& cache);
/// Dispatches on frame.equation.
double multiscale_u(const MultiscaleFrame& frame, double x, double t, Pi2Cache& cache);

}  // namespace kdvlab
