#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kdvlab/config.hpp"
#include "kdvlab/errors.hpp"
#include "kdvlab/harness.hpp"
#include "kdvlab/hopf.hpp"
#include "kdvlab/multiscale.hpp"
#include "kdvlab/pde.hpp"
#include "kdvlab/pi2.hpp"
#include "kdvlab/whitham.hpp"

using namespace kdvlab;
using json = nlohmann::json;

namespace {

struct DataOptions {
  std::string name = "neg_sech_squared";
  std::vector<double> parameters;

  void add_to(CLI::App* app) {
    app->add_option("--data", name, "Initial profile: neg_sech_squared or user_table");
    app->add_option("--data-param", parameters, "Profile parameters (amplitude, or interleaved x,u pairs)");
  }
  InitialData make() const { return make_initial_data(name, parameters); }
};

struct RangeOptions {
  double x_min = -4.0;
  double x_max = 2.0;
  std::size_t points = 601;

  void add_to(CLI::App* app) {
    app->add_option("--x-min", x_min, "Left end of the sample range");
    app->add_option("--x-max", x_max, "Right end of the sample range");
    app->add_option("--points", points, "Number of samples")->check(CLI::Range(2, 10000000));
  }
  double x(std::size_t i) const { return x_min + (x_max - x_min) * double(i) / double(points - 1); }
};

// Writes to the named file, or stdout for "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      const auto parent = std::filesystem::path(path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      file_.open(path);
      if (!file_) throw Error("cannot open " + path);
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    os << (first ? "" : ",") << num(v);
    first = false;
  }
  os << '\n';
}

json breakup_json(const BreakupPoint& bp) {
  return {{"x_c", bp.x_c}, {"t_c", bp.t_c}, {"u_c", bp.u_c}, {"k", bp.k}};
}

void run_hopf(const DataOptions& data, const RangeOptions& range, double t, const std::string& out) {
  const auto d = data.make();
  Sink sink(out);
  auto& os = sink.out();
  os << "x,ubar\n";
  std::optional<AsymptoticSolution> weak;
  if (t > breakup_point(d).t_c) weak.emplace(t, d);
  for (std::size_t i = 0; i < range.points; ++i) {
    const double x = range.x(i);
    write_row(os, {x, weak ? weak->ubar(x) : hopf_evaluate(d, x, t)});
  }
}

struct SolveOptions {
  double epsilon = 0.1;
  std::size_t points = 0;
  double half_length = 5.0 * std::numbers::pi;
  double dt = 0.0;
  double t_end = 0.3;
  std::vector<double> snapshots;
  std::string scheme = "if-rk4";
  bool no_dealias = false;
  std::string out = "solution";

  void add_to(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Dispersion parameter")->check(CLI::PositiveNumber);
    app->add_option("--points", points, "Grid size, a power of two (0: resolution rule)");
    app->add_option("--half-length", half_length, "Periodic domain [-L, L)")->check(CLI::PositiveNumber);
    app->add_option("--dt", dt, "Time step (0: automatic)");
    app->add_option("--t-end", t_end, "Final time")->check(CLI::PositiveNumber);
    app->add_option("--snapshots", snapshots, "Output times (default: final time)")->delimiter(',');
    app->add_option("--scheme", scheme, "if-rk4 or etd-rk4");
    app->add_flag("--no-dealias", no_dealias, "Disable the 2/3 rule");
    app->add_option("--out", out, "Output prefix: <prefix>_<t>.csv and <prefix>.json");
  }
};

void run_solve(const DataOptions& data, const SolveOptions& o, Equation eq) {
  const auto d = data.make();
  const double length = 2.0 * o.half_length;
  const std::size_t n = o.points ? o.points : required_points(length, o.epsilon);
  const auto u0 = GridFunction::sample(-o.half_length, o.half_length, n, [&](double x) { return d.u0(x); });
  SolverParams p;
  p.epsilon = o.epsilon;
  p.dt = o.dt;
  p.t_end = o.t_end;
  p.dealias = !o.no_dealias;
  p.scheme = parse_scheme(o.scheme);
  const auto rep = eq == Equation::kdv ? kdv_run(u0, p, o.snapshots) : ch_run(u0, p, o.snapshots);

  json sidecar = {{"equation", to_string(eq)},
                  {"initial_data", d.name()},
                  {"epsilon", o.epsilon},
                  {"points", n},
                  {"half_length", o.half_length},
                  {"dt", rep.dt},
                  {"steps", rep.steps},
                  {"t_end", o.t_end},
                  {"scheme", to_string(p.scheme)},
                  {"dealias", p.dealias},
                  {"mass_drift", rep.mass_drift},
                  {"energy_drift", rep.energy_drift},
                  {"snapshots", json::array()},
                  {"conservation", json::array()}};
  for (std::size_t s = 0; s < rep.snapshots.size(); ++s) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%.6g", rep.times[s]);
    const std::string path = o.out + "_" + tag + ".csv";
    Sink sink(path);
    auto& os = sink.out();
    os << "x,u\n";
    const auto& g = rep.snapshots[s];
    for (std::size_t i = 0; i < g.size(); ++i) write_row(os, {g.x(i), g[i]});
    sidecar["snapshots"].push_back({{"t", rep.times[s]}, {"file", path}});
  }
  for (const auto& c : rep.conservation)
    sidecar["conservation"].push_back({{"t", c.time}, {"mass", c.mass}, {"energy", c.energy}});
  Sink sink(o.out + ".json");
  sink.out() << sidecar.dump(2) << '\n';
}

void run_whitham(const DataOptions& data, const RangeOptions& range, double t, double eps, const std::string& out) {
  const auto d = data.make();
  const AsymptoticSolution sol(t, d);
  const auto& zone = sol.zone();
  Sink sink(out);
  auto& os = sink.out();
  os << "x,beta1,beta2,beta3,ubar,u_asymptotic\n";
  for (std::size_t i = 0; i < range.points; ++i) {
    const double x = range.x(i);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    BetaTriple b{nan, nan, nan};
    if (zone.contains(x)) b = zone.beta(x);
    double ua = nan;
    try {
      ua = sol.u(x, eps);
    } catch (const MultivaluedError&) {
    }
    write_row(os, {x, b.beta1, b.beta2, b.beta3, sol.ubar(x), ua});
  }
}

void run_pi2(double T, double X_l, double X_r, double rel_tol, const std::string& out) {
  const auto sol = pi2_solve(T, X_l, X_r, rel_tol);
  const double a = std::max(X_l, -10.0), b = std::min(X_r, 10.0);
  const auto res = pi2_residual(sol, a, b);
  {
    Sink sink(out + ".csv");
    auto& os = sink.out();
    os << "X,U\n";
    for (std::size_t i = 0; i < sol.mesh.size(); ++i) write_row(os, {sol.mesh[i], sol.U[i]});
  }
  double sum2 = 0.0;
  for (double r : res.r) sum2 += r * r;
  const json rec = {{"T", T},
                    {"X_l", X_l},
                    {"X_r", X_r},
                    {"rel_tol", rel_tol},
                    {"achieved_tol", sol.tol},
                    {"mesh_points", sol.mesh.size()},
                    {"newton_history", sol.newton_history},
                    {"branch", sol.branch},
                    {"residual", {{"interval", {a, b}},
                                  {"samples", res.r.size()},
                                  {"max_abs", res.max_abs()},
                                  {"rms", res.r.empty() ? 0.0 : std::sqrt(sum2 / double(res.r.size()))}}}};
  Sink sink(out + ".json");
  sink.out() << rec.dump(2) << '\n';
}

void run_multiscale(const DataOptions& data, const RangeOptions& range, Equation eq, double eps, double t,
                    const std::string& out) {
  const auto bp = breakup_point(data.make());
  const auto frame = make_frame(bp, eps, eq);
  Pi2Cache cache;
  Sink sink(out);
  auto& os = sink.out();
  os << "x,u_multiscale\n";
  for (std::size_t i = 0; i < range.points; ++i) {
    const double x = range.x(i);
    write_row(os, {x, multiscale_u(frame, x, t, cache)});
  }
}

struct ExperimentOptions {
  std::string config_file;
  std::string equation;
  std::vector<std::string> epsilons;
  std::vector<std::string> times;
  std::optional<double> alpha;
  std::string out;
  bool no_gate = false;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "Flat key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--equation", equation, "kdv or ch");
    app->add_option("--epsilon-list", epsilons, "Strictly decreasing epsilons")->delimiter(',');
    app->add_option("--time", times, "tc, t-, t+ or a number (repeatable)")->delimiter(',');
    app->add_option("--alpha", alpha, "Window half-width in units of eps^(6/7)");
    app->add_option("--out", out, "Output directory");
    app->add_flag("--no-gate", no_gate, "Skip the grid-doubling self-convergence gate");
    app->add_option("--set", overrides, "Extra key=value configuration entries");
  }

  ExperimentConfig build() const {
    KeyValues kv = config_file.empty() ? KeyValues{} : KeyValues::parse_file(config_file);
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& e : v) s += (s.empty() ? "" : ",") + e;
      return s;
    };
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw DomainError("--set expects key=value, got " + o);
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (!equation.empty()) kv.set("equation", equation);
    if (!epsilons.empty()) kv.set("epsilons", join(epsilons));
    if (!times.empty()) kv.set("times", join(times));
    if (alpha) kv.set("alpha", num(*alpha));
    if (!out.empty()) kv.set("out_dir", out);
    if (no_gate) kv.set("gate", "false");
    return config_from_key_values(kv);
  }
};

json fit_json(const FitRecord& f) {
  return {{"experiment", f.experiment}, {"time", f.time},   {"alpha", f.alpha}, {"a", f.fit.a},
          {"b", f.fit.b},               {"r", f.fit.r},     {"sigma_a", f.fit.sigma_a}, {"n", f.fit.n}};
}

void print_errors(const ExperimentReport& r) {
  std::printf("%-10s %-8s %-12s %-12s %-12s %-10s %-10s\n", "epsilon", "t", "delta_hopf", "delta_asym",
              "delta_ms", "zone_l", "zone_r");
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    const auto& e = r.errors[i];
    std::printf("%-10.4g %-8s %-12.4e %-12.4e %-12.4e %-10.5f %-10.5f\n", c.epsilon, c.label.c_str(), e.delta_hopf,
                e.delta_asymptotic, e.delta_multiscale, e.zone.left, e.zone.right);
  }
}

void run_compare(const ExperimentOptions& o) {
  const auto report = run_experiment(o.build());
  print_errors(report);
  for (const auto& f : report.fits)
    std::printf("fit %-11s %-8s a=%.4f r=%.5f sigma_a=%.3g\n", f.experiment.c_str(), f.time.c_str(), f.fit.a,
                f.fit.r, f.fit.sigma_a);
}

void run_scaling(const ExperimentOptions& o, const std::string& experiment) {
  const std::string kind = experiment == "hopf-vs-kdv"         ? "hopf"
                           : experiment == "multiscale-vs-kdv" ? "multiscale"
                           : experiment == "zone-width"        ? "zone-width"
                                                               : "";
  if (kind.empty()) throw DomainError("unknown scaling experiment: " + experiment);
  const auto report = run_experiment(o.build());
  json out = json::array();
  for (const auto& f : report.fits)
    if (f.experiment == kind) out.push_back(fit_json(f));
  std::cout << out.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-dispersion KdV and Camassa-Holm near gradient catastrophe"};
  app.require_subcommand(1);

  DataOptions data;
  RangeOptions range;
  std::string out = "-";

  auto* breakup = app.add_subcommand("breakup", "Print the gradient catastrophe point as JSON");
  data.add_to(breakup);

  double t = 0.1;
  auto* hopf = app.add_subcommand("hopf", "Tabulate the dispersionless (weak-limit) solution");
  data.add_to(hopf);
  range.add_to(hopf);
  hopf->add_option("--t", t, "Time")->check(CLI::NonNegativeNumber);
  hopf->add_option("--out", out, "CSV path or - for stdout");

  SolveOptions solve;
  auto* solve_kdv = app.add_subcommand("solve-kdv", "Integrate u_t + 6 u u_x + eps^2 u_xxx = 0");
  data.add_to(solve_kdv);
  solve.add_to(solve_kdv);
  auto* solve_ch = app.add_subcommand("solve-ch", "Integrate the Camassa-Holm equation in momentum form");
  data.add_to(solve_ch);
  solve.add_to(solve_ch);

  double eps = 0.01;
  auto* whitham = app.add_subcommand("whitham", "Tabulate Whitham branch points and the asymptotic solution");
  data.add_to(whitham);
  range.add_to(whitham);
  whitham->add_option("--t", t, "Time")->required();
  whitham->add_option("--epsilon", eps, "Dispersion parameter")->check(CLI::PositiveNumber);
  whitham->add_option("--out", out, "CSV path or - for stdout");

  double T = 0.0, X_l = -100.0, X_r = 100.0, rel_tol = 1e-6;
  std::string pi2_out = "pi2";
  auto* pi2 = app.add_subcommand("pi2", "Solve the fourth-order ODE for the smooth special solution");
  pi2->add_option("--T", T, "Rescaled time");
  pi2->add_option("--X-l", X_l, "Left end");
  pi2->add_option("--X-r", X_r, "Right end");
  pi2->add_option("--rel-tol", rel_tol, "Collocation tolerance")->check(CLI::PositiveNumber);
  pi2->add_option("--out", pi2_out, "Output prefix: <prefix>.csv and <prefix>.json");

  std::string equation = "kdv";
  auto* multiscale = app.add_subcommand("multiscale", "Tabulate the multiscale approximation");
  data.add_to(multiscale);
  range.add_to(multiscale);
  multiscale->add_option("--equation", equation, "kdv or ch");
  multiscale->add_option("--epsilon", eps, "Dispersion parameter")->check(CLI::PositiveNumber);
  multiscale->add_option("--t", t, "Time")->required();
  multiscale->add_option("--out", out, "CSV path or - for stdout");

  ExperimentOptions exp;
  auto* compare = app.add_subcommand("compare", "Run the epsilon sweep and write profiles, errors and fits");
  exp.add_to(compare);

  std::string experiment;
  ExperimentOptions sc;
  auto* scaling = app.add_subcommand("scaling", "Run a sweep and print one family of scaling fits as JSON");
  sc.add_to(scaling);
  scaling->add_option("--experiment", experiment, "hopf-vs-kdv, multiscale-vs-kdv or zone-width")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*breakup) {
      std::cout << breakup_json(breakup_point(data.make())).dump(2) << '\n';
    } else if (*hopf) {
      run_hopf(data, range, t, out);
    } else if (*solve_kdv) {
      run_solve(data, solve, Equation::kdv);
    } else if (*solve_ch) {
      run_solve(data, solve, Equation::ch);
    } else if (*whitham) {
      run_whitham(data, range, t, eps, out);
    } else if (*pi2) {
      run_pi2(T, X_l, X_r, rel_tol, pi2_out);
    } else if (*multiscale) {
      run_multiscale(data, range, parse_equation(equation), eps, t, out);
    } else if (*compare) {
      run_compare(exp);
    } else if (*scaling) {
      run_scaling(sc, experiment);
    }
  } catch (const ResolutionError& e) {
    std::cerr << "error: " << e.what() << " (suggested points: " << e.suggested_points() << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
