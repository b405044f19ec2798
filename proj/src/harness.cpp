#include "kdvlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <set>

#include "json.hpp"
#include "kdvlab/errors.hpp"
#include "kdvlab/whitham.hpp"

namespace kdvlab {

double window_center(const BreakupPoint& bp, double t) { return bp.x_c + 6.0 * bp.u_c * (t - bp.t_c); }

Interval comparison_window(const BreakupPoint& bp, double t, double epsilon, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("window constant alpha must be positive");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double c = window_center(bp, t), h = alpha * std::pow(epsilon, 6.0 / 7.0);
  return {c - h, c + h};
}

double linf_window(const std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b,
                   const Interval& window) {
  if (x.size() != a.size() || x.size() != b.size()) throw DomainError("linf_window: fields not aligned");
  double m = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!window.contains(x[i])) continue;
    ++hits;
    const double d = std::abs(a[i] - b[i]);
    if (std::isfinite(d)) m = std::max(m, d);
  }
  if (hits == 0) throw DomainError("linf_window: window contains no grid points");
  return m;
}

double t_plusminus(const BreakupPoint& bp, double epsilon, int sign) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  return bp.t_c + (sign >= 0 ? 1.0 : -1.0) * 0.1 * std::pow(epsilon, 4.0 / 7.0);
}

RegressionFit scaling_fit(const std::vector<double>& epsilons, const std::vector<double>& deltas) {
  if (epsilons.size() != deltas.size()) throw DomainError("scaling_fit: length mismatch");
  const std::size_t n = epsilons.size();
  if (n < 3) throw DomainError("scaling_fit: need at least three samples");
  std::vector<double> s(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(deltas[i] > 0.0) || !(epsilons[i] > 0.0)) throw DomainError("scaling_fit: values must be positive");
    s[i] = -std::log10(epsilons[i]);
    y[i] = -std::log10(deltas[i]);
  }
  double sm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) sm += s[i], ym += y[i];
  sm /= double(n), ym /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (s[i] - sm) * (s[i] - sm);
    sxy += (s[i] - sm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  if (sxx == 0.0) throw DomainError("scaling_fit: epsilons must not all coincide");
  RegressionFit f;
  f.n = n;
  f.a = sxy / sxx;
  f.b = ym - f.a * sm;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.a * s[i] - f.b;
    ssr += e * e;
  }
  f.r = syy > 0.0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 1.0;
  f.sigma_a = std::sqrt(std::max(0.0, ssr) / double(n - 2) / sxx);
  return f;
}

double oscillation_period(const std::vector<double>& x, const std::vector<double>& signal) {
  std::vector<double> crossings;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = signal[i - 1], b = signal[i];
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
      crossings.push_back(x[i - 1] + (x[i] - x[i - 1]) * a / (a - b));
    }
  }
  if (crossings.size() < 3) return 0.0;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < crossings.size(); ++i) gaps.push_back(crossings[i] - crossings[i - 1]);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return 2.0 * gaps[gaps.size() / 2];
}

std::vector<double> moving_max(const std::vector<double>& x, const std::vector<double>& v, double width) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  std::deque<std::size_t> q;  // indices with decreasing |v|
  std::size_t hi = 0, lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (hi < n && x[hi] <= x[i] + width / 2.0) {
      const double a = std::abs(v[hi]);
      while (!q.empty() && std::abs(v[q.back()]) <= a) q.pop_back();
      q.push_back(hi++);
    }
    while (lo < n && x[lo] < x[i] - width / 2.0) ++lo;
    while (!q.empty() && q.front() < lo) q.pop_front();
    out[i] = std::abs(v[q.front()]);
  }
  return out;
}

Interval better_zone(const std::vector<double>& x, const std::vector<double>& delta_multiscale,
                     const std::vector<double>& delta_asymptotic, double center, double smoothing_width) {
  if (x.size() != delta_multiscale.size() || x.size() != delta_asymptotic.size() || x.empty()) {
    throw DomainError("better_zone: arrays not aligned");
  }
  const double w = smoothing_width > 0.0 ? smoothing_width : oscillation_period(x, delta_asymptotic);
  const auto m = moving_max(x, delta_multiscale, w);
  const auto a = moving_max(x, delta_asymptotic, w);
  const auto it = std::lower_bound(x.begin(), x.end(), center);
  std::size_t ic = static_cast<std::size_t>(it - x.begin());
  if (ic == x.size()) --ic;
  if (ic > 0 && std::abs(x[ic - 1] - center) < std::abs(x[ic] - center)) --ic;
  if (!(m[ic] < a[ic])) return {};
  std::size_t l = ic, r = ic;
  while (l > 0 && m[l - 1] < a[l - 1]) --l;
  while (r + 1 < x.size() && m[r + 1] < a[r + 1]) ++r;
  return {x[l], x[r]};
}

TimeSpec TimeSpec::parse(const std::string& text) {
  if (text == "tc" || text == "t_c") return {Kind::critical, 0.0};
  if (text == "t-" || text == "t_minus") return {Kind::minus, 0.0};
  if (text == "t+" || text == "t_plus") return {Kind::plus, 0.0};
  return {Kind::absolute, parse_double(text, "time")};
}

double TimeSpec::resolve(const BreakupPoint& bp, double epsilon) const {
  switch (kind) {
    case Kind::critical: return bp.t_c;
    case Kind::minus: return t_plusminus(bp, epsilon, -1);
    case Kind::plus: return t_plusminus(bp, epsilon, +1);
    default: return value;
  }
}

std::string TimeSpec::label() const {
  switch (kind) {
    case Kind::critical: return "tc";
    case Kind::minus: return "t-";
    case Kind::plus: return "t+";
    default: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", value);
      return buf;
    }
  }
}

void ExperimentConfig::validate() const {
  if (epsilons.empty()) throw DomainError("experiment: empty epsilon list");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw DomainError("experiment: epsilon must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw DomainError("experiment: epsilon list must be strictly decreasing");
  }
  if (times.empty()) throw DomainError("experiment: no evaluation times");
  if (!(alpha > 0.0)) throw DomainError("experiment: alpha must be positive");
  if (half_length < 0.0) throw DomainError("experiment: negative domain half length");
  if (!(gate_tolerance > 0.0)) throw DomainError("experiment: gate tolerance must be positive");
}

std::vector<double> default_epsilons() {
  return {1e-1, std::pow(10.0, -1.25), std::pow(10.0, -1.5), std::pow(10.0, -1.75), 1e-2};
}

ExperimentConfig config_from_key_values(const KeyValues& kv) {
  static const std::set<std::string> known = {
      "initial_data", "data_parameters", "equation",       "epsilons",       "times",       "alpha",
      "half_length",  "resolution_factor", "scheme",       "dealias",        "dt",          "gate",
      "gate_tolerance", "pi2_half_width", "pi2_rel_tol",   "profile_span",   "out_dir"};
  for (const auto& [key, value] : kv.entries())
    if (!known.count(key)) throw DomainError("config: unknown key '" + key + "'");
  ExperimentConfig c;
  c.initial_data = kv.get("initial_data", c.initial_data);
  for (const auto& s : kv.get_list("data_parameters")) c.data_parameters.push_back(parse_double(s, "data_parameters"));
  c.equation = parse_equation(kv.get("equation", "kdv"));
  for (const auto& s : kv.get_list("epsilons")) c.epsilons.push_back(parse_double(s, "epsilons"));
  if (c.epsilons.empty()) c.epsilons = default_epsilons();
  for (const auto& s : kv.get_list("times")) c.times.push_back(TimeSpec::parse(s));
  if (c.times.empty()) c.times.push_back(TimeSpec{});
  c.alpha = kv.get_double("alpha", c.alpha);
  c.half_length = kv.get_double("half_length", c.half_length);
  c.resolution_factor = kv.get_double("resolution_factor", c.resolution_factor);
  c.scheme = parse_scheme(kv.get("scheme", to_string(c.scheme)));
  c.dealias = kv.get_bool("dealias", c.dealias);
  c.dt = kv.get_double("dt", c.dt);
  c.self_convergence_gate = kv.get_bool("gate", c.self_convergence_gate);
  c.gate_tolerance = kv.get_double("gate_tolerance", c.gate_tolerance);
  c.pi2_half_width = kv.get_double("pi2_half_width", c.pi2_half_width);
  c.pi2_rel_tol = kv.get_double("pi2_rel_tol", c.pi2_rel_tol);
  c.profile_span = kv.get_double("profile_span", c.profile_span);
  c.out_dir = kv.get("out_dir", c.out_dir);
  c.validate();
  return c;
}

CellErrors cell_errors(const Cell& cell, const BreakupPoint& bp, double alpha) {
  const Interval w = comparison_window(bp, cell.t, cell.epsilon, alpha);
  CellErrors e;
  e.delta_hopf = linf_window(cell.x, cell.u_num, cell.u_hopf, w);
  e.delta_asymptotic = linf_window(cell.x, cell.u_num, cell.u_asymptotic, w);
  e.delta_multiscale = linf_window(cell.x, cell.u_num, cell.u_multiscale, w);
  std::vector<double> dm(cell.x.size()), da(cell.x.size());
  for (std::size_t i = 0; i < cell.x.size(); ++i) {
    dm[i] = cell.u_num[i] - cell.u_multiscale[i];
    da[i] = cell.u_num[i] - cell.u_asymptotic[i];
    if (!std::isfinite(da[i])) da[i] = 0.0;
  }
  e.zone = better_zone(cell.x, dm, da, window_center(bp, cell.t));
  return e;
}

std::vector<FitRecord> fit_records(const std::vector<Cell>& cells, const BreakupPoint& bp, double alpha) {
  std::vector<std::string> labels;
  for (const auto& c : cells)
    if (std::find(labels.begin(), labels.end(), c.label) == labels.end()) labels.push_back(c.label);
  std::vector<FitRecord> out;
  for (const auto& label : labels) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
    for (const auto& c : cells) {
      if (c.label != label) continue;
      const CellErrors e = cell_errors(c, bp, alpha);
      auto add = [&](const std::string& k, double v) {
        if (v > 0.0 && std::isfinite(v)) {
          series[k].first.push_back(c.epsilon);
          series[k].second.push_back(v);
        }
      };
      add("hopf", e.delta_hopf);
      add("asymptotic", e.delta_asymptotic);
      add("multiscale", e.delta_multiscale);
      add("zone-width", e.zone.width());
    }
    for (const auto& [kind, data] : series) {
      if (data.first.size() < 3) continue;
      out.push_back({kind, label, alpha, scaling_fit(data.first, data.second)});
    }
  }
  return out;
}

const Cell& ExperimentReport::cell(double epsilon, const std::string& label) const {
  for (const auto& c : cells)
    if (c.label == label && std::abs(c.epsilon - epsilon) <= 1e-12 * epsilon) return c;
  throw DomainError("no cell for epsilon/time " + label);
}

const FitRecord& ExperimentReport::fit(const std::string& experiment, const std::string& time) const {
  for (const auto& f : fits)
    if (f.experiment == experiment && f.time == time) return f;
  throw DomainError("no fit " + experiment + " at " + time);
}

namespace {

double hopf_single_valued(const InitialData& data, double x, double t) {
  try {
    return hopf_evaluate(data, x, t);
  } catch (const MultivaluedError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport rep;
  rep.config = config;
  const InitialData data = make_initial_data(config.initial_data, config.data_parameters);
  rep.bp = breakup_point(data);
  const BreakupPoint& bp = rep.bp;
  const double L = config.half_length > 0.0 ? config.half_length : 5.0 * std::numbers::pi;
  Pi2Cache cache(config.pi2_half_width, config.pi2_rel_tol);
  std::map<double, std::unique_ptr<AsymptoticSolution>> asymptotics;

  for (double eps : config.epsilons) {
    std::vector<double> times;
    for (const auto& ts : config.times) times.push_back(ts.resolve(bp, eps));
    std::vector<double> snaps(times.begin(), times.end());
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

    SolverParams p;
    p.epsilon = eps;
    p.t_end = snaps.back();
    p.dt = config.dt;
    p.dealias = config.dealias;
    p.scheme = config.scheme;
    p.resolution_factor = config.resolution_factor;
    const std::size_t n = required_points(2.0 * L, eps, config.resolution_factor);
    auto solve = [&](std::size_t points) {
      const GridFunction u0 = GridFunction::sample(-L, L, points, [&](double x) { return data.u0(x); });
      return config.equation == Equation::kdv ? kdv_run(u0, p, snaps) : ch_run(u0, p, snaps);
    };
    const SolveReport base = solve(n);
    std::vector<double> gate(snaps.size(), std::numeric_limits<double>::quiet_NaN());
    double mass = base.mass_drift, energy = base.energy_drift;
    if (config.self_convergence_gate) {
      const SolveReport fine = solve(2 * n);
      for (std::size_t i = 0; i < snaps.size(); ++i) {
        gate[i] = max_abs_difference(base.snapshots[i], fine.snapshots[i]);
        if (!(gate[i] < config.gate_tolerance)) {
          throw GateError("self-convergence gate failed for " + to_string(config.equation) + " eps=" +
                          format_number(eps) + " t=" + format_number(snaps[i]) + ": grid doubling changed the solution by " +
                          format_number(gate[i]));
        }
      }
      mass = std::max(mass, fine.mass_drift);
      energy = std::max(energy, fine.energy_drift);
    }

    const MultiscaleFrame frame = make_frame(bp, eps, config.equation);
    for (std::size_t k = 0; k < config.times.size(); ++k) {
      const double t = times[k];
      const std::size_t si = static_cast<std::size_t>(std::lower_bound(snaps.begin(), snaps.end(), t) - snaps.begin());
      const GridFunction& u = base.snapshots[si];
      Cell cell;
      cell.epsilon = eps;
      cell.t = t;
      cell.label = config.times[k].label();
      cell.n_points = n;
      cell.gate_difference = gate[si];
      cell.mass_drift = mass;
      cell.energy_drift = energy;

      const AsymptoticSolution* asym = nullptr;
      if (config.equation == Equation::kdv && t > bp.t_c) {
        auto& slot = asymptotics[t];
        if (!slot) slot = std::make_unique<AsymptoticSolution>(t, data);
        asym = slot.get();
        if (!asym->zone().empty()) cell.whitham_zone = {asym->zone().x_minus(), asym->zone().x_plus()};
      }
      const double center = window_center(bp, t);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = u.x(i);
        if (std::abs(x - center) > config.profile_span) continue;
        double uh, ua;
        if (asym) {
          uh = asym->ubar(x);
          ua = asym->u(x, eps);
        } else {
          uh = hopf_single_valued(data, x, t);
          ua = uh;
        }
        cell.x.push_back(x);
        cell.u_num.push_back(u[i]);
        cell.u_hopf.push_back(uh);
        cell.u_asymptotic.push_back(ua);
        cell.u_multiscale.push_back(multiscale_u(frame, x, t, cache));
      }
      rep.errors.push_back(cell_errors(cell, bp, config.alpha));
      rep.cells.push_back(std::move(cell));
    }
  }
  rep.fits = fit_records(rep.cells, bp, config.alpha);
  if (!config.out_dir.empty()) write_outputs(rep, config.out_dir);
  return rep;
}

namespace {

nlohmann::json fit_json(const RegressionFit& f) {
  return {{"a", f.a}, {"b", f.b}, {"r", f.r}, {"sigma_a", f.sigma_a}, {"n", f.n}};
}

}  // namespace

void write_outputs(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& c : report.cells) {
    const fs::path path = fs::path(dir) / ("profile_" + format_number(c.epsilon) + "_" + format_number(c.t) + ".csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot write " + path.string());
    std::fprintf(f, "x,u_num,u_hopf,u_asymptotic,u_multiscale\n");
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", c.x[i], c.u_num[i], c.u_hopf[i], c.u_asymptotic[i],
                   c.u_multiscale[i]);
    }
    std::fclose(f);
  }
  {
    const fs::path path = fs::path(dir) / "errors.csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot write " + path.string());
    std::fprintf(f, "epsilon,t,delta_hopf,delta_asymptotic,delta_multiscale,zone_left,zone_right\n");
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
      const auto& c = report.cells[i];
      const auto& e = report.errors[i];
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", c.epsilon, c.t, e.delta_hopf,
                   e.delta_asymptotic, e.delta_multiscale, e.zone.left, e.zone.right);
    }
    std::fclose(f);
  }
  nlohmann::json j;
  const auto& cfg = report.config;
  j["equation"] = to_string(cfg.equation);
  j["initial_data"] = cfg.initial_data;
  j["alpha"] = cfg.alpha;
  j["epsilons"] = cfg.epsilons;
  j["breakup"] = {{"x_c", report.bp.x_c}, {"t_c", report.bp.t_c}, {"u_c", report.bp.u_c}, {"k", report.bp.k}};
  j["cells"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& c = report.cells[i];
    j["cells"].push_back({{"epsilon", c.epsilon},
                          {"t", c.t},
                          {"time", c.label},
                          {"n_points", c.n_points},
                          {"gate_difference", std::isfinite(c.gate_difference) ? nlohmann::json(c.gate_difference) : nlohmann::json()},
                          {"mass_drift", c.mass_drift},
                          {"energy_drift", c.energy_drift}});
  }
  j["fits"] = nlohmann::json::array();
  for (const auto& f : report.fits) {
    auto rec = fit_json(f.fit);
    rec["experiment"] = f.experiment;
    rec["time"] = f.time;
    rec["alpha"] = f.alpha;
    j["fits"].push_back(rec);
  }
  std::ofstream out(fs::path(dir) / "summary.json");
  out << j.dump(2) << '\n';
}

}  // namespace kdvlab
