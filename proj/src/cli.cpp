#include "bl/cli.hpp"

#include "bl/driving.hpp"
#include "bl/faber.hpp"
#include "bl/hierarchy.hpp"
#include "bl/kinetic.hpp"
#include "bl/loewner.hpp"
#include "bl/parallel.hpp"
#include "bl/reduction.hpp"
#include "bl/report.hpp"
#include "bl/series.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace bl::cli {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// --- config helpers ----------------------------------------------------------

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("\"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

int int_or(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError("\"" + key + "\" must be an integer");
  return j.at(key).get<int>();
}

const json& required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

// mean + sum_k cos[k-1] cos(k q x) + sin[k-1] sin(k q x), q = 2 pi / length.
struct Fourier {
  double mean = 0.0;
  std::vector<double> c, s;
  double q = 1.0;

  double operator()(double x) const {
    double v = mean;
    for (std::size_t k = 0; k < c.size(); ++k) v += c[k] * std::cos(static_cast<double>(k + 1) * q * x);
    for (std::size_t k = 0; k < s.size(); ++k) v += s[k] * std::sin(static_cast<double>(k + 1) * q * x);
    return v;
  }
  double derivative(double x) const {
    double v = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) v -= c[k] * static_cast<double>(k + 1) * q * std::sin(static_cast<double>(k + 1) * q * x);
    for (std::size_t k = 0; k < s.size(); ++k) v += s[k] * static_cast<double>(k + 1) * q * std::cos(static_cast<double>(k + 1) * q * x);
    return v;
  }
  std::pair<double, double> range(double length) const {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 4096; ++i) {
      const double v = (*this)(length * i / 4096.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {lo, hi};
  }
};

Fourier fourier(const json& j, double length, const std::string& where) {
  Fourier f;
  f.q = kTwoPi / length;
  if (j.is_number()) {
    f.mean = j.get<double>();
    return f;
  }
  require_keys(j, {"mean", "cos", "sin"}, where);
  f.mean = number_or(j, "mean", 0.0);
  if (j.contains("cos")) f.c = j.at("cos").get<std::vector<double>>();
  if (j.contains("sin")) f.s = j.at("sin").get<std::vector<double>>();
  return f;
}

PeriodicGrid periodic_grid(const json& j, const std::string& where, int default_n = 128) {
  require_keys(j, {"n", "length"}, where);
  PeriodicGrid g{int_or(j, "n", default_n), number_or(j, "length", kTwoPi)};
  if (g.n < 4 || !(g.length > 0.0)) throw ConfigError(where + ": need n >= 4 and length > 0");
  return g;
}

std::vector<double> linspace(const json& j, const std::string& where) {
  require_keys(j, {"lo", "hi", "n"}, where);
  const double lo = number_or(j, "lo", 0.0), hi = number_or(j, "hi", 1.0);
  const int n = int_or(j, "n", 11);
  if (n < 2) throw ConfigError(where + ": need n >= 2");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

Rational rational(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number()) return parse_rational(v.dump());
  throw ConfigError("expected a number or a \"p/q\" string");
}

// --- run context -------------------------------------------------------------

struct Context {
  fs::path dir;
  std::map<std::string, double> tol;
  std::uint64_t seed = 0;
  bool gnuplot = false;
  std::vector<std::string> csv;  // written CSV artifacts, for gnuplot scripts
  json checks = json::array();
  bool breach = false;

  double tolerance(const std::string& name, double fallback) const {
    auto it = tol.find(name);
    return it == tol.end() ? fallback : it->second;
  }
  // Records a residual against the named tolerance.
  void check(const std::string& op, double max, double l2, const json& grid, const std::string& tol_name, double fallback) {
    const double t = tolerance(tol_name, fallback);
    json r = report::residual_json(op, max, l2, grid);
    r["tolerance"] = t;
    r["pass"] = max <= t;
    if (!(max <= t)) breach = true;
    checks.push_back(r);
  }
  void csv_file(const std::string& name) { csv.push_back(name); }
};

json grid_json(const PeriodicGrid& g) { return {{"n", g.n}, {"length", g.length}}; }

// --- commands ----------------------------------------------------------------

json cmd_trace_slit(const json& cfg, Context& ctx) {
  require_keys(cfg, {"driving", "samples", "delta_tip"}, "trace-slit");
  const DrivingSpec spec = DrivingSpec::from_json(required(cfg, "driving", "trace-slit"));
  const int n = int_or(cfg, "samples", 101);
  LoewnerOptions opt;
  opt.delta_tip = number_or(cfg, "delta_tip", opt.delta_tip);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = spec.t_end * i / (n - 1);
  const HullTrace h = trace_hull(spec, t, opt);
  report::write_complex_series(ctx.dir / "tips.csv", h.times, h.tips);
  ctx.csv_file("tips.csv");
  const double err = *std::max_element(h.error_estimate.begin(), h.error_estimate.end());
  return {{"t_end", spec.t_end}, {"tip", {h.tips.back().real(), h.tips.back().imag()}}, {"max_error_estimate", err},
          {"driving", spec.to_json()}};
}

json cmd_evolve_series(const json& cfg, Context& ctx) {
  require_keys(cfg, {"driving", "N", "samples", "flow_check", "h"}, "evolve-series");
  const DrivingSpec spec = DrivingSpec::from_json(required(cfg, "driving", "evolve-series"));
  const int N = int_or(cfg, "N", 6);
  const int n = int_or(cfg, "samples", 11);
  std::vector<double> interior;
  for (int i = 1; i + 1 < n; ++i) interior.push_back(spec.t_end * i / (n - 1));
  const SeriesTrajectory tr = evolve_series(spec, N, spec.t_end, interior);
  std::vector<std::string> header{"t"};
  for (int k = 1; k <= N; ++k) header.push_back("b" + std::to_string(k));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    std::vector<double> r{tr.t[i]};
    r.insert(r.end(), tr.b[i].begin(), tr.b[i].end());
    rows.push_back(std::move(r));
  }
  report::write_csv(ctx.dir / "coefficients.csv", header, rows);
  ctx.csv_file("coefficients.csv");
  json out{{"N", N}, {"final", tr.b.back()}};
  if (!cfg.contains("flow_check") || cfg.at("flow_check").get<bool>()) {
    const auto rep = coefficient_flow_check(spec, N, number_or(cfg, "h", 1e-3));
    ctx.check("coefficient_flow", rep.max_residual, rep.max_residual, {{"N", N}}, "coefficient_flow", 1e-6);
    out["flow"] = {{"residual_by_n", rep.residual_by_n}, {"worst_n", rep.worst_n}, {"worst_t", rep.worst_t}};
  }
  return out;
}

json cmd_split_time(const json& cfg, Context& ctx) {
  require_keys(cfg, {"xi", "t0", "x_grid", "s_grid", "refine"}, "split-time");
  const TimeFunction xi = TimeFunction::from_json(required(cfg, "xi", "split-time"), "split-time.xi");
  const auto x = linspace(required(cfg, "x_grid", "split-time"), "split-time.x_grid");
  const auto s = linspace(required(cfg, "s_grid", "split-time"), "split-time.s_grid");
  const Fourier t0 = fourier(required(cfg, "t0", "split-time"), x.back() - x.front(), "split-time.t0");
  const auto f = time_splitting_solve([&](double t) { return xi(t); }, [&](double q) { return t0(q); }, s, x, int_or(cfg, "refine", 4));
  report::write_time_split(ctx.dir / "field.csv", f);
  ctx.csv_file("field.csv");
  json out{{"points", x.size() * s.size()}};
  out["valid_until"] = std::isfinite(f.valid_until) ? json(f.valid_until) : json("inf");
  if (!std::isnan(f.crossing_x)) out["crossing_x"] = f.crossing_x;
  return out;
}

std::function<cplx(cplx)> shape_function(const std::string& name) {
  if (name == "gaussian") return [](cplx f) { return std::exp(-f * f); };
  if (name == "sech2") return [](cplx f) {
    const cplx c = std::cosh(f);
    return 1.0 / (c * c);
  };
  throw ConfigError("unknown shape \"" + name + "\" (gaussian, sech2)");
}

KineticState kinetic_initial(const json& cfg, const std::string& where) {
  require_keys(cfg, {"grid", "initial", "s_end", "ds", "N", "kernel"}, where);
  const json& gj = required(cfg, "grid", where);
  require_keys(gj, {"nx", "length", "nw", "w_max"}, where + ".grid");
  const PeriodicGrid x{int_or(gj, "nx", 128), number_or(gj, "length", kTwoPi)};
  const int nw = int_or(gj, "nw", 129);
  const json ij = cfg.contains("initial") ? cfg.at("initial") : json::object();
  require_keys(ij, {"shape", "width", "weight", "shift", "loewner"}, where + ".initial");
  const std::string shape_name = ij.value("shape", "gaussian");
  const auto shape = shape_function(shape_name);
  const double width = number_or(ij, "width", 1.0);
  const Fourier weight = fourier(ij.contains("weight") ? ij.at("weight") : json(1.0), x.length, where + ".initial.weight");
  const Fourier shift = fourier(ij.contains("shift") ? ij.at("shift") : json(0.0), x.length, where + ".initial.shift");
  std::optional<DrivingSpec> spec;
  Fourier tmap;
  double edge_offset = 1e-5;
  if (ij.contains("loewner")) {
    const json& lj = ij.at("loewner");
    require_keys(lj, {"driving", "time", "edge_offset"}, where + ".initial.loewner");
    spec = DrivingSpec::from_json(required(lj, "driving", where + ".initial.loewner"));
    tmap = fourier(required(lj, "time", where + ".initial.loewner"), x.length, where + ".initial.loewner.time");
    edge_offset = number_or(lj, "edge_offset", edge_offset);
  }
  double w_max = number_or(gj, "w_max", 0.0);
  if (w_max <= 0.0) {
    const auto [clo, chi] = shift.range(x.length);
    double spread = width * decay_window([&](double w) { return std::abs(shape(cplx(w, 0.0))); }) + std::max(std::abs(clo), std::abs(chi));
    w_max = spread;
  }
  const auto w = uniform_window(w_max, nw);
  std::vector<cplx> f(static_cast<std::size_t>(nw) * static_cast<std::size_t>(x.n));
  parallel_for(x.n, [&](std::ptrdiff_t i) {
    const int ix = static_cast<int>(i);
    const double xx = x.x(ix);
    for (int iw = 0; iw < nw; ++iw) {
      cplx v(w[static_cast<std::size_t>(iw)], 0.0);
      // Boundary values of g(., t(x)) on the real axis. A node sitting on the
      // hull base takes the right-hand limit.
      if (spec) {
        try {
          v = loewner_g(*spec, v, 0.0, tmap(xx)).real();
        } catch (const DomainError&) {
          v = loewner_g(*spec, v + edge_offset, 0.0, tmap(xx)).real();
        }
      }
      f[static_cast<std::size_t>(iw) * static_cast<std::size_t>(x.n) + static_cast<std::size_t>(ix)] = (v - shift(xx)) / width;
    }
  });
  KineticState st = init_from_map(f, w, x, shape);
  for (int iw = 0; iw < st.nw(); ++iw)
    for (int ix = 0; ix < st.nx(); ++ix) st.at(iw, ix) *= weight(x.x(ix));
  return st;
}

json relative_drift(const std::vector<std::vector<double>>& integrals, int n_max) {
  json out = json::array();
  const auto& first = integrals.front();
  const double scale = std::max(std::abs(first[0]), 1e-300);
  for (int n = 0; n <= n_max && n < static_cast<int>(first.size()); ++n) {
    double worst = 0.0;
    for (const auto& row : integrals) worst = std::max(worst, std::abs(row[static_cast<std::size_t>(n)] - first[static_cast<std::size_t>(n)]));
    out.push_back(worst / std::max(std::abs(first[static_cast<std::size_t>(n)]), scale));
  }
  return out;
}

}  // namespace

KineticVerdict pipeline_kinetic_verify(const json& cfg, const std::map<std::string, double>& tolerances, const fs::path& dir) {
  KineticState st = kinetic_initial(cfg, "evolve-kinetic");
  const double s_end = number_or(cfg, "s_end", 0.5);
  const int N = int_or(cfg, "N", 4);
  StepOptions opt;
  const std::string kernel = cfg.value("kernel", "parallel");
  if (kernel == "serial") opt.mode = KernelMode::serial;
  else if (kernel != "parallel") throw ConfigError("evolve-kinetic: kernel must be serial or parallel");
  double ds = number_or(cfg, "ds", 0.0);
  if (ds <= 0.0) ds = default_step(st);
  const long steps = std::max(1L, static_cast<long>(std::ceil(s_end / ds - 1e-9)));
  ds = s_end / static_cast<double>(steps);

  const double mass0 = mass(st);
  std::vector<MomentField> history{moments(st, N + 1)};
  for (long k = 0; k < steps; ++k) {
    st = step(st, ds, opt);
    history.push_back(moments(st, N + 1));
  }
  const BenneyResidual br = benney_residual(history);
  std::vector<std::vector<double>> integrals;
  for (const auto& h : history) integrals.push_back(conserved_integrals(h));
  const json drift = relative_drift(integrals, std::min(N, 2));
  double drift_max = 0.0;
  for (const auto& d : drift) drift_max = std::max(drift_max, d.get<double>());
  bool decay_ok = true;
  for (const auto& h : history) decay_ok = decay_ok && h.decay_ok;

  auto tol = [&](const std::string& k, double d) {
    auto it = tolerances.find(k);
    return it == tolerances.end() ? d : it->second;
  };
  KineticVerdict v;
  const double tb = tol("benney", 1e-3), td = tol("drift", 1e-4);
  v.pass = br.max <= tb && drift_max <= td;
  v.report = {{"steps", steps},
              {"initial_mass", mass0},
              {"ds", ds},
              {"grid", {{"nx", st.nx()}, {"nw", st.nw()}, {"w_max", st.w_grid.back()}, {"length", st.x.length}}},
              {"benney", report::residual_json("benney_residual", br.max, br.l2, {{"nx", st.nx()}, {"nw", st.nw()}})},
              {"conserved_drift", drift},
              {"mass_drift", std::abs(mass(st) - mass0) / std::max(mass0, 1e-300)},
              {"decay_ok", decay_ok},
              {"tolerances", {{"benney", tb}, {"drift", td}}},
              {"verdict", v.pass ? "pass" : "fail"}};
  if (!dir.empty()) {
    report::write_moment_history(dir / "moments.csv", history, {{"convention", "physical"}, {"source", "kinetic"}});
    report::write_checkpoint(dir / "checkpoint.csv", st);
    report::write_json(dir / "verdict.json", v.report);
  }
  return v;
}

namespace {

json cmd_evolve_kinetic(const json& cfg, Context& ctx) {
  const auto v = pipeline_kinetic_verify(cfg, ctx.tol, ctx.dir);
  ctx.csv_file("moments.csv");
  const auto& b = v.report.at("benney");
  ctx.check("benney_residual", b.at("max").get<double>(), b.at("l2").get<double>(), v.report.at("grid"), "benney", 1e-3);
  double dm = 0.0;
  for (const auto& d : v.report.at("conserved_drift")) dm = std::max(dm, d.get<double>());
  ctx.check("conserved_drift", dm, dm, v.report.at("grid"), "drift", 1e-4);
  return v.report;
}

json cmd_evolve_chain(const json& cfg, Context& ctx) {
  require_keys(cfg, {"grid", "N", "closure", "initial", "s_end", "ds", "record_every", "kinetic"}, "evolve-chain");
  const std::string closure_name = cfg.value("closure", "cold_plasma");
  const int N = int_or(cfg, "N", 4);
  const double s_end = number_or(cfg, "s_end", 0.5);
  double ds = number_or(cfg, "ds", 1e-3);
  const int record_every = int_or(cfg, "record_every", 10);
  if (closure_name != "cold_plasma" && closure_name != "n1_reduction" && closure_name != "kinetic_feed")
    throw ConfigError("evolve-chain: unknown closure \"" + closure_name + "\" (cold_plasma, n1_reduction, kinetic_feed)");
  json out{{"closure", closure_name}, {"N", N}};

  MomentField init;
  Closure closure;
  std::optional<ShallowWater> sw0;
  std::vector<MomentField> kinetic_history;
  if (closure_name == "kinetic_feed") {
    const json& kj = required(cfg, "kinetic", "evolve-chain");
    KineticState st = kinetic_initial(kj, "evolve-chain.kinetic");
    const long steps = std::max(1L, static_cast<long>(std::ceil(s_end / ds - 1e-9)));
    ds = s_end / static_cast<double>(steps);
    kinetic_history.push_back(moments(st, N + 1));
    for (long k = 0; k < steps; ++k) {
      st = step(st, ds);
      kinetic_history.push_back(moments(st, N + 1));
    }
    init = kinetic_history.front();
    init.N = N;
    init.A.resize(static_cast<std::size_t>(N) + 1);
    closure = kinetic_feed_closure(kinetic_history);
  } else {
    const PeriodicGrid g = periodic_grid(required(cfg, "grid", "evolve-chain"), "evolve-chain.grid", 256);
    const json& ij = required(cfg, "initial", "evolve-chain");
    init.grid = g;
    init.N = N;
    init.A.assign(static_cast<std::size_t>(N) + 1, std::vector<double>(static_cast<std::size_t>(g.n)));
    if (closure_name == "cold_plasma") {
      require_keys(ij, {"eta", "v"}, "evolve-chain.initial");
      const Fourier eta = fourier(required(ij, "eta", "evolve-chain.initial"), g.length, "evolve-chain.initial.eta");
      const Fourier v = fourier(required(ij, "v", "evolve-chain.initial"), g.length, "evolve-chain.initial.v");
      ShallowWater s0;
      for (int i = 0; i < g.n; ++i) {
        s0.eta.push_back(eta(g.x(i)));
        s0.v.push_back(v(g.x(i)));
        for (int n = 0; n <= N; ++n) init.A[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = s0.eta.back() * std::pow(s0.v.back(), n);
      }
      sw0 = s0;
      closure = cold_plasma_closure();
    } else {
      require_keys(ij, {"r"}, "evolve-chain.initial");
      const Fourier r = fourier(required(ij, "r", "evolve-chain.initial"), g.length, "evolve-chain.initial.r");
      const auto a = n1_moments(Poly::var(0), Poly::var(0), N + 2);
      std::vector<std::function<double(double)>> a_of_r;
      for (const auto& p : a) a_of_r.push_back([p](double q) { return evaluate_as<double>(p, {q}); });
      for (int i = 0; i < g.n; ++i)
        for (int n = 0; n <= N; ++n) init.A[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = a_of_r[static_cast<std::size_t>(n)](r(g.x(i)));
      const auto [lo, hi] = r.range(g.length);
      closure = n1_closure(a_of_r, lo - 1.0, hi + 1.0);
    }
  }
  const ChainHistory hist = evolve_chain(init, closure, s_end, ds, record_every, closure_name);
  const HierarchyTimes times;
  json meta = times.metadata();
  meta["closure"] = closure_name;
  meta["ds"] = ds;
  report::write_moment_history(ctx.dir / "history.csv", hist.slices, meta);
  ctx.csv_file("history.csv");
  out["halted"] = hist.halted;
  if (hist.halted) out["diagnostic"] = hist.diagnostic;
  std::vector<std::vector<double>> integrals;
  for (const auto& f : hist.slices) integrals.push_back(conserved_integrals(f));
  const json drift = relative_drift(integrals, std::min(N, 2));
  out["conserved_drift"] = drift;
  const auto& last = hist.slices.back();
  if (sw0 && !hist.halted) {
    const auto ref = shallow_water_reference(last.grid, *sw0, last.s, OdeOptions{});
    double d = 0.0;
    for (int i = 0; i < last.grid.n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      d = std::max(d, std::abs(last.A[0][ui] - ref.eta[ui]));
      if (N >= 1) d = std::max(d, std::abs(last.A[1][ui] - ref.eta[ui] * ref.v[ui]));
    }
    ctx.check("shallow_water_reference", d, d, grid_json(last.grid), "reference", 1e-6);
  }
  if (!kinetic_history.empty() && !hist.halted) {
    const auto& kin = kinetic_history.back();
    double d = 0.0;
    for (int n = 0; n <= N; ++n)
      for (int i = 0; i < kin.grid.n; ++i)
        d = std::max(d, std::abs(last.A[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] - kin.A[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)]));
    ctx.check("kinetic_moments", d, d, grid_json(kin.grid), "kinetic", 1e-3);
  }
  if (hist.halted) ctx.breach = true;
  return out;
}

json cmd_invert_series(const json& cfg, Context& ctx) {
  require_keys(cfg, {"coeffs"}, "invert-series");
  std::vector<Rational> a;
  for (const auto& v : required(cfg, "coeffs", "invert-series")) a.push_back(rational(v));
  if (a.empty()) throw ConfigError("invert-series: empty coeffs");
  const AsymptoticSeries<Rational> s(a);
  const auto inv = invert(s);
  json h = json::array();
  for (const auto& c : inv.coeffs) h.push_back(to_string(Rational(-c)));
  json out{{"input", report::series_json(s)}, {"inverse", report::series_json(inv)}, {"h", h}};
  report::write_json(ctx.dir / "inverse.json", out);
  return out;
}

json cmd_faber(const json& cfg, Context& ctx) {
  require_keys(cfg, {"b", "n_max", "xi"}, "faber");
  std::vector<Rational> b;
  for (const auto& v : required(cfg, "b", "faber")) b.push_back(rational(v));
  const int n_max = int_or(cfg, "n_max", static_cast<int>(b.size()));
  if (static_cast<int>(b.size()) < n_max) b.resize(static_cast<std::size_t>(n_max), Rational(0));
  const auto phi = faber_all(b, n_max);
  json polys = json::array();
  for (const auto& p : phi) polys.push_back(report::faber_json(p));
  json out{{"polynomials", polys}};
  if (cfg.contains("xi")) {
    const double xi = number_or(cfg, "xi", 0.0);
    std::vector<double> bd;
    for (const auto& v : b) bd.push_back(v.convert_to<double>());
    const auto via_log = faber_via_log(map_from_b(bd), xi, n_max);
    const auto phi_d = faber_all(bd, n_max);
    json rows = json::array();
    double worst = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      const double r = evaluate(phi_d[static_cast<std::size_t>(n)], xi);
      const double l = via_log[static_cast<std::size_t>(n)];
      worst = std::max(worst, std::abs(r - l));
      rows.push_back({{"n", n}, {"recurrence", r}, {"log", l}});
    }
    out["values"] = rows;
    ctx.check("faber_dual", worst, worst, {{"n_max", n_max}}, "faber", 1e-10);
  }
  report::write_json(ctx.dir / "faber.json", out);
  return out;
}

json cmd_check_gt(const json& cfg, Context& ctx) {
  require_keys(cfg, {"fixture"}, "check-gt");
  SampledReduction s = fixture_from_json(required(cfg, "fixture", "check-gt"));
  attach_lambda(s, [](double m, double u) { return m * m + u; });
  const GtResidual gt = gt_residual(s);
  const ResidualReport ts = tsarev_check(s);
  const json grid{{"lo", s.grid.lo}, {"hi", s.grid.hi}, {"n", s.grid.n}};
  ctx.check("gt_first", gt.first.max, gt.first.l2, grid, "gt", 1e-3);
  ctx.check("gt_second", gt.second.max, gt.second.l2, grid, "gt", 1e-3);
  ctx.check("tsarev", ts.max, ts.l2, grid, "gt", 1e-3);
  return {{"N", s.grid.dim()}};
}

struct N1Setup {
  N1Model model;
  N1Profile profile;
  PeriodicGrid x;
  double s, y, h;
  double r_lo, r_hi;
};

N1Setup n1_setup(const json& cfg, const std::string& where) {
  N1Setup u;
  u.x = periodic_grid(cfg.contains("grid") ? cfg.at("grid") : json::object(), where + ".grid", 128);
  const Fourier r0 = fourier(cfg.contains("profile") ? cfg.at("profile") : json{{"mean", 1.0}, {"sin", {0.2}}}, u.x.length, where + ".profile");
  u.model = n1_identity_model();
  u.profile.kind = N1Profile::Kind::forward;
  u.profile.f = r0;
  u.profile.df = [r0](double q) { return r0.derivative(q); };
  std::tie(u.r_lo, u.r_hi) = r0.range(u.x.length);
  u.profile.r_lo = u.r_lo - 1e-6;
  u.profile.r_hi = u.r_hi + 1e-6;
  u.profile.period = u.x.length;
  u.s = number_or(cfg, "s", 0.5);
  u.y = number_or(cfg, "y", 0.2);
  u.h = number_or(cfg, "h", 0.01);
  return u;
}

cplx complex_of(const json& cfg, const std::string& key, cplx fallback) {
  if (!cfg.contains(key)) return fallback;
  const auto v = cfg.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw ConfigError("\"" + key + "\" must be [re, im]");
  return {v[0], v[1]};
}

json cmd_check_dkp(const json& cfg, Context& ctx) {
  require_keys(cfg, {"profile", "grid", "s", "y", "h", "z_ref", "r_ref"}, "check-dkp");
  const N1Setup u = n1_setup(cfg, "check-dkp");
  const auto F = n1_fields(u.model, u.profile, u.x, u.s - u.h, u.h, 3, u.y - u.h, u.h, 3);
  const double r_ref = number_or(cfg, "r_ref", 0.5 * (u.r_lo + u.r_hi));
  const N1Potential Z(u.model, complex_of(cfg, "z_ref", {1.0, 2.0}), r_ref, u.r_lo - 0.05, u.r_hi + 0.05);
  const auto z = lift(Z, F.r);
  const auto gen = conservation_pair_residual(F.u, F.v, z);
  const auto dkp = dkp_residual(F.u, F.v);
  const auto zk = zk_residual(F.u);
  const json grid{{"x", grid_json(u.x)}, {"h", u.h}, {"s", u.s}, {"y", u.y}};
  ctx.check("conservation_s", gen.first.max, gen.first.l2, grid, "dkp", 1e-3);
  ctx.check("conservation_y", gen.second.max, gen.second.l2, grid, "dkp", 1e-3);
  ctx.check("dkp_first", dkp.first.max, dkp.first.l2, grid, "dkp", 1e-3);
  ctx.check("dkp_second", dkp.second.max, dkp.second.l2, grid, "dkp", 1e-3);
  ctx.check("zk", zk.max, zk.l2, grid, "dkp", 1e-3);
  return {{"model", "mu = u = r"}};
}

json cmd_check_mdkp(const json& cfg, Context& ctx) {
  require_keys(cfg, {"profile", "grid", "r_minus", "s", "y", "h", "chain"}, "check-mdkp");
  N1Setup u = n1_setup(cfg, "check-mdkp");
  const double c = number_or(cfg, "r_minus", -1.0);
  // Simple wave of the cold-plasma reduction: r^- = c fixed, r^+ = r.
  u.model = {[c](double r) { return 0.5 * (r + c) + 0.25 * (r - c); }, [](double) { return 0.75; },
             [c](double r) { return (r - c) * (r - c) / 16.0; }, [c](double r) { return (r - c) / 8.0; }};
  const auto F = n1_fields(u.model, u.profile, u.x, u.s - u.h, u.h, 3, u.y - u.h, u.h, 3);
  Field3<cplx> hm1{F.r.x, F.r.s0, F.r.ds, F.r.ns, F.r.y0, F.r.dy, F.r.ny, {}};
  Field3<cplx> h0 = hm1;
  for (double r : F.r.data) {
    const double eta = (r - c) * (r - c) / 16.0;
    hm1.data.push_back(cold_plasma_hm1(eta, 0.5 * (r + c)));
    h0.data.push_back(eta);
  }
  const auto md = mdkp_residual(hm1, h0);
  const json grid{{"x", grid_json(u.x)}, {"h", u.h}, {"s", u.s}, {"y", u.y}};
  ctx.check("mdkp_first", md.first.max, md.first.l2, grid, "mdkp", 1e-3);
  ctx.check("mdkp_second", md.second.max, md.second.l2, grid, "mdkp", 1e-3);

  const json cj = cfg.contains("chain") ? cfg.at("chain") : json::object();
  require_keys(cj, {"eta", "v", "s", "ds", "K"}, "check-mdkp.chain");
  const Fourier eta = fourier(cj.contains("eta") ? cj.at("eta") : json{{"mean", 1.0}, {"cos", {0.2}}}, u.x.length, "check-mdkp.chain.eta");
  const Fourier vel = fourier(cj.contains("v") ? cj.at("v") : json{{"sin", {0.1}}}, u.x.length, "check-mdkp.chain.v");
  const double sc = number_or(cj, "s", 0.2), dsc = number_or(cj, "ds", 0.01);
  const int K = int_or(cj, "K", 4);
  const auto table = substitution_table(K);
  ShallowWater sw0;
  for (int i = 0; i < u.x.n; ++i) {
    sw0.eta.push_back(eta(u.x.x(i)));
    sw0.v.push_back(vel(u.x.x(i)));
  }
  std::vector<ModifiedMomentField> hist;
  double round_trip = 0.0;
  for (int k = -1; k <= 1; ++k) {
    const double s = sc + k * dsc;
    const auto sw = shallow_water_reference(u.x, sw0, s, OdeOptions{});
    MomentField mf;
    mf.grid = u.x;
    mf.N = K - 1;
    mf.s = s;
    mf.A.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(u.x.n)));
    for (int i = 0; i < u.x.n; ++i)
      for (int n = 0; n < K; ++n) mf.A[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = sw.eta[static_cast<std::size_t>(i)] * std::pow(sw.v[static_cast<std::size_t>(i)], n);
    std::vector<std::vector<cplx>> h(1);
    for (int i = 0; i < u.x.n; ++i) h[0].push_back(cold_plasma_hm1(sw.eta[static_cast<std::size_t>(i)], sw.v[static_cast<std::size_t>(i)]));
    for (const auto& row : mf.h_rows()) h.emplace_back(row.begin(), row.end());
    hist.push_back(to_modified(u.x, h, s, table));
    const auto back = shadow_h(hist.back(), table);
    for (std::size_t j = 0; j < std::min(back.size(), h.size()); ++j)
      for (std::size_t i = 0; i < back[j].size(); ++i) round_trip = std::max(round_trip, std::abs(back[j][i] - h[j][i]));
  }
  const auto cr = modified_chain_residual(hist);
  ctx.check("modified_chain", cr.max, cr.l2, {{"x", grid_json(u.x)}, {"ds", dsc}, {"K", K}}, "mdkp", 1e-3);
  return {{"substitution_round_trip", round_trip}, {"chain_max_by_row", cr.max_by_row}};
}

std::vector<double> random_profile(std::mt19937_64& rng, const PeriodicGrid& g, double mean, double amp, int modes) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(modes)), s(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    c[static_cast<std::size_t>(k)] = amp * U(rng) / (k + 1);
    s[static_cast<std::size_t>(k)] = amp * U(rng) / (k + 1);
  }
  std::vector<double> out(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) {
    double v = mean;
    for (int k = 0; k < modes; ++k) {
      const double a = (k + 1) * kTwoPi / g.length * g.x(i);
      v += c[static_cast<std::size_t>(k)] * std::cos(a) + s[static_cast<std::size_t>(k)] * std::sin(a);
    }
    out[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

json cmd_bracket_check(const json& cfg, Context& ctx) {
  require_keys(cfg, {"grid", "N", "modes", "amplitude"}, "bracket-check");
  const PeriodicGrid g = periodic_grid(cfg.contains("grid") ? cfg.at("grid") : json::object(), "bracket-check.grid", 128);
  const int N = int_or(cfg, "N", 5);
  if (N < 3) throw ConfigError("bracket-check: N must be >= 3");
  const int modes = int_or(cfg, "modes", 4);
  const double amp = number_or(cfg, "amplitude", 0.2);
  std::mt19937_64 rng(ctx.seed);
  MomentField f;
  f.grid = g;
  f.N = N;
  for (int n = 0; n <= N; ++n) f.A.push_back(random_profile(rng, g, n == 0 ? 1.0 : 0.0, amp, modes));
  double skew = 0.0;
  for (int m = 0; m <= N + 1; ++m)
    for (int n = 0; m + n - 1 <= N; ++n) {
      const auto a = random_profile(rng, g, 0.0, 1.0, modes), b = random_profile(rng, g, 0.0, 1.0, modes);
      skew = std::max(skew, std::abs(km_skew_residual(f, m, n, a, b)));
    }
  const double ham = hamiltonian_flow_check(f);
  const double comm = commutation_check(f, 2, 3);
  const json grid = grid_json(g);
  ctx.check("km_skew", skew, skew, grid, "bracket", 1e-9);
  ctx.check("hamiltonian_flow", ham, ham, grid, "bracket", 1e-9);
  ctx.check("commutation_2_3", comm, comm, grid, "bracket", 1e-9);
  return {{"N", N}, {"hamiltonian", hamiltonian_metadata()}};
}

json cmd_vertex_check(const json& cfg, Context& ctx) {
  require_keys(cfg, {"profile", "grid", "s", "y", "h", "z_ref", "hm1_ref", "r_ref"}, "vertex-check");
  const N1Setup u = n1_setup(cfg, "vertex-check");
  const auto F = n1_fields(u.model, u.profile, u.x, u.s - u.h, u.h, 3, u.y - u.h, u.h, 3);
  const double r_ref = number_or(cfg, "r_ref", 0.5 * (u.r_lo + u.r_hi));
  const double lo = u.r_lo - 0.05, hi = u.r_hi + 0.05;
  const N1Potential Z(u.model, complex_of(cfg, "z_ref", {1.0, 2.0}), r_ref, lo, hi);
  const N1Potential H(u.model, complex_of(cfg, "hm1_ref", {1.0, 0.5}), r_ref, lo, hi);
  const auto z = lift(Z, F.r), hm1 = lift(H, F.r);
  const json grid{{"x", grid_json(u.x)}, {"h", u.h}, {"s", u.s}, {"y", u.y}};
  for (int n = 0; n <= 2; ++n) {
    const auto r = vertex_flows(F.u, F.v, z, n);
    ctx.check("vertex_t" + std::to_string(n), r.max, r.l2, grid, "vertex", 1e-3);
  }
  const auto hflow = vertex_flows(F.u, F.v, hm1, 1);
  ctx.check("hm1_flow", hflow.max, hflow.l2, grid, "vertex", 1e-3);
  Field3<cplx> zt = z;
  for (std::size_t k = 0; k < zt.data.size(); ++k) zt.data[k] -= hm1.data[k];
  const auto mc = modified_conservation_residual(zt, hm1);
  ctx.check("modified_conservation", mc.max, mc.l2, grid, "vertex", 1e-3);
  const auto ml = modified_loewner_check(u.model, Z, H, u.r_lo, u.r_hi, 201);
  ctx.check("modified_loewner", ml.max, ml.l2, {{"r_lo", u.r_lo}, {"r_hi", u.r_hi}, {"n", 201}}, "vertex", 1e-2);
  const auto w = commuting_reduction_velocity(ReductionState{1, "n1", {[](const RPoint& r) { return r[0]; }}, [](const RPoint& r) { return r[0]; }, {}, {}, {}},
                                              {r_ref}, Z(r_ref));
  return {{"commuting_velocity_at_ref", {w[0].real(), w[0].imag()}}};
}

// --- dispatch ----------------------------------------------------------------

using Command = json (*)(const json&, Context&);

const std::map<std::string, Command>& table() {
  static const std::map<std::string, Command> t{
      {"trace-slit", cmd_trace_slit},       {"evolve-series", cmd_evolve_series}, {"split-time", cmd_split_time},
      {"evolve-kinetic", cmd_evolve_kinetic}, {"evolve-chain", cmd_evolve_chain},   {"invert-series", cmd_invert_series},
      {"faber", cmd_faber},                 {"check-gt", cmd_check_gt},           {"check-dkp", cmd_check_dkp},
      {"check-mdkp", cmd_check_mdkp},       {"bracket-check", cmd_bracket_check}, {"vertex-check", cmd_vertex_check}};
  return t;
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first quoted token of `message` in the config text, else 1.
int line_for_message(const std::string& text, const std::string& message) {
  const auto a = message.find('"');
  if (a == std::string::npos) return 1;
  const auto b = message.find('"', a + 1);
  if (b == std::string::npos) return 1;
  const auto pos = text.find(message.substr(a, b - a + 1));
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

fs::path make_run_dir(const fs::path& out, const std::string& command) {
  fs::create_directories(out);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  const std::string base = command + "-" + stamp.str();
  for (int k = 0;; ++k) {
    const fs::path p = out / (k == 0 ? base : base + "-" + std::to_string(k));
    if (fs::create_directory(p)) return p;
  }
}

void write_gnuplot(const Context& ctx) {
  for (const auto& name : ctx.csv) {
    std::ifstream in(ctx.dir / name);
    std::string header;
    std::getline(in, header);
    const auto cols = 1 + std::count(header.begin(), header.end(), ',');
    std::ostringstream gp;
    gp << "set datafile separator ','\nset key autotitle columnhead\n";
    gp << "plot for [c=2:" << cols << "] '" << name << "' using 1:c with lines\n";
    gp << "pause mouse close\n";
    report::write_text(ctx.dir / (fs::path(name).stem().string() + ".gp"), gp.str());
  }
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, f] : table()) v.push_back(k);
    return v;
  }();
  return names;
}

RunOutcome run(const RunConfig& rc) {
  apply_thread_cap();
  RunOutcome out;
  const auto it = table().find(rc.command);
  if (it == table().end()) return {1, {}, "unknown command " + rc.command};
  std::ifstream in(rc.input);
  if (!in) return {1, {}, "cannot read config " + rc.input.string()};
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string src = rc.input.string();
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    return {1, {}, src + ":" + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what()};
  }
  if (!cfg.is_object()) return {1, {}, src + ":1: config must be a JSON object"};

  Context ctx;
  ctx.tol = rc.tolerances;
  ctx.seed = rc.seed;
  ctx.gnuplot = rc.emit_gnuplot;
  try {
    ctx.dir = make_run_dir(rc.output_dir, rc.command);
  } catch (const std::exception& e) {
    return {1, {}, std::string("cannot create output directory: ") + e.what()};
  }
  out.artifact_dir = ctx.dir;
  try {
    json result = it->second(cfg, ctx);
    json rep{{"command", rc.command}, {"seed", rc.seed}, {"result", result}, {"checks", ctx.checks}};
    rep["verdict"] = ctx.breach ? "tolerance_exceeded" : "ok";
    report::write_json(ctx.dir / "report.json", rep);
    report::write_json(ctx.dir / "run.json", {{"command", rc.command}, {"config", cfg}, {"seed", rc.seed}, {"tolerances", rc.tolerances}});
    if (ctx.gnuplot) write_gnuplot(ctx);
    if (ctx.breach) {
      out.exit_code = 2;
      out.message = "tolerance exceeded; residual report: " + (ctx.dir / "report.json").string();
    } else {
      out.message = "artifacts in " + ctx.dir.string();
    }
  } catch (const ConfigError& e) {
    fs::remove_all(ctx.dir);
    return {1, {}, src + ":" + std::to_string(line_for_message(text, e.what())) + ": " + e.what()};
  } catch (const json::exception& e) {
    fs::remove_all(ctx.dir);
    return {1, {}, src + ":" + std::to_string(line_for_message(text, e.what())) + ": " + e.what()};
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.message = std::string("error: ") + e.what();
    report::write_json(ctx.dir / "error.json", {{"command", rc.command}, {"error", e.what()}});
  }
  return out;
}

int main(int argc, char** argv) {
  CLI::App app{"Loewner evolution, Benney moment chains and dKP reductions"};
  RunConfig rc;
  std::vector<std::string> tols;
  app.add_option("command", rc.command, "command to run")->required()->check(CLI::IsMember(commands()));
  app.add_option("--config", rc.input, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", rc.output_dir, "output root directory")->required();
  app.add_option("--seed", rc.seed, "seed for randomized fixtures");
  app.add_option("--tol", tols, "tolerance override name=value (repeatable)");
  app.add_flag("--emit-gnuplot", rc.emit_gnuplot, "write gnuplot scripts next to CSV artifacts");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (const auto& t : tols) {
    const auto eq = t.find('=');
    try {
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument(t);
      std::size_t used = 0;
      const double v = std::stod(t.substr(eq + 1), &used);
      if (used != t.size() - eq - 1) throw std::invalid_argument(t);
      rc.tolerances[t.substr(0, eq)] = v;
    } catch (const std::exception&) {
      std::cerr << "--tol expects name=value, got '" << t << "'\n";
      return 1;
    }
  }
  const RunOutcome o = run(rc);
  (o.exit_code == 0 ? std::cout : std::cerr) << o.message << "\n";
  return o.exit_code;
}

}  // namespace bl::cli
