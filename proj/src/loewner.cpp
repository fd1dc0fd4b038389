#include "bl/loewner.hpp"

#include "bl/faber.hpp"
#include "bl/parallel.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bl {

namespace {

using State = std::vector<cplx>;

double min_distance(const DrivingSpec& spec, double t, cplx g) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& br : spec.branches) d = std::min(d, std::abs(g - br.xi(t)));
  return d;
}

State field(const DrivingSpec& spec, double t, const State& y) {
  const double rate = spec.hcap.derivative(t);
  cplx sum = 0.0;
  for (const auto& br : spec.branches) sum += br.weight(t) / (y[0] - br.xi(t));
  return {rate * sum};
}

// Integrates the Loewner ODE for one point from `from` to `to`, restarting at
// driving breakpoints. Forward runs halt on swallow; backward runs never do.
OdeResult<State> flow(const DrivingSpec& spec, cplx w, double from, double to, const LoewnerOptions& opt, bool detect_swallow) {
  auto rhs = [&](double t, const State& y) { return field(spec, t, y); };
  auto clamp = [&](double t, const State& y) {
    const double rate = std::abs(spec.hcap.derivative(t));
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    const double d = min_distance(spec, t, y[0]);
    return opt.eta * d * d / rate;
  };
  auto swallow = [&](double t, const State& y) { return detect_swallow && min_distance(spec, t, y[0]) < opt.eps_swallow; };

  OdeResult<State> res;
  res.y = {w};
  res.t = from;
  const auto stops = spec.breakpoints(from, to);
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    auto part = integrate_dp45(rhs, res.y, stops[i], stops[i + 1], opt.ode, clamp, swallow);
    res.steps += part.steps;
    res.y = std::move(part.y);
    res.t = part.t;
    if (part.halted) {
      res.halted = true;
      break;
    }
  }
  return res;
}

// Cubic Hermite interpolant through (t_i, v_i, dv_i).
TimeFunction hermite(std::vector<double> t, std::vector<double> v, std::vector<double> dv) {
  auto locate = [t](double x) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
  };
  auto f = [t, v, dv, locate](double x) {
    const std::size_t i = locate(x);
    const double h = t[i + 1] - t[i];
    const double s = (x - t[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * v[i] + h10 * h * dv[i] + h01 * v[i + 1] + h11 * h * dv[i + 1];
  };
  auto df = [t, v, dv, locate](double x) {
    const std::size_t i = locate(x);
    const double h = t[i + 1] - t[i];
    const double s = (x - t[i]) / h;
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
    return (d00 * v[i] + d01 * v[i + 1]) / h + d10 * dv[i] + d11 * dv[i + 1];
  };
  return TimeFunction::custom(f, df, t);
}

}  // namespace

PointTrajectory solve_ode_point(const DrivingSpec& spec, cplx w, double tau, double t_end, const LoewnerOptions& opt,
                                std::span<const double> sample_times) {
  if (t_end < tau) throw PreconditionError("solve_ode_point: t_end < tau");
  if (w.imag() < 0.0) throw DomainError("solve_ode_point: w must lie in the closed upper half-plane");
  PointTrajectory out;
  out.t.push_back(tau);
  out.g.push_back(w);
  if (min_distance(spec, tau, w) < opt.eps_swallow) {
    out.swallowed = true;
    out.swallow_time = tau;
    return out;
  }
  std::vector<double> marks;
  for (double s : sample_times)
    if (s > tau && s < t_end) marks.push_back(s);
  std::sort(marks.begin(), marks.end());
  marks.push_back(t_end);
  double t = tau;
  cplx g = w;
  for (double next : marks) {
    if (next <= t) continue;
    auto r = flow(spec, g, t, next, opt, true);
    g = r.y[0];
    t = r.t;
    out.t.push_back(t);
    out.g.push_back(g);
    if (r.halted) {
      out.swallowed = true;
      out.swallow_time = t;
      break;
    }
  }
  return out;
}

cplx loewner_g(const DrivingSpec& spec, cplx w, double tau, double t, const LoewnerOptions& opt) {
  auto tr = solve_ode_point(spec, w, tau, t, opt);
  if (tr.swallowed) throw DomainError("point swallowed by the hull at t=" + std::to_string(tr.swallow_time));
  return tr.final();
}

cplx map_f(const DrivingSpec& spec, cplx z, double t, const LoewnerOptions& opt) {
  if (z.imag() <= 0.0) throw DomainError("map_f: z must lie in the upper half-plane");
  if (t < 0.0) throw PreconditionError("map_f: negative time");
  return flow(spec, z, t, 0.0, opt, false).y[0];
}

std::vector<cplx> map_f_many_serial(const DrivingSpec& spec, std::span<const cplx> z, double t, const LoewnerOptions& opt) {
  std::vector<cplx> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = map_f(spec, z[i], t, opt);
  return out;
}

std::vector<cplx> map_f_many(const DrivingSpec& spec, std::span<const cplx> z, double t, const LoewnerOptions& opt) {
  std::vector<cplx> out(z.size());
  parallel_for(static_cast<std::ptrdiff_t>(z.size()), [&](std::ptrdiff_t i) {
    out[static_cast<std::size_t>(i)] = map_f(spec, z[static_cast<std::size_t>(i)], t, opt);
  });
  return out;
}

std::vector<double> SeriesTrajectory::a0() const {
  std::vector<double> out;
  out.reserve(b.size());
  for (const auto& row : b) out.push_back(-row.at(0));
  return out;
}

SeriesTrajectory evolve_series(const DrivingSpec& spec, int n_terms, double t_end, std::span<const double> sample_times,
                               const OdeOptions& ode) {
  if (n_terms < 1) throw PreconditionError("evolve_series: N must be >= 1");
  const auto n = static_cast<std::size_t>(n_terms);
  auto rhs = [&](double t, const std::vector<double>& b) {
    std::vector<double> db(n, 0.0);
    const double rate = spec.hcap.derivative(t);
    if (rate == 0.0) return db;
    const auto g = map_from_b(b);
    for (const auto& br : spec.branches) {
      const double mu = br.weight(t);
      if (mu == 0.0) continue;
      const auto c = reciprocal_shift_coefficients(g, br.xi(t), n_terms);
      for (std::size_t k = 0; k < n; ++k) db[k] += rate * mu * c[k + 1];
    }
    return db;
  };

  std::vector<double> marks;
  for (double s : sample_times)
    if (s > 0.0 && s < t_end) marks.push_back(s);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  marks.push_back(t_end);

  SeriesTrajectory out;
  std::vector<double> b(n, 0.0);
  double t = 0.0;
  out.t.push_back(t);
  out.b.push_back(b);
  for (double next : marks) {
    if (next <= t) continue;
    const auto stops = spec.breakpoints(t, next);
    for (std::size_t i = 0; i + 1 < stops.size(); ++i) b = integrate_dp45(rhs, b, stops[i], stops[i + 1], ode).y;
    t = next;
    out.t.push_back(t);
    out.b.push_back(b);
  }
  for (std::size_t i = 1; i < out.b.size(); ++i) {
    const double drop = out.b[i - 1][0] - out.b[i][0];
    if (drop > 1e-10 * std::max(1.0, std::abs(out.b[i][0])))
      throw IntegrationError("evolve_series: capacity b_1 decreased at t=" + std::to_string(out.t[i]));
  }
  return out;
}

HullTrace trace_hull(const DrivingSpec& spec, std::span<const double> t_grid, const LoewnerOptions& opt) {
  if (spec.size() != 1) throw PreconditionError("trace_hull: single branch only");
  HullTrace out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.tips.resize(t_grid.size());
  out.error_estimate.resize(t_grid.size());
  const auto& xi = spec.branches[0].xi;
  parallel_for(static_cast<std::ptrdiff_t>(t_grid.size()), [&](std::ptrdiff_t k) {
    const auto i = static_cast<std::size_t>(k);
    const double t = t_grid[i];
    if (t == 0.0 || spec.hcap(t) == 0.0) {
      out.tips[i] = xi(t);
      out.error_estimate[i] = 0.0;
      return;
    }
    const cplx a = map_f(spec, cplx(xi(t), opt.delta_tip), t, opt);
    const cplx b = map_f(spec, cplx(xi(t), 2 * opt.delta_tip), t, opt);
    out.tips[i] = a;
    out.error_estimate[i] = std::abs(a - b);
  });
  return out;
}

VectorTimeReduction vector_time_reduce(const DrivingSpec& spec, int samples) {
  spec.validate();
  if (samples < 2) throw PreconditionError("vector_time_reduce: need at least 2 samples");
  const double T = spec.t_end;
  const std::size_t m = spec.size();
  VectorTimeReduction out;
  out.t1.resize(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i <= samples; ++i) out.t1[static_cast<std::size_t>(i)] = T * i / samples;
  for (double t : out.t1)
    if (!(spec.branches[0].weight(t) > 0.0))
      throw PreconditionError("vector_time_reduce: weight_1 vanishes at t=" + std::to_string(t));

  // t_k(t1) = int_0^t1 mu_k/mu_1, integrated in one run with the samples as stops.
  auto rhs = [&](double t, const std::vector<double>&) {
    std::vector<double> d(m);
    const double mu1 = spec.branches[0].weight(t);
    for (std::size_t k = 0; k < m; ++k) d[k] = spec.branches[k].weight(t) / mu1;
    return d;
  };
  out.t_k.assign(m, std::vector<double>(out.t1.size(), 0.0));
  std::vector<double> tk(m, 0.0);
  for (std::size_t i = 1; i < out.t1.size(); ++i) {
    const auto stops = spec.breakpoints(out.t1[i - 1], out.t1[i]);
    for (std::size_t j = 0; j + 1 < stops.size(); ++j) tk = integrate_dp45(rhs, tk, stops[j], stops[j + 1]).y;
    for (std::size_t k = 0; k < m; ++k) out.t_k[k][i] = tk[k];
  }

  DrivingSpec red;
  red.t_end = T;
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> rate(out.t1.size());
    for (std::size_t i = 0; i < rate.size(); ++i)
      rate[i] = spec.branches[k].weight(out.t1[i]) / spec.branches[0].weight(out.t1[i]);
    const TimeFunction clock = hermite(out.t1, out.t_k[k], rate);
    const TimeFunction xi = spec.branches[k].xi;
    const TimeFunction mu_k = spec.branches[k].weight;
    const TimeFunction mu_1 = spec.branches[0].weight;
    Branch br;
    br.xi = TimeFunction::custom([clock, xi](double t) { return xi(clock(t)); },
                                 [clock, xi, mu_k, mu_1](double t) { return xi.derivative(clock(t)) * mu_k(t) / mu_1(t); },
                                 clock.breakpoints());
    br.weight = mu_k;
    red.branches.push_back(std::move(br));
  }
  // The common partial rate hcap'(t1) drives every coordinate; along the
  // clock the total rate is hcap' * sum mu_k / mu_1 = hcap' / mu_1.
  std::vector<double> cap(out.t1.size(), 0.0), cap_rate(out.t1.size());
  for (std::size_t i = 0; i < cap.size(); ++i)
    cap_rate[i] = spec.hcap.derivative(out.t1[i]) / spec.branches[0].weight(out.t1[i]);
  {
    auto crhs = [&](double t, const std::vector<double>&) {
      return std::vector<double>{spec.hcap.derivative(t) / spec.branches[0].weight(t)};
    };
    std::vector<double> c{0.0};
    for (std::size_t i = 1; i < cap.size(); ++i) {
      const auto stops = spec.breakpoints(out.t1[i - 1], out.t1[i]);
      for (std::size_t j = 0; j + 1 < stops.size(); ++j) c = integrate_dp45(crhs, c, stops[j], stops[j + 1]).y;
      cap[i] = c[0];
    }
  }
  const TimeFunction hc = hermite(out.t1, cap, cap_rate);
  const TimeFunction hcap = spec.hcap;
  const TimeFunction mu_1 = spec.branches[0].weight;
  red.hcap = TimeFunction::custom([hc](double t) { return hc(t); },
                                  [hcap, mu_1](double t) { return hcap.derivative(t) / mu_1(t); }, hc.breakpoints());
  out.reduced = std::move(red);
  return out;
}

cplx solve_vector_time_point(const DrivingSpec& spec, cplx w, double t1_end, const LoewnerOptions& opt) {
  const std::size_t m = spec.size();
  // State: g followed by the coordinate times t_2..t_m (t_1 is the clock).
  auto rhs = [&](double t, const State& y) {
    State d(m, 0.0);
    const double mu1 = spec.branches[0].weight(t);
    const double rate = spec.hcap.derivative(t);
    for (std::size_t k = 0; k < m; ++k) {
      const double tk = k == 0 ? t : y[k].real();
      const double dtk = spec.branches[k].weight(t) / mu1;
      d[0] += rate * dtk / (y[0] - spec.branches[k].xi(tk));
      if (k > 0) d[k] = dtk;
    }
    return d;
  };
  auto clamp = [&](double t, const State& y) {
    const double rate = std::abs(spec.hcap.derivative(t)) / spec.branches[0].weight(t);
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) d = std::min(d, std::abs(y[0] - spec.branches[k].xi(k == 0 ? t : y[k].real())));
    return opt.eta * d * d / rate;
  };
  State y(m, 0.0);
  y[0] = w;
  const auto stops = spec.breakpoints(0.0, t1_end);
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) y = integrate_dp45(rhs, y, stops[i], stops[i + 1], opt.ode, clamp).y;
  return y[0];
}

SuccessiveSlits::SuccessiveSlits(std::vector<SlitSegment> segments, LoewnerOptions opt)
    : segs_(std::move(segments)), opt_(opt) {
  if (segs_.empty()) throw PreconditionError("successive slits: no segments");
  for (std::size_t k = 0; k < segs_.size(); ++k) {
    if (!(segs_[k].t_end > segs_[k].t_start)) throw PreconditionError("successive slits: empty segment " + std::to_string(k));
    if (std::abs(segs_[k].hcap(segs_[k].t_start)) > 1e-12)
      throw PreconditionError("successive slits: segment hcap must start at 0");
    if (k > 0 && segs_[k].t_start < segs_[k - 1].t_end)
      throw PreconditionError("successive slits: segments " + std::to_string(k - 1) + " and " + std::to_string(k) + " overlap");
  }
}

DrivingSpec SuccessiveSlits::segment_spec(std::size_t k) const {
  DrivingSpec s;
  s.branches.push_back({segs_[k].xi, TimeFunction::constant(1.0)});
  s.hcap = segs_[k].hcap;
  s.t_end = segs_[k].t_end;
  return s;
}

cplx SuccessiveSlits::f(cplx z) const {
  for (std::size_t k = segs_.size(); k-- > 0;)
    z = flow(segment_spec(k), z, segs_[k].t_end, segs_[k].t_start, opt_, false).y[0];
  return z;
}

cplx SuccessiveSlits::g(cplx w) const {
  for (std::size_t k = 0; k < segs_.size(); ++k) {
    auto r = flow(segment_spec(k), w, segs_[k].t_start, segs_[k].t_end, opt_, true);
    if (r.halted) throw DomainError("successive slits: point swallowed in segment " + std::to_string(k));
    w = r.y[0];
  }
  return w;
}

double SuccessiveSlits::total_hcap() const {
  double sum = 0.0;
  for (const auto& s : segs_) sum += s.hcap(s.t_end);
  return sum;
}

DrivingSpec SuccessiveSlits::as_single_spec() const {
  auto segs = segs_;
  std::vector<double> offset(segs.size(), 0.0);
  for (std::size_t k = 1; k < segs.size(); ++k) offset[k] = offset[k - 1] + segs[k - 1].hcap(segs[k - 1].t_end);
  auto index = [segs](double t) {
    std::size_t k = 0;
    while (k + 1 < segs.size() && t >= segs[k + 1].t_start) ++k;
    return k;
  };
  std::vector<double> breaks;
  for (const auto& s : segs) {
    breaks.push_back(s.t_start);
    breaks.push_back(s.t_end);
  }
  DrivingSpec out;
  out.t_end = segs.back().t_end;
  out.branches.push_back({TimeFunction::custom([segs, index](double t) { return segs[index(t)].xi(t); },
                                               [segs, index](double t) { return segs[index(t)].xi.derivative(t); }, breaks),
                          TimeFunction::constant(1.0)});
  out.hcap = TimeFunction::custom(
      [segs, index, offset](double t) {
        const auto k = index(t);
        return offset[k] + segs[k].hcap(std::clamp(t, segs[k].t_start, segs[k].t_end));
      },
      [segs, index](double t) {
        const auto k = index(t);
        return (t < segs[k].t_start || t > segs[k].t_end) ? 0.0 : segs[k].hcap.derivative(t);
      },
      breaks);
  return out;
}

std::vector<double> laurent_coefficients(const std::function<cplx(cplx)>& map, double radius, int count, int points) {
  if (points % 2 != 0 || points < 4) throw PreconditionError("laurent_coefficients: need an even number of nodes");
  const int half = points / 2;
  std::vector<cplx> z(static_cast<std::size_t>(half)), val(z.size());
  for (int j = 0; j < half; ++j) {
    const double th = (j + 0.5) * 2.0 * std::numbers::pi / points;
    z[static_cast<std::size_t>(j)] = std::polar(radius, th);
  }
  parallel_for(half, [&](std::ptrdiff_t j) {
    const auto i = static_cast<std::size_t>(j);
    val[i] = map(z[i]) - z[i];
  });
  // Nodes in the lower half-plane are conjugates, F(conj z) = conj F(z), so
  // the two halves pair into twice the real part.
  std::vector<double> c(static_cast<std::size_t>(count), 0.0);
  for (int n = 0; n < count; ++n) {
    double acc = 0.0;
    for (int j = 0; j < half; ++j) {
      const auto i = static_cast<std::size_t>(j);
      acc += 2.0 * (val[i] * std::pow(z[i], n + 1)).real();
    }
    c[static_cast<std::size_t>(n)] = acc / points;
  }
  return c;
}

CoefficientFlowReport coefficient_flow_check(const DrivingSpec& spec, int n_terms, double h) {
  if (spec.size() != 1) throw PreconditionError("coefficient_flow_check: single branch only");
  const double T = spec.t_end;
  if (T < 6 * h) throw PreconditionError("coefficient_flow_check: t_end too short for the stencil");
  const int points = 16;
  std::vector<double> centers;
  for (int i = 0; i < points; ++i) centers.push_back(3 * h + (T - 6 * h) * i / (points - 1));
  std::vector<double> marks;
  for (double c : centers)
    for (int j = -2; j <= 2; ++j) marks.push_back(c + j * h);
  const auto traj = evolve_series(spec, n_terms, T, marks);
  auto at = [&](double t) -> const std::vector<double>& {
    auto it = std::min_element(traj.t.begin(), traj.t.end(),
                               [t](double a, double b) { return std::abs(a - t) < std::abs(b - t); });
    return traj.b[static_cast<std::size_t>(it - traj.t.begin())];
  };

  CoefficientFlowReport rep;
  rep.residual_by_n.assign(static_cast<std::size_t>(n_terms), 0.0);
  const auto& xi = spec.branches[0].xi;
  for (double c : centers) {
    const auto& bm2 = at(c - 2 * h);
    const auto& bm1 = at(c - h);
    const auto& bp1 = at(c + h);
    const auto& bp2 = at(c + 2 * h);
    const auto& b0 = at(c);
    const auto phi = faber_all(b0, n_terms);
    const double da0 = spec.capacity_rate(c);
    for (int n = 1; n <= n_terms; ++n) {
      const auto k = static_cast<std::size_t>(n - 1);
      const double db = (bm2[k] - 8 * bm1[k] + 8 * bp1[k] - bp2[k]) / (12 * h);
      const double r = std::abs(n * db + da0 * faber_derivative(phi[static_cast<std::size_t>(n)], xi(c)));
      rep.residual_by_n[k] = std::max(rep.residual_by_n[k], r);
      if (r > rep.max_residual) {
        rep.max_residual = r;
        rep.worst_n = n;
        rep.worst_t = c;
      }
    }
  }
  return rep;
}

TimeSplitField time_splitting_solve(const std::function<double(double)>& xi, const std::function<double(double)>& t0_profile,
                                    std::span<const double> s_grid, std::span<const double> x_grid, int refine) {
  if (x_grid.size() < 2) throw PreconditionError("time_splitting_solve: need at least 2 x points");
  if (refine < 1) throw PreconditionError("time_splitting_solve: refine must be >= 1");
  const double xmin = *std::min_element(x_grid.begin(), x_grid.end());
  const double xmax = *std::max_element(x_grid.begin(), x_grid.end());
  double smax = 0.0;
  for (double s : s_grid) smax = std::max(smax, std::abs(s));
  const double t_inf = t0_profile(xmin);
  if (std::abs(t0_profile(xmax) - t_inf) > 1e-12)
    throw PreconditionError("time_splitting_solve: t0 must take one common value at both ends of the x range");

  auto speed = [&](double x0) { return xi(t0_profile(x0)); };
  // Launch grid covering every foot point reachable within smax.
  const std::size_t nl = (x_grid.size() - 1) * static_cast<std::size_t>(refine) + 1;
  const double dx = (xmax - xmin) / static_cast<double>(nl - 1);
  double cmax = 0.0;
  for (std::size_t i = 0; i < nl; ++i) cmax = std::max(cmax, std::abs(speed(xmin + dx * static_cast<double>(i))));
  const double pad = cmax * smax + dx;
  const auto extra = static_cast<std::size_t>(std::ceil(pad / dx));
  const double lo = xmin - static_cast<double>(extra) * dx;
  const std::size_t n = nl + 2 * extra;
  std::vector<double> x0(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    x0[i] = lo + dx * static_cast<double>(i);
    c[i] = speed(x0[i]);
  }

  TimeSplitField out;
  out.x_grid.assign(x_grid.begin(), x_grid.end());
  out.s_grid.assign(s_grid.begin(), s_grid.end());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (c[i] > c[i + 1]) {
      const double s_cross = (x0[i + 1] - x0[i]) / (c[i] - c[i + 1]);
      if (s_cross < out.valid_until) {
        out.valid_until = s_cross;
        out.crossing_x = x0[i] + c[i] * s_cross;
      }
    }
  }
  for (double s : s_grid)
    if (s > out.valid_until)
      throw ShockError("time_splitting_solve: characteristics cross at s=" + std::to_string(out.valid_until) +
                       ", x=" + std::to_string(out.crossing_x) + " (requested s=" + std::to_string(s) + ")");

  out.t_values.assign(s_grid.size(), std::vector<double>(x_grid.size(), t_inf));
  for (std::size_t is = 0; is < s_grid.size(); ++is) {
    const double s = s_grid[is];
    std::vector<double> X(n);
    for (std::size_t i = 0; i < n; ++i) X[i] = x0[i] + c[i] * s;
    for (std::size_t ix = 0; ix < x_grid.size(); ++ix) {
      const double x = x_grid[ix];
      auto it = std::upper_bound(X.begin(), X.end(), x);
      if (it == X.begin() || it == X.end()) continue;  // outside the launch window: t = t_inf
      const std::size_t j = static_cast<std::size_t>(it - X.begin()) - 1;
      auto residual = [&](double a) { return a + speed(a) * s - x; };
      double a = x0[j], b = x0[j + 1];
      const double fa = residual(a), fb = residual(b);
      double foot;
      if (fa == 0.0) {
        foot = a;
      } else if (fb == 0.0 || fa * fb > 0.0) {
        foot = b;
      } else {
        boost::uintmax_t iters = 100;
        auto r = boost::math::tools::toms748_solve(residual, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
        foot = 0.5 * (r.first + r.second);
      }
      out.t_values[is][ix] = t0_profile(foot);
    }
  }
  return out;
}

}  // namespace bl
