#include "bl/reduction.hpp"

#include "bl/driving.hpp"
#include "bl/faber.hpp"
#include "bl/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bl {

namespace {

std::string where(const RPoint& r) {
  std::ostringstream os;
  os << "r = (";
  for (std::size_t i = 0; i < r.size(); ++i) os << (i ? ", " : "") << r[i];
  os << ")";
  return os.str();
}

struct Accumulator {
  ResidualReport rep;
  double sumsq = 0.0;
  std::size_t count = 0;
  void add(double v, const RPoint& at) {
    if (v > rep.max || rep.worst.empty()) {
      rep.max = std::max(rep.max, v);
      rep.worst = at;
    }
    sumsq += v * v;
    ++count;
  }
  ResidualReport done() {
    rep.l2 = count ? std::sqrt(sumsq / static_cast<double>(count)) : 0.0;
    return rep;
  }
};

// Interior multi-indices of a grid (at least one neighbour on each side).
std::vector<std::vector<int>> interior(const RGrid& g) {
  std::vector<std::vector<int>> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    auto idx = g.unflat(k);
    bool in = true;
    for (int i = 0; i < g.dim(); ++i) in = in && idx[static_cast<std::size_t>(i)] > 0 && idx[static_cast<std::size_t>(i)] + 1 < g.n[static_cast<std::size_t>(i)];
    if (in) out.push_back(std::move(idx));
  }
  return out;
}

double at_shift(const RGrid& g, const std::vector<double>& f, std::vector<int> idx, int i, int di, int k = 0, int dk = 0) {
  idx[static_cast<std::size_t>(i)] += di;
  idx[static_cast<std::size_t>(k)] += dk;
  return f[g.flat(idx)];
}

double d1(const RGrid& g, const std::vector<double>& f, const std::vector<int>& idx, int i) {
  return (at_shift(g, f, idx, i, 1) - at_shift(g, f, idx, i, -1)) / (2 * g.h(i));
}

double d11(const RGrid& g, const std::vector<double>& f, const std::vector<int>& idx, int i, int k) {
  return (at_shift(g, f, idx, i, 1, k, 1) - at_shift(g, f, idx, i, 1, k, -1) - at_shift(g, f, idx, i, -1, k, 1) +
          at_shift(g, f, idx, i, -1, k, -1)) /
         (4 * g.h(i) * g.h(k));
}

void check_separation(const SampledReduction& s, const std::vector<std::vector<double>>& vel, double sep, const char* what) {
  const int N = s.grid.dim();
  for (std::size_t p = 0; p < s.grid.size(); ++p)
    for (int i = 0; i < N; ++i)
      for (int k = i + 1; k < N; ++k)
        if (std::abs(vel[static_cast<std::size_t>(i)][p] - vel[static_cast<std::size_t>(k)][p]) < sep)
          throw SingularityError(std::string(what) + " collision " + std::to_string(i) + "/" + std::to_string(k) + " at " +
                                 where(s.grid.point(s.grid.unflat(p))));
}

}  // namespace

double ReductionState::lambda_vel(int i, const RPoint& r) const {
  const double m = mu[static_cast<std::size_t>(i)](r);
  return m * m + u(r);
}

RPoint ReductionState::grad_u(const RPoint& r) const {
  if (du) return du(r);
  RPoint g(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(r[i]));
    RPoint a = r, b = r;
    a[i] += h;
    b[i] -= h;
    g[i] = (u(a) - u(b)) / (2 * h);
  }
  return g;
}

ReductionState cold_plasma_state() {
  ReductionState s;
  s.N = 2;
  s.kind = "cold_plasma";
  s.mu = {[](const RPoint& r) { return 0.5 * (r[0] + r[1]) + 0.25 * (r[0] - r[1]); },
          [](const RPoint& r) { return 0.5 * (r[0] + r[1]) - 0.25 * (r[0] - r[1]); }};
  s.u = [](const RPoint& r) { return (r[0] - r[1]) * (r[0] - r[1]) / 16.0; };
  s.du = [](const RPoint& r) { return RPoint{(r[0] - r[1]) / 8.0, -(r[0] - r[1]) / 8.0}; };
  s.v = [](const RPoint& r) { return (r[0] - r[1]) * (r[0] - r[1]) / 16.0 * 0.5 * (r[0] + r[1]); };
  s.r_ref = {0.0, 0.0};
  return s;
}

ReductionState reparametrize(const ReductionState& s, std::vector<std::function<double(double)>> f) {
  if (static_cast<int>(f.size()) != s.N) throw PreconditionError("reparametrize: need one map per invariant");
  auto to_r = [f](const RPoint& rho) {
    RPoint r(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) r[i] = f[i](rho[i]);
    return r;
  };
  ReductionState out;
  out.N = s.N;
  out.kind = s.kind + "_reparametrized";
  for (const auto& m : s.mu) out.mu.push_back([m, to_r](const RPoint& rho) { return m(to_r(rho)); });
  out.u = [u = s.u, to_r](const RPoint& rho) { return u(to_r(rho)); };
  if (s.v) out.v = [v = s.v, to_r](const RPoint& rho) { return v(to_r(rho)); };
  return out;
}

std::size_t RGrid::size() const {
  std::size_t s = 1;
  for (int k : n) s *= static_cast<std::size_t>(k);
  return s;
}

std::size_t RGrid::flat(const std::vector<int>& idx) const {
  std::size_t k = 0;
  for (std::size_t i = 0; i < n.size(); ++i) k = k * static_cast<std::size_t>(n[i]) + static_cast<std::size_t>(idx[i]);
  return k;
}

std::vector<int> RGrid::unflat(std::size_t k) const {
  std::vector<int> idx(n.size());
  for (std::size_t i = n.size(); i-- > 0;) {
    idx[i] = static_cast<int>(k % static_cast<std::size_t>(n[i]));
    k /= static_cast<std::size_t>(n[i]);
  }
  return idx;
}

RPoint RGrid::point(const std::vector<int>& idx) const {
  RPoint r(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[i] = lo[i] + idx[i] * h(static_cast<int>(i));
  return r;
}

SampledReduction sample(const ReductionState& s, const RGrid& grid) {
  if (grid.dim() != s.N) throw PreconditionError("sample: grid dimension differs from N");
  for (int k : grid.n)
    if (k < 3) throw PreconditionError("sample: need at least 3 nodes per axis");
  SampledReduction out;
  out.grid = grid;
  out.mu.assign(static_cast<std::size_t>(s.N), std::vector<double>(grid.size()));
  out.u.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const RPoint r = grid.point(grid.unflat(p));
    for (int i = 0; i < s.N; ++i) out.mu[static_cast<std::size_t>(i)][p] = s.mu[static_cast<std::size_t>(i)](r);
    out.u[p] = s.u(r);
  }
  return out;
}

void attach_lambda(SampledReduction& s, const std::function<double(double, double)>& F) {
  s.lambda = s.mu;
  for (std::size_t i = 0; i < s.mu.size(); ++i)
    for (std::size_t p = 0; p < s.u.size(); ++p) s.lambda[i][p] = F(s.mu[i][p], s.u[p]);
}

nlohmann::json ResidualReport::to_json(const std::string& op) const {
  return {{"op", op}, {"max", max}, {"l2", l2}, {"worst", worst}};
}

GtResidual gt_residual(const SampledReduction& s, double sep) {
  const int N = s.grid.dim();
  if (N < 2) throw PreconditionError("gt_residual: needs N >= 2");
  check_separation(s, s.mu, sep, "velocity");
  Accumulator a1, a2;
  for (const auto& idx : interior(s.grid)) {
    const RPoint r = s.grid.point(idx);
    const std::size_t p = s.grid.flat(idx);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) {
        if (i == k) continue;
        const double dmu = s.mu[static_cast<std::size_t>(i)][p] - s.mu[static_cast<std::size_t>(k)][p];
        const double ui = d1(s.grid, s.u, idx, i), uk = d1(s.grid, s.u, idx, k);
        a1.add(std::abs(d1(s.grid, s.mu[static_cast<std::size_t>(k)], idx, i) - ui / dmu), r);
        if (i < k) a2.add(std::abs(d11(s.grid, s.u, idx, i, k) - 2 * ui * uk / (dmu * dmu)), r);
      }
  }
  return {a1.done(), a2.done()};
}

ResidualReport tsarev_check(const SampledReduction& s, double sep) {
  const int N = s.grid.dim();
  if (N < 2) throw PreconditionError("tsarev_check: needs N >= 2");
  if (s.lambda.size() != s.mu.size()) throw PreconditionError("tsarev_check: lambda samples missing");
  check_separation(s, s.mu, sep, "velocity");
  check_separation(s, s.lambda, sep, "lambda");
  Accumulator acc;
  for (const auto& idx : interior(s.grid)) {
    const std::size_t p = s.grid.flat(idx);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) {
        if (i == k) continue;
        const auto ui = static_cast<std::size_t>(i), uk = static_cast<std::size_t>(k);
        const double lhs = d1(s.grid, s.lambda[uk], idx, i) / (s.lambda[ui][p] - s.lambda[uk][p]);
        const double rhs = d1(s.grid, s.mu[uk], idx, i) / (s.mu[ui][p] - s.mu[uk][p]);
        acc.add(std::abs(lhs - rhs), s.grid.point(idx));
      }
  }
  return acc.done();
}

ResidualReport potential_residual(const SampledReduction& s) {
  const int N = s.grid.dim();
  // q_i = mu_i d_i u on every node with a centered i-difference; the mixed
  // check then differences q_i along k.
  Accumulator acc;
  for (const auto& idx : interior(s.grid)) {
    for (int i = 0; i < N; ++i)
      for (int k = i + 1; k < N; ++k) {
        auto q = [&](int a, int b, int db) {
          auto j = idx;
          j[static_cast<std::size_t>(b)] += db;
          // One-sided in a is never needed: j stays interior along a.
          return s.mu[static_cast<std::size_t>(a)][s.grid.flat(j)] * d1(s.grid, s.u, j, a);
        };
        auto interior_along = [&](int a, int b) {
          for (int d : {-1, 1}) {
            auto j = idx;
            j[static_cast<std::size_t>(b)] += d;
            if (j[static_cast<std::size_t>(a)] <= 0 || j[static_cast<std::size_t>(a)] + 1 >= s.grid.n[static_cast<std::size_t>(a)]) return false;
          }
          return true;
        };
        if (!interior_along(i, k) || !interior_along(k, i)) continue;
        const double dk_qi = (q(i, k, 1) - q(i, k, -1)) / (2 * s.grid.h(k));
        const double di_qk = (q(k, i, 1) - q(k, i, -1)) / (2 * s.grid.h(i));
        acc.add(std::abs(dk_qi - di_qk), s.grid.point(idx));
      }
  }
  return acc.done();
}

double ansatz_residual(const std::function<double(double, double)>& F, double mu_i, double mu_k, double u, double h) {
  if (mu_i == mu_k) throw SingularityError("ansatz_residual: mu_i = mu_k");
  const double Fu = (F(mu_i, u + h) - F(mu_i, u - h)) / (2 * h);
  const double Fm = (F(mu_i + h, u) - F(mu_i - h, u)) / (2 * h);
  return (mu_k - mu_i) * Fu - (F(mu_k, u) - F(mu_i, u)) / (mu_k - mu_i) + Fm;
}

SampledReduction fixture_from_json(const nlohmann::json& j) {
  require_keys(j, {"N", "kind", "grid", "tabulated"}, "reduction fixture");
  if (!j.contains("N")) throw ConfigError("reduction fixture: missing \"N\"");
  const int N = j.at("N").get<int>();
  if (j.contains("tabulated")) {
    const auto& t = j.at("tabulated");
    require_keys(t, {"lo", "hi", "n", "mu", "u"}, "reduction fixture.tabulated");
    SampledReduction s;
    s.grid = {t.at("lo").get<std::vector<double>>(), t.at("hi").get<std::vector<double>>(), t.at("n").get<std::vector<int>>()};
    s.mu = t.at("mu").get<std::vector<std::vector<double>>>();
    s.u = t.at("u").get<std::vector<double>>();
    if (s.grid.dim() != N || s.grid.lo.size() != s.grid.n.size() || s.grid.hi.size() != s.grid.n.size() ||
        static_cast<int>(s.mu.size()) != N)
      throw ConfigError("reduction fixture: tabulated shapes do not match N");
    for (const auto& m : s.mu)
      if (m.size() != s.grid.size()) throw ConfigError("reduction fixture: mu row size differs from the grid");
    if (s.u.size() != s.grid.size()) throw ConfigError("reduction fixture: u size differs from the grid");
    return s;
  }
  const std::string kind = j.value("kind", "");
  if (kind != "cold_plasma") throw ConfigError("reduction fixture: unknown kind \"" + kind + "\"");
  if (N != 2) throw ConfigError("reduction fixture: cold_plasma has N = 2");
  RGrid g{{2.0, -1.0}, {3.0, 0.0}, {65, 65}};
  if (j.contains("grid")) {
    const auto& gj = j.at("grid");
    require_keys(gj, {"lo", "hi", "n"}, "reduction fixture.grid");
    if (gj.contains("lo")) g.lo = gj.at("lo").get<std::vector<double>>();
    if (gj.contains("hi")) g.hi = gj.at("hi").get<std::vector<double>>();
    if (gj.contains("n")) {
      const int n = gj.at("n").get<int>();
      g.n = {n, n};
    }
  }
  return sample(cold_plasma_state(), g);
}

// --- one-component hodograph ---------------------------------------------

N1Model n1_identity_model() {
  auto id = [](double r) { return r; };
  auto one = [](double) { return 1.0; };
  return {id, one, id, one};
}

std::vector<Poly> n1_moments(const Poly& mu, const Poly& u, int count) {
  if (mu.max_var() > 0 || u.max_var() > 0) throw PreconditionError("n1_moments: mu and u must depend on r only");
  auto integrate = [](const Poly& p) {
    Poly out;
    for (const auto& [mono, c] : p.terms()) {
      const int e = mono.empty() ? 0 : mono[0];
      out += Poly(c / (e + 1)) * Poly::var(0, e + 1);
    }
    return out;
  };
  std::vector<Poly> a{u};
  const Poly du = u.partial(0);
  for (int n = 0; static_cast<int>(a.size()) < count; ++n) {
    Poly rhs = mu * a[static_cast<std::size_t>(n)].partial(0);
    if (n > 0) rhs -= Poly(n) * a[static_cast<std::size_t>(n - 1)] * du;
    a.push_back(integrate(rhs));
  }
  return a;
}

namespace {

double solve_point(const N1Model& m, const N1Profile& p, double x, double s, double y, const N1Options& opt) {
  using namespace boost::math::tools;
  const int ns = std::max(opt.monotone_samples, 8);
  if (p.kind == N1Profile::Kind::inverse) {
    for (int k = 0; k <= ns; ++k) {
      const double r = p.r_lo + (p.r_hi - p.r_lo) * k / ns;
      if (!(p.df(r) + m.dmu(r) * s + m.dlambda(r) * y > 0.0))
        throw ShockError("n1_solve: characteristics cross near r=" + std::to_string(r) + " at s=" + std::to_string(s) +
                         ", y=" + std::to_string(y));
    }
    auto G = [&](double r) { return std::make_pair(p.f(r) + m.mu(r) * s + m.lambda(r) * y - x, p.df(r) + m.dmu(r) * s + m.dlambda(r) * y); };
    if (G(p.r_lo).first > 0.0 || G(p.r_hi).first < 0.0)
      throw DomainError("n1_solve: (x,s,y) outside the region covered by r in [r_lo, r_hi]");
    const double guess = 0.5 * (p.r_lo + p.r_hi);
    boost::uintmax_t it = 100;
    const double r = newton_raphson_iterate(G, guess, p.r_lo, p.r_hi, 50, it);
    if (it >= 100 || std::abs(G(r).first) > 1e-10 * std::max(1.0, std::abs(x))) throw ShockError("n1_solve: Newton did not converge");
    return r;
  }
  if (!(p.period > 0.0)) throw PreconditionError("n1_solve: forward profile needs a period");
  for (int k = 0; k < 4 * ns; ++k) {
    const double xi = p.period * k / (4 * ns);
    const double r = p.f(xi);
    if (!(1.0 + p.df(xi) * (m.dmu(r) * s + m.dlambda(r) * y) > 0.0))
      throw ShockError("n1_solve: characteristics cross near xi=" + std::to_string(xi) + " at s=" + std::to_string(s) +
                       ", y=" + std::to_string(y));
  }
  auto F = [&](double r) {
    const double xi = x - m.mu(r) * s - m.lambda(r) * y;
    return std::make_pair(r - p.f(xi), 1.0 + p.df(xi) * (m.dmu(r) * s + m.dlambda(r) * y));
  };
  boost::uintmax_t it = 100;
  const double r = newton_raphson_iterate(F, p.f(x), p.r_lo, p.r_hi, 50, it);
  if (it >= 100 || std::abs(F(r).first) > 1e-10) throw ShockError("n1_solve: Newton did not converge");
  return r;
}

double potential_v(const N1Model& m, double r, double r_ref) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate([&](double q) { return m.mu(q) * m.du(q); }, r_ref, r, 5, 1e-14);
}

}  // namespace

std::vector<N1Point> n1_solve(const N1Model& m, const N1Profile& p, const std::vector<std::array<double, 3>>& xsy,
                              const N1Options& opt) {
  std::vector<N1Point> out(xsy.size());
  parallel_for(static_cast<std::ptrdiff_t>(xsy.size()), [&](std::ptrdiff_t k) {
    const auto& q = xsy[static_cast<std::size_t>(k)];
    const double r = solve_point(m, p, q[0], q[1], q[2], opt);
    out[static_cast<std::size_t>(k)] = {r, m.u(r), potential_v(m, r, opt.r_ref)};
  });
  return out;
}

N1Fields n1_fields(const N1Model& m, const N1Profile& p, const PeriodicGrid& x, double s0, double ds, int ns, double y0,
                   double dy, int ny, const N1Options& opt) {
  N1Fields f;
  f.r = make_field3<double>(x, s0, ds, ns, y0, dy, ny, [](double, double, double) { return 0.0; });
  std::vector<std::array<double, 3>> pts;
  pts.reserve(f.r.data.size());
  for (int ix = 0; ix < x.n; ++ix)
    for (int is = 0; is < ns; ++is)
      for (int iy = 0; iy < ny; ++iy) pts.push_back({x.x(ix), f.r.s(is), f.r.y(iy)});
  const auto sol = n1_solve(m, p, pts, opt);
  f.u = f.r;
  f.v = f.r;
  for (std::size_t k = 0; k < sol.size(); ++k) {
    f.r.data[k] = sol[k].r;
    f.u.data[k] = sol[k].u;
    f.v.data[k] = sol[k].v;
  }
  return f;
}

// --- chordal-type system on r-space --------------------------------------

LoewnerPathResult loewner_system_integrate(const ReductionState& s, cplx z0, const std::vector<RPoint>& r_path,
                                           const OdeOptions& opt, double sep) {
  if (r_path.empty()) throw PreconditionError("loewner_system_integrate: empty path");
  LoewnerPathResult res{z0, std::numeric_limits<double>::infinity()};
  for (std::size_t seg = 0; seg + 1 < r_path.size(); ++seg) {
    const RPoint a = r_path[seg], b = r_path[seg + 1];
    auto rhs = [&](double tau, const std::vector<cplx>& z) {
      RPoint r(a.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + tau * (b[i] - a[i]);
      const RPoint g = s.grad_u(r);
      cplx d = 0.0;
      for (int i = 0; i < s.N; ++i) {
        const cplx den = s.mu[static_cast<std::size_t>(i)](r) - z[0];
        const double dist = std::abs(den);
        res.min_separation = std::min(res.min_separation, dist);
        if (dist < sep) throw SingularityError("loewner_system_integrate: z meets mu_" + std::to_string(i) + " at " + where(r));
        d += g[static_cast<std::size_t>(i)] * (b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]) / den;
      }
      return std::vector<cplx>{d};
    };
    res.z = integrate_dp45(rhs, std::vector<cplx>{res.z}, 0.0, 1.0, opt).y[0];
  }
  return res;
}

double path_independence(const ReductionState& s, cplx z0, const RPoint& a, const RPoint& b, const OdeOptions& opt) {
  std::vector<RPoint> pa{a}, pb{a};
  RPoint ra = a, rb = a;
  for (int i = 0; i < s.N; ++i) {
    ra[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)];
    pa.push_back(ra);
    const auto j = static_cast<std::size_t>(s.N - 1 - i);
    rb[j] = b[j];
    pb.push_back(rb);
  }
  return std::abs(loewner_system_integrate(s, z0, pa, opt).z - loewner_system_integrate(s, z0, pb, opt).z);
}

N1Potential::N1Potential(const N1Model& m, cplx z_at_ref, double r_ref, double lo, double hi, int samples)
    : m_(m), lo_(lo), h_((hi - lo) / samples), z_(static_cast<std::size_t>(samples) + 1) {
  if (!(hi > lo) || samples < 2) throw PreconditionError("N1Potential: bad range");
  if (r_ref < lo || r_ref > hi) throw PreconditionError("N1Potential: r_ref outside [lo, hi]");
  auto rhs = [&](double r, const std::vector<cplx>& z) {
    const cplx den = m_.mu(r) - z[0];
    if (std::abs(den) < kSeparation) throw SingularityError("N1Potential: z meets mu at r=" + std::to_string(r));
    return std::vector<cplx>{m_.du(r) / den};
  };
  OdeOptions opt;
  opt.rtol = 1e-13;
  opt.atol = 1e-14;
  const int j0 = std::clamp(static_cast<int>(std::lround((r_ref - lo) / h_)), 0, samples);
  const cplx zj0 = integrate_dp45(rhs, std::vector<cplx>{z_at_ref}, r_ref, lo + j0 * h_, opt).y[0];
  z_[static_cast<std::size_t>(j0)] = zj0;
  for (int j = j0 + 1; j <= samples; ++j)
    z_[static_cast<std::size_t>(j)] = integrate_dp45(rhs, std::vector<cplx>{z_[static_cast<std::size_t>(j - 1)]}, lo + (j - 1) * h_, lo + j * h_, opt).y[0];
  for (int j = j0 - 1; j >= 0; --j)
    z_[static_cast<std::size_t>(j)] = integrate_dp45(rhs, std::vector<cplx>{z_[static_cast<std::size_t>(j + 1)]}, lo + (j + 1) * h_, lo + j * h_, opt).y[0];
}

cplx N1Potential::operator()(double r) const {
  const double pos = (r - lo_) / h_;
  const int last = static_cast<int>(z_.size()) - 1;
  if (pos < -1e-9 || pos > last + 1e-9) throw DomainError("N1Potential: r=" + std::to_string(r) + " outside the table");
  const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, last - 1);
  const double t = pos - j;
  const cplx z0 = z_[static_cast<std::size_t>(j)], z1 = z_[static_cast<std::size_t>(j + 1)];
  const double r0 = lo_ + j * h_, r1 = r0 + h_;
  const cplx d0 = h_ * m_.du(r0) / (m_.mu(r0) - z0), d1 = h_ * m_.du(r1) / (m_.mu(r1) - z1);
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * z0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * z1 + (t3 - t2) * d1;
}

Field3<cplx> lift(const N1Potential& z, const Field3<double>& r) {
  Field3<cplx> out{r.x, r.s0, r.ds, r.ns, r.y0, r.dy, r.ny, std::vector<cplx>(r.data.size())};
  parallel_for(static_cast<std::ptrdiff_t>(r.data.size()),
               [&](std::ptrdiff_t k) { out.data[static_cast<std::size_t>(k)] = z(r.data[static_cast<std::size_t>(k)]); });
  return out;
}

namespace {

template <class T>
Field3<cplx> complexify(const Field3<T>& f) {
  Field3<cplx> out{f.x, f.s0, f.ds, f.ns, f.y0, f.dy, f.ny, std::vector<cplx>(f.data.begin(), f.data.end())};
  return out;
}

void require_ny(const Field3<cplx>& f, const char* op) {
  if (f.ns < 3 || f.ny < 3) throw PreconditionError(std::string(op) + ": need at least 3 points in s and y");
}

}  // namespace

PairResidual conservation_pair_residual(const Field3<double>& u, const Field3<double>& v, const Field3<cplx>& z) {
  const auto uc = complexify(u), vc = complexify(v);
  if (!uc.same_grid(z) || !vc.same_grid(z)) throw PreconditionError("conservation_pair_residual: grid mismatch");
  require_ny(z, "conservation_pair_residual");
  Field3<cplx> f1 = z, f2 = z;
  for (std::size_t k = 0; k < z.data.size(); ++k) {
    const cplx w = z.data[k];
    f1.data[k] = 0.5 * w * w + uc.data[k];
    f2.data[k] = w * w * w / 3.0 + uc.data[k] * w + vc.data[k];
  }
  const auto f1x = field_dx(f1), f2x = field_dx(f2);
  return {collect_residual([&](int ix, int is, int iy) { return field_ds(z, ix, is, iy) + f1x(ix, is, iy); }, z.x, z.ns, z.ny),
          collect_residual([&](int ix, int is, int iy) { return field_dy(z, ix, is, iy) + f2x(ix, is, iy); }, z.x, z.ns, z.ny)};
}

PairResidual dkp_residual(const Field3<double>& u, const Field3<double>& v) {
  if (!u.same_grid(v)) throw PreconditionError("dkp_residual: grid mismatch");
  const auto uc = complexify(u), vc = complexify(v);
  require_ny(uc, "dkp_residual");
  const auto ux = field_dx(uc), vx = field_dx(vc);
  return {collect_residual([&](int ix, int is, int iy) { return vx(ix, is, iy) + field_ds(uc, ix, is, iy); }, u.x, u.ns, u.ny),
          collect_residual(
              [&](int ix, int is, int iy) {
                return field_ds(vc, ix, is, iy) - field_dy(uc, ix, is, iy) - uc(ix, is, iy) * ux(ix, is, iy);
              },
              u.x, u.ns, u.ny)};
}

Residual3 vertex_flows(const Field3<double>& h0, const Field3<double>& h1, const Field3<cplx>& z, int n) {
  if (n < 0 || n > 2) throw OrderError("vertex_flows: only n = 0, 1, 2 are available");
  const auto h0c = complexify(h0), h1c = complexify(h1);
  if (!h0c.same_grid(z) || !h1c.same_grid(z)) throw PreconditionError("vertex_flows: grid mismatch");
  require_ny(z, "vertex_flows");
  Field3<cplx> flux = z;
  for (std::size_t k = 0; k < z.data.size(); ++k) {
    // b_3 never enters Phi_3; the slot only satisfies faber_all's length check.
    const std::vector<cplx> b{-h0c.data[k], -h1c.data[k], cplx(0.0)};
    const auto phi = faber_all(b, n + 1);
    flux.data[k] = evaluate(phi[static_cast<std::size_t>(n + 1)], z.data[k]) / static_cast<double>(n + 1);
  }
  const auto fx = field_dx(flux);
  const auto zx = field_dx(z);
  const HierarchyTimes times;
  return collect_residual(
      [&](int ix, int is, int iy) {
        const cplx dt = n == 0 ? zx(ix, is, iy) : (n == 1 ? field_ds(z, ix, is, iy) : field_dy(z, ix, is, iy)) * static_cast<double>(times.sign(n));
        return dt - fx(ix, is, iy);
      },
      z.x, z.ns, z.ny);
}

ResidualReport modified_loewner_check(const N1Model& m, const N1Potential& z, const N1Potential& hm1, double lo, double hi,
                                      int n, double sep) {
  if (n < 3 || !(hi > lo)) throw PreconditionError("modified_loewner_check: bad grid");
  const double h = (hi - lo) / (n - 1);
  Accumulator acc;
  for (int j = 1; j + 1 < n; ++j) {
    const double r = lo + j * h;
    auto zt = [&](double q) { return z(q) - hm1(q); };
    const cplx dzt = (zt(r + h) - zt(r - h)) / (2 * h);
    const cplx dh = (hm1(r + h) - hm1(r - h)) / (2 * h);
    const cplx den = m.mu(r) - zt(r) - hm1(r);
    if (std::abs(den) < sep) throw SingularityError("modified_loewner_check: denominator vanishes at r=" + std::to_string(r));
    acc.add(std::abs(dzt - zt(r) * dh / den), {r});
  }
  return acc.done();
}

Residual3 modified_conservation_residual(const Field3<cplx>& zt, const Field3<cplx>& hm1) {
  if (!zt.same_grid(hm1)) throw PreconditionError("modified_conservation_residual: grid mismatch");
  require_ny(zt, "modified_conservation_residual");
  Field3<cplx> f = zt;
  for (std::size_t k = 0; k < f.data.size(); ++k) f.data[k] = 0.5 * zt.data[k] * zt.data[k] + hm1.data[k] * zt.data[k];
  const auto fx = field_dx(f);
  return collect_residual([&](int ix, int is, int iy) { return field_ds(zt, ix, is, iy) + fx(ix, is, iy); }, zt.x, zt.ns, zt.ny);
}

std::vector<cplx> commuting_reduction_velocity(const ReductionState& s, const RPoint& r, cplx z, double sep) {
  std::vector<cplx> w;
  for (int i = 0; i < s.N; ++i) {
    const cplx den = s.mu[static_cast<std::size_t>(i)](r) - z;
    if (std::abs(den) < sep) throw SingularityError("commuting_reduction_velocity: z meets mu_" + std::to_string(i) + " at " + where(r));
    w.push_back(1.0 / den);
  }
  return w;
}

}  // namespace bl
