#include "bl/hierarchy.hpp"

#include "bl/parallel.hpp"
#include "bl/series.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace bl {

namespace {

template <class T, class F>
Laurent<T> map_coeffs(const Laurent<T>& s, F f) {
  Laurent<T> out(s.hi(), s.lo(), s.valid());
  for (int e = s.lo(); e <= s.hi(); ++e) out.ref(e) = f(s[e]);
  return out;
}

// {F, G} = F_z G_x - F_x G_z.
template <class T>
Laurent<T> bracket(const Laurent<T>& f, const Laurent<T>& fx, const Laurent<T>& g, const Laurent<T>& gx) {
  return f.derivative() * gx - fx * g.derivative();
}

// Coefficient of z^{-(m+1)} in {L, lambda} for m = 0..rows-1, with
//   L_z lambda_x -> sum_{e>=1} e l_e A^{m+e-1}_x,
//   L_x lambda_z -> -sum_{e>=0} (m+e) l_{e,x} A^{m+e-1}.
template <class T>
std::vector<T> flow_rows(const std::vector<T>& a, const std::vector<T>& ax, const std::vector<T>& l, const std::vector<T>& lx,
                         int rows) {
  std::vector<T> out;
  for (int m = 0; m < rows; ++m) {
    T acc(0);
    for (int e = 0; e < static_cast<int>(l.size()); ++e) {
      const int k = m + e - 1;
      if (k < 0) continue;
      if (e >= 1) acc += mul_int(l[static_cast<std::size_t>(e)] * ax[static_cast<std::size_t>(k)], e);
      acc += mul_int(lx[static_cast<std::size_t>(e)] * a[static_cast<std::size_t>(k)], m + e);
    }
    out.push_back(acc);
  }
  return out;
}

void require_flow_order(int N, int n) {
  if (n < 0) throw PreconditionError("lax_flow: negative flow index");
  if (N < n + 2)
    throw OrderError("lax_flow: flow t_" + std::to_string(n) + " needs truncation N >= " + std::to_string(n + 2) +
                     ", have N = " + std::to_string(N));
}

std::vector<double> column(const MomentField& f, int ix) {
  std::vector<double> a(f.A.size());
  for (std::size_t m = 0; m < a.size(); ++m) a[m] = f.A[m][static_cast<std::size_t>(ix)];
  return a;
}

std::vector<std::vector<double>> dx_rows(const std::vector<std::vector<double>>& rows, double length) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(spectral_dx(r, length));
  return out;
}

// Lax polynomial coefficients of index k at every point: out[e][ix].
std::vector<std::vector<double>> lax_rows(const MomentField& f, int k) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(k) + 1, std::vector<double>(static_cast<std::size_t>(f.grid.n)));
  for (int ix = 0; ix < f.grid.n; ++ix) {
    const auto p = lax(AsymptoticSeries<double>(column(f, ix)), k);
    for (int e = 0; e <= k; ++e) out[static_cast<std::size_t>(e)][static_cast<std::size_t>(ix)] = p.coeffs[static_cast<std::size_t>(e)];
  }
  return out;
}

AsymptoticSeries<Poly> symbolic_lambda(int N) {
  std::vector<Poly> a;
  for (int m = 0; m <= N; ++m) a.push_back(jet(m));
  return AsymptoticSeries<Poly>(a);
}

template <class T>
std::vector<T> compat_core(const Laurent<T>& lam, const Laurent<T>& lam_x, const Laurent<T>& la, const Laurent<T>& la_x,
                           const Laurent<T>& lb, const Laurent<T>& lb_x, int a, int b) {
  const Laurent<T> da_lb = (lam.pow(b - 1) * bracket(la, la_x, lam, lam_x)).polynomial_part();
  const Laurent<T> db_la = (lam.pow(a - 1) * bracket(lb, lb_x, lam, lam_x)).polynomial_part();
  const Laurent<T> res = db_la - da_lb + bracket(la, la_x, lb, lb_x).polynomial_part();
  std::vector<T> out;
  for (int e = 0; e <= res.hi(); ++e) out.push_back(res[e]);
  return out;
}

}  // namespace

std::string HierarchyTimes::label(int n) const {
  if (n == 0) return "x";
  if (convention == Convention::physical && n == 1) return "s";
  if (convention == Convention::physical && n == 2) return "y";
  return "t" + std::to_string(n);
}

nlohmann::json HierarchyTimes::metadata() const {
  return {{"convention", convention == Convention::physical ? "physical" : "hierarchy"},
          {"times", convention == Convention::physical ? "x=t0, s=-t1, y=-t2" : "x=t0, t_n"},
          {"flow", "d lambda/d t_n = {L_{n+1}, lambda}"}};
}

std::vector<std::vector<double>> lax_flow(const MomentField& field, int n, HierarchyTimes times) {
  require_flow_order(field.N, n);
  const int rows = field.N - n + 1;
  const auto ax = dx_rows(field.A, field.grid.length);
  const auto l = lax_rows(field, n + 1);
  const auto lx = dx_rows(l, field.grid.length);
  const double sg = times.sign(n);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(field.grid.n)));
  parallel_for(field.grid.n, [&](std::ptrdiff_t i) {
    const auto ix = static_cast<std::size_t>(i);
    std::vector<double> a(field.A.size()), a_x(field.A.size()), lp(l.size()), lpx(l.size());
    for (std::size_t m = 0; m < a.size(); ++m) {
      a[m] = field.A[m][ix];
      a_x[m] = ax[m][ix];
    }
    for (std::size_t e = 0; e < lp.size(); ++e) {
      lp[e] = l[e][ix];
      lpx[e] = lx[e][ix];
    }
    const auto r = flow_rows(a, a_x, lp, lpx, rows);
    for (int m = 0; m < rows; ++m) out[static_cast<std::size_t>(m)][ix] = sg * r[static_cast<std::size_t>(m)];
  });
  return out;
}

std::vector<Poly> lax_flow_symbolic(int N, int n, HierarchyTimes times) {
  require_flow_order(N, n);
  const auto lam = symbolic_lambda(N);
  const auto p = lax(lam, n + 1);
  std::vector<Poly> a, ax, lx;
  for (int m = 0; m <= N; ++m) {
    a.push_back(jet(m));
    ax.push_back(jet(m, 1));
  }
  for (const auto& c : p.coeffs) lx.push_back(total_dx(c));
  auto rows = flow_rows(a, ax, p.coeffs, lx, N - n + 1);
  if (times.sign(n) < 0)
    for (auto& r : rows) r = -r;
  return rows;
}

std::vector<Poly> benney_rhs_symbolic(int N) {
  std::vector<Poly> out;
  for (int m = 0; m < N; ++m) {
    Poly r = -jet(m + 1, 1);
    if (m > 0) r -= Poly(m) * jet(m - 1) * jet(0, 1);
    out.push_back(r);
  }
  return out;
}

std::vector<Poly> commutation_symbolic(int N, int a, int b) {
  if (a < 1 || b < 1) throw PreconditionError("commutation: Lax indices start at 1");
  const auto series = symbolic_lambda(N);
  const auto lam = series.laurent();
  auto dx = [](const Poly& p) { return total_dx(p); };
  const auto la = to_laurent(lax(series, a));
  const auto lb = to_laurent(lax(series, b));
  return compat_core(lam, map_coeffs(lam, dx), la, map_coeffs(la, dx), lb, map_coeffs(lb, dx), a, b);
}

double commutation_check(const MomentField& field, int a, int b) {
  if (a < 1 || b < 1) throw PreconditionError("commutation: Lax indices start at 1");
  const double L = field.grid.length;
  const auto ax = dx_rows(field.A, L);
  const auto la = lax_rows(field, a), lb = lax_rows(field, b);
  const auto la_x = dx_rows(la, L), lb_x = dx_rows(lb, L);
  std::vector<double> worst(static_cast<std::size_t>(field.grid.n), 0.0);
  parallel_for(field.grid.n, [&](std::ptrdiff_t i) {
    const auto ix = static_cast<std::size_t>(i);
    AsymptoticSeries<double> s(column(field, static_cast<int>(i)));
    std::vector<double> sx(field.A.size());
    for (std::size_t m = 0; m < sx.size(); ++m) sx[m] = ax[m][ix];
    AsymptoticSeries<double> sxs(sx);
    Laurent<double> lam = s.laurent();
    Laurent<double> lam_x = sxs.laurent();
    lam_x.ref(1) = 0.0;
    auto poly = [&](const std::vector<std::vector<double>>& rows) {
      Laurent<double> p(static_cast<int>(rows.size()) - 1, 0, kExact);
      for (std::size_t e = 0; e < rows.size(); ++e) p.ref(static_cast<int>(e)) = rows[e][ix];
      return p;
    };
    const auto r = compat_core(lam, lam_x, poly(la), poly(la_x), poly(lb), poly(lb_x), a, b);
    for (double v : r) worst[ix] = std::max(worst[ix], std::abs(v));
  });
  return *std::max_element(worst.begin(), worst.end());
}

// --- closures and chain evolution -------------------------------------------

Closure cold_plasma_closure() {
  return [](double, const std::vector<std::vector<double>>& A) {
    if (A.size() < 2) throw PreconditionError("cold-plasma closure needs rows A^0 and A^1");
    const int N = static_cast<int>(A.size()) - 1;
    std::vector<double> out(A[0].size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(A[0][i] > 0.0)) throw DomainError("cold-plasma closure: A^0 must stay positive");
      out[i] = std::pow(A[1][i], N + 1) / std::pow(A[0][i], N);
    }
    return out;
  };
}

Closure n1_closure(std::vector<std::function<double(double)>> a_of_r, double r_lo, double r_hi) {
  return [a_of_r = std::move(a_of_r), r_lo, r_hi](double, const std::vector<std::vector<double>>& A) {
    const std::size_t next = A.size();
    if (a_of_r.size() <= next) throw OrderError("n1 closure: need a_" + std::to_string(next) + "(r)");
    std::vector<double> out(A[0].size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto f = [&](double r) { return a_of_r[0](r) - A[0][i]; };
      const double fa = f(r_lo), fb = f(r_hi);
      if (fa * fb > 0.0) throw DomainError("n1 closure: A^0 outside the range of a_0 on [r_lo, r_hi]");
      boost::uintmax_t it = 200;
      auto br = boost::math::tools::toms748_solve(f, r_lo, r_hi, fa, fb, boost::math::tools::eps_tolerance<double>(52), it);
      out[i] = a_of_r[next](0.5 * (br.first + br.second));
    }
    return out;
  };
}

Closure kinetic_feed_closure(std::vector<MomentField> history) {
  if (history.size() < 4) throw PreconditionError("kinetic feed: need at least 4 slices");
  return [h = std::move(history)](double s, const std::vector<std::vector<double>>& A) {
    const std::size_t row = A.size();
    if (static_cast<std::size_t>(h[0].N) < row) throw OrderError("kinetic feed: history lacks row " + std::to_string(row));
    const double s0 = h.front().s;
    const double hs = h[1].s - h[0].s;
    const double pos = (s - s0) / hs;
    long j = static_cast<long>(std::floor(pos)) - 1;
    j = std::clamp(j, 0L, static_cast<long>(h.size()) - 4);
    std::vector<double> out(A[0].size(), 0.0);
    for (int a = 0; a < 4; ++a) {
      double w = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) w *= (pos - static_cast<double>(j + b)) / static_cast<double>(a - b);
      const auto& src = h[static_cast<std::size_t>(j + a)].A[row];
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * src[i];
    }
    return out;
  };
}

namespace {

using Rows = std::vector<std::vector<double>>;

Rows chain_rhs(double s, const Rows& A, const Closure& closure, double length) {
  const std::size_t N = A.size() - 1;
  const auto top = closure(s, A);
  const auto a0x = spectral_dx(A[0], length);
  Rows out(A.size());
  for (std::size_t m = 0; m <= N; ++m) {
    const auto nx = spectral_dx(m == N ? top : A[m + 1], length);
    out[m].resize(A[m].size());
    for (std::size_t i = 0; i < nx.size(); ++i)
      out[m][i] = -nx[i] - (m > 0 ? static_cast<double>(m) * A[m - 1][i] * a0x[i] : 0.0);
  }
  return out;
}

Rows axpy(const Rows& y, double h, const Rows& k) {
  Rows out = y;
  for (std::size_t m = 0; m < y.size(); ++m)
    for (std::size_t i = 0; i < y[m].size(); ++i) out[m][i] += h * k[m][i];
  return out;
}

}  // namespace

ChainHistory evolve_chain(const MomentField& init, const Closure& closure, double s_end, double ds, int record_every,
                          std::string closure_name) {
  if (!(ds > 0.0)) throw PreconditionError("evolve_chain: ds must be positive");
  if (record_every < 1) throw PreconditionError("evolve_chain: record_every must be >= 1");
  ChainHistory hist;
  hist.closure = std::move(closure_name);
  hist.slices.push_back(init);
  const long steps = std::lround((s_end - init.s) / ds);
  if (steps < 0 || std::abs(steps * ds - (s_end - init.s)) > 1e-9 * std::max(1.0, s_end))
    throw PreconditionError("evolve_chain: s_end - s must be a nonnegative multiple of ds");
  Rows A = init.A;
  const double L = init.grid.length;
  double s = init.s;
  for (long k = 1; k <= steps; ++k) {
    const Rows k1 = chain_rhs(s, A, closure, L);
    const Rows k2 = chain_rhs(s + 0.5 * ds, axpy(A, 0.5 * ds, k1), closure, L);
    const Rows k3 = chain_rhs(s + 0.5 * ds, axpy(A, 0.5 * ds, k2), closure, L);
    const Rows k4 = chain_rhs(s + ds, axpy(A, ds, k3), closure, L);
    for (std::size_t m = 0; m < A.size(); ++m)
      for (std::size_t i = 0; i < A[m].size(); ++i) A[m][i] += ds / 6.0 * (k1[m][i] + 2 * k2[m][i] + 2 * k3[m][i] + k4[m][i]);
    s = init.s + static_cast<double>(k) * ds;
    double amax = 0.0;
    for (const auto& r : A)
      for (double v : r) amax = std::isfinite(v) ? std::max(amax, std::abs(v)) : 1e300;
    if (k % record_every == 0 || amax > 1e6) {
      MomentField f = init;
      f.A = A;
      f.s = s;
      hist.slices.push_back(std::move(f));
    }
    if (amax > 1e6) {
      hist.halted = true;
      hist.diagnostic = "field magnitude " + std::to_string(amax) + " exceeded 1e6 at s=" + std::to_string(s);
      break;
    }
  }
  return hist;
}

ShallowWater shallow_water_reference(const PeriodicGrid& grid, ShallowWater init, double s_end, const OdeOptions& opt) {
  const auto n = static_cast<std::size_t>(grid.n);
  if (init.eta.size() != n || init.v.size() != n) throw PreconditionError("shallow water: size mismatch");
  std::vector<double> y(2 * n);
  std::copy(init.eta.begin(), init.eta.end(), y.begin());
  std::copy(init.v.begin(), init.v.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
  auto rhs = [&](double, const std::vector<double>& st) {
    std::vector<double> eta(st.begin(), st.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> v(st.begin() + static_cast<std::ptrdiff_t>(n), st.end());
    std::vector<double> flux(n);
    for (std::size_t i = 0; i < n; ++i) flux[i] = eta[i] * v[i];
    const auto fx = spectral_dx(flux, grid.length);
    const auto vx = spectral_dx(v, grid.length);
    const auto ex = spectral_dx(eta, grid.length);
    std::vector<double> d(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = -fx[i];
      d[n + i] = -v[i] * vx[i] - ex[i];
    }
    return d;
  };
  y = integrate_dp45(rhs, y, 0.0, s_end, opt).y;
  ShallowWater out;
  out.eta.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  out.v.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
  return out;
}

// --- conservation and Hamiltonian structure ---------------------------------

std::vector<double> conserved_integrals(const MomentField& field) {
  std::vector<double> out;
  for (const auto& row : field.h_rows()) out.push_back(periodic_integral(row, field.grid.length));
  return out;
}

std::vector<double> km_bracket_apply(const MomentField& field, int m, int n, std::span<const double> test) {
  if (m < 0 || n < 0) throw PreconditionError("km bracket: negative index");
  const int c = m + n - 1;
  if (c > field.N) throw OrderError("km bracket: needs A^" + std::to_string(c) + " but N = " + std::to_string(field.N));
  const auto nx = static_cast<std::size_t>(field.grid.n);
  if (test.size() != nx) throw PreconditionError("km bracket: test function size mismatch");
  std::vector<double> out(nx, 0.0);
  if (c < 0) return out;  // m = n = 0: both terms carry a zero factor
  const auto& C = field.A[static_cast<std::size_t>(c)];
  const auto tx = spectral_dx(test, field.grid.length);
  std::vector<double> prod(nx);
  for (std::size_t i = 0; i < nx; ++i) prod[i] = C[i] * test[i];
  const auto px = spectral_dx(prod, field.grid.length);
  for (std::size_t i = 0; i < nx; ++i) out[i] = -m * C[i] * tx[i] - n * px[i];
  return out;
}

Poly km_bracket_symbolic(int m, int n, const Poly& test) {
  const int c = m + n - 1;
  if (c < 0) return Poly();
  const Poly C = jet(c);
  return -(Poly(m) * C * total_dx(test)) - Poly(n) * total_dx(C * test);
}

double km_skew_residual(const MomentField& field, int m, int n, std::span<const double> f, std::span<const double> g) {
  const auto a = km_bracket_apply(field, m, n, g);
  const auto b = km_bracket_apply(field, n, m, f);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += f[i] * a[i] + g[i] * b[i];
  return s * field.grid.dx();
}

std::vector<std::vector<double>> hamiltonian_flow(const MomentField& field) {
  if (field.N < 2) throw OrderError("hamiltonian flow: needs N >= 2");
  // h = (A^2 + (A^0)^2)/2: dh/dA^0 = A^0, dh/dA^2 = 1/2.
  const std::vector<double> half(static_cast<std::size_t>(field.grid.n), 0.5);
  std::vector<std::vector<double>> out;
  for (int m = 0; m < field.N; ++m) {
    auto r = km_bracket_apply(field, m, 0, field.A[0]);
    const auto r2 = km_bracket_apply(field, m, 2, half);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += r2[i];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Poly> hamiltonian_flow_symbolic(int N) {
  std::vector<Poly> out;
  for (int m = 0; m < N; ++m) out.push_back(km_bracket_symbolic(m, 0, jet(0)) + km_bracket_symbolic(m, 2, Poly(Rational(1, 2))));
  return out;
}

double hamiltonian_flow_check(const MomentField& field) {
  const auto h = hamiltonian_flow(field);
  const auto l = lax_flow(field, 1);
  double worst = 0.0;
  for (std::size_t m = 0; m < std::min(h.size(), l.size()); ++m)
    for (std::size_t i = 0; i < h[m].size(); ++i) worst = std::max(worst, std::abs(h[m][i] - l[m][i]));
  return worst;
}

nlohmann::json hamiltonian_metadata() {
  return {{"bracket", "{A^m,A^n} = -m A^{m+n-1} d_x - n d_x A^{m+n-1}"},
          {"density", "(A^2 + (A^0)^2)/2"},
          {"note", "equivalent to density A^2 + (A^0)^2 under the operator scaled by -1/2"},
          {"time", "s"}};
}

// --- fields over (x, s, y) ---------------------------------------------------

template <class T>
Field3<T> field_dx(const Field3<T>& f) {
  Field3<T> out = f;
  std::vector<T> line(static_cast<std::size_t>(f.x.n));
  for (int is = 0; is < f.ns; ++is)
    for (int iy = 0; iy < f.ny; ++iy) {
      for (int ix = 0; ix < f.x.n; ++ix) line[static_cast<std::size_t>(ix)] = f(ix, is, iy);
      const auto d = spectral_dx(std::span<const T>(line), f.x.length);
      for (int ix = 0; ix < f.x.n; ++ix) out(ix, is, iy) = d[static_cast<std::size_t>(ix)];
    }
  return out;
}

template <class T>
T field_ds(const Field3<T>& f, int ix, int is, int iy) {
  return (f(ix, is + 1, iy) - f(ix, is - 1, iy)) / (2 * f.ds);
}

template <class T>
T field_dy(const Field3<T>& f, int ix, int is, int iy) {
  return (f(ix, is, iy + 1) - f(ix, is, iy - 1)) / (2 * f.dy);
}

template Field3<double> field_dx(const Field3<double>&);
template Field3<cplx> field_dx(const Field3<cplx>&);
template double field_ds(const Field3<double>&, int, int, int);
template cplx field_ds(const Field3<cplx>&, int, int, int);
template double field_dy(const Field3<double>&, int, int, int);
template cplx field_dy(const Field3<cplx>&, int, int, int);

Residual3 collect_residual(const std::function<cplx(int, int, int)>& r, const PeriodicGrid& x, int ns, int ny) {
  Residual3 out;
  double sumsq = 0.0;
  for (int ix = 0; ix < x.n; ++ix)
    for (int is = 1; is + 1 < ns; ++is)
      for (int iy = 1; iy + 1 < ny; ++iy) {
        const double v = std::abs(r(ix, is, iy));
        out.values.push_back(v);
        out.max = std::max(out.max, v);
        sumsq += v * v;
      }
  out.l2 = out.values.empty() ? 0.0 : std::sqrt(sumsq / static_cast<double>(out.values.size()));
  return out;
}

Residual3 zk_residual(const Field3<double>& u) {
  if (u.ns < 3 || u.ny < 3 || u.x.n < 3) throw PreconditionError("zk_residual: need at least 3 points per direction");
  const auto ux = field_dx(u);
  // Flux q = u_y + u u_x on the interior y nodes; its x-derivative spectral.
  Field3<double> q = u;
  for (int ix = 0; ix < u.x.n; ++ix)
    for (int is = 0; is < u.ns; ++is)
      for (int iy = 0; iy < u.ny; ++iy)
        q(ix, is, iy) = (iy == 0 || iy + 1 == u.ny) ? 0.0 : field_dy(u, ix, is, iy) + u(ix, is, iy) * ux(ix, is, iy);
  const auto qx = field_dx(q);
  return collect_residual(
      [&](int ix, int is, int iy) {
        const double uss = (u(ix, is + 1, iy) - 2 * u(ix, is, iy) + u(ix, is - 1, iy)) / (u.ds * u.ds);
        return cplx(uss + qx(ix, is, iy));
      },
      u.x, u.ns, u.ny);
}

// --- modified chain ----------------------------------------------------------

namespace {

using OneForm = std::vector<Poly>;

OneForm differential(const Poly& q, int nv) {
  OneForm d;
  for (int i = 0; i < nv; ++i) d.push_back(q.partial(i));
  return d;
}

OneForm scaled(const OneForm& w, const Poly& c) {
  OneForm out;
  for (const auto& p : w) out.push_back(p * c);
  return out;
}

OneForm add(const OneForm& a, const OneForm& b) {
  OneForm out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

// Variable id of H^j.
int hid(int j) { return j + 1; }

// Conservative H-chain flux: H^j_s + F_j(H)_x = 0.
Poly h_flux(int j) {
  if (j == -1) return Poly::var(hid(0)) + Poly(Rational(1, 2)) * Poly::var(hid(-1), 2);
  Poly f = Poly::var(hid(j + 1));
  for (int m = 0; m <= j - 1; ++m) f -= Poly(Rational(1, 2)) * Poly::var(hid(m)) * Poly::var(hid(j - 1 - m));
  return f;
}

// q_s as a one-form in the H_x: -sum_j dq/dH^j dF_j.
OneForm time_derivative(const Poly& q, int nv) {
  OneForm out(static_cast<std::size_t>(nv));
  for (int j = -1; hid(j) < nv; ++j) {
    const Poly c = q.partial(hid(j));
    if (c.is_zero()) continue;
    out = add(out, scaled(differential(h_flux(j), nv), -c));
  }
  return out;
}

// Potential of a closed polynomial one-form vanishing at the origin.
Poly integrate_form(const OneForm& w) {
  const int nv = static_cast<int>(w.size());
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j)
      if (!(w[static_cast<std::size_t>(i)].partial(j) == w[static_cast<std::size_t>(j)].partial(i)))
        throw DomainError("substitution table: one-form is not closed");
  Poly out;
  for (int i = 0; i < nv; ++i)
    for (const auto& [mono, c] : w[static_cast<std::size_t>(i)].terms()) {
      int degree = 0;
      Poly term(c);
      for (std::size_t v = 0; v < mono.size(); ++v) {
        degree += mono[v];
        if (mono[v] > 0) term *= Poly::var(static_cast<int>(v), mono[v]);
      }
      out += term * Poly::var(i) * Poly(Rational(1, degree + 1));
    }
  return out;
}

}  // namespace

SubstitutionTable substitution_table(int K) {
  if (K < 1) throw PreconditionError("substitution table: K must be >= 1");
  const int nv = K + 2;  // H^{-1}..H^K
  SubstitutionTable t;
  t.K = K;
  t.b_of_h.push_back(Poly::var(hid(-1)));
  for (int k = 0; k < K; ++k) {
    const Poly& b0 = t.b_of_h[0];
    const Poly& bk = t.b_of_h[static_cast<std::size_t>(k)];
    OneForm w = scaled(time_derivative(bk, nv), Poly(-1));
    w = add(w, scaled(differential(bk, nv), Poly(Rational(-1, 2)) * b0));
    w = add(w, scaled(differential(b0, nv), Poly(Rational(-(k + 1), 2)) * bk));
    if (k > 0) {
      const Poly inner = Poly(Rational(1, 2)) * t.b_of_h[1] - Poly(Rational(1, 8)) * b0 * b0;
      w = add(w, scaled(differential(inner, nv), Poly(-k) * t.b_of_h[static_cast<std::size_t>(k - 1)]));
    }
    Poly next = integrate_form(w);
    if (!(next.partial(hid(k)) == Poly(1)))
      throw DomainError("substitution table: B^" + std::to_string(k + 1) + " is not H^" + std::to_string(k) + " + lower terms");
    t.b_of_h.push_back(std::move(next));
  }
  // Invert the triangular system: H^k = B^{k+1} - R_k(H^{-1}..H^{k-1}).
  t.h_of_b.push_back(Poly::var(0));
  for (int k = 0; k < K; ++k) {
    const Poly rest = t.b_of_h[static_cast<std::size_t>(k + 1)] - Poly::var(hid(k));
    if (rest.max_var() >= hid(k)) throw DomainError("substitution table: B row is not triangular");
    t.h_of_b.push_back(Poly::var(k + 1) - substitute(rest, t.h_of_b));
  }
  return t;
}

ModifiedMomentField to_modified(const PeriodicGrid& grid, const std::vector<std::vector<cplx>>& h, double s,
                                const SubstitutionTable& table) {
  if (h.size() < static_cast<std::size_t>(table.K) + 1) throw OrderError("to_modified: need H^{-1}..H^{K-1}");
  ModifiedMomentField out;
  out.grid = grid;
  out.s = s;
  out.B.assign(table.b_of_h.size(), std::vector<cplx>(static_cast<std::size_t>(grid.n)));
  std::vector<cplx> vals(h.size());
  for (int ix = 0; ix < grid.n; ++ix) {
    for (std::size_t j = 0; j < h.size(); ++j) vals[j] = h[j][static_cast<std::size_t>(ix)];
    for (std::size_t k = 0; k < table.b_of_h.size(); ++k)
      out.B[k][static_cast<std::size_t>(ix)] = evaluate_as(table.b_of_h[k], vals);
  }
  return out;
}

std::vector<std::vector<cplx>> shadow_h(const ModifiedMomentField& field, const SubstitutionTable& table) {
  std::vector<std::vector<cplx>> out(table.h_of_b.size(), std::vector<cplx>(static_cast<std::size_t>(field.grid.n)));
  std::vector<cplx> vals(field.B.size());
  for (int ix = 0; ix < field.grid.n; ++ix) {
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = field.B[k][static_cast<std::size_t>(ix)];
    for (std::size_t j = 0; j < out.size(); ++j) out[j][static_cast<std::size_t>(ix)] = evaluate_as(table.h_of_b[j], vals);
  }
  return out;
}

cplx cold_plasma_hm1(double eta, double v) {
  // z^2 - v z + eta = 0.
  const cplx disc = std::sqrt(cplx(v * v - 4 * eta, 0.0));
  const cplx a = 0.5 * (v + disc), b = 0.5 * (v - disc);
  return a.imag() >= b.imag() ? a : b;
}

ChainResidual modified_chain_residual(std::span<const ModifiedMomentField> history) {
  if (history.size() < 3) throw PreconditionError("modified_chain_residual: need at least 3 slices");
  const double ds = history[1].s - history[0].s;
  for (std::size_t j = 1; j < history.size(); ++j)
    if (std::abs(history[j].s - history[j - 1].s - ds) > 1e-9 * std::max(1.0, std::abs(ds)))
      throw PreconditionError("modified_chain_residual: history is not equally spaced");
  const int K = static_cast<int>(history[0].B.size()) - 1;
  const double L = history[0].grid.length;
  ChainResidual out;
  out.max_by_row.assign(static_cast<std::size_t>(K), 0.0);
  double sumsq = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 1; j + 1 < history.size(); ++j) {
    const auto& B = history[j].B;
    std::vector<std::vector<cplx>> bx;
    for (const auto& r : B) bx.push_back(spectral_dx(std::span<const cplx>(r), L));
    std::vector<cplx> inner(B[0].size());
    for (std::size_t i = 0; i < inner.size(); ++i) inner[i] = 0.5 * B[1][i] - 0.125 * B[0][i] * B[0][i];
    const auto inner_x = spectral_dx(std::span<const cplx>(inner), L);
    for (int k = 0; k < K; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      for (std::size_t i = 0; i < inner.size(); ++i) {
        cplx r = (history[j + 1].B[uk][i] - history[j - 1].B[uk][i]) / (2 * ds) + bx[uk + 1][i] + 0.5 * B[0][i] * bx[uk][i] +
                 0.5 * (k + 1) * B[uk][i] * bx[0][i];
        if (k > 0) r += static_cast<double>(k) * B[uk - 1][i] * inner_x[i];
        const double a = std::abs(r);
        out.max_by_row[uk] = std::max(out.max_by_row[uk], a);
        out.max = std::max(out.max, a);
        sumsq += a * a;
        ++count;
      }
    }
  }
  out.l2 = std::sqrt(sumsq / static_cast<double>(std::max<std::size_t>(count, 1)));
  return out;
}

MdkpResidual mdkp_residual(const Field3<cplx>& hm1, const Field3<cplx>& h0) {
  if (!hm1.same_grid(h0)) throw PreconditionError("mdkp_residual: grid mismatch");
  if (hm1.ns < 3 || hm1.ny < 3) throw PreconditionError("mdkp_residual: need at least 3 points in s and y");
  Field3<cplx> f1 = hm1, f2 = hm1;
  for (std::size_t i = 0; i < f1.data.size(); ++i) {
    const cplx a = hm1.data[i], b = h0.data[i];
    f1.data[i] = b + 0.5 * a * a;
    f2.data[i] = b * a + a * a * a / 3.0;
  }
  const auto f1x = field_dx(f1), f2x = field_dx(f2);
  MdkpResidual out;
  out.first = collect_residual([&](int ix, int is, int iy) { return field_ds(hm1, ix, is, iy) + f1x(ix, is, iy); }, hm1.x, hm1.ns,
                               hm1.ny);
  out.second = collect_residual(
      [&](int ix, int is, int iy) { return field_ds(h0, ix, is, iy) - field_dy(hm1, ix, is, iy) - f2x(ix, is, iy); }, hm1.x,
      hm1.ns, hm1.ny);
  return out;
}

}  // namespace bl
