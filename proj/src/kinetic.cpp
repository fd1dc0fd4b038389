#include "bl/kinetic.hpp"

#include "bl/error.hpp"
#include "bl/parallel.hpp"
#include "bl/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace bl {

using cplx = std::complex<double>;

std::vector<double> uniform_window(double half_width, int points) {
  if (points < 4 || !(half_width > 0.0)) throw PreconditionError("uniform_window: need >= 4 points and a positive width");
  std::vector<double> w(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) w[static_cast<std::size_t>(i)] = -half_width + 2.0 * half_width * i / (points - 1);
  return w;
}

double decay_window(const std::function<double(double)>& shape, double floor, double safety) {
  double w = 0.5;
  while (std::max(shape(w), shape(-w)) >= floor) {
    w *= 1.1;
    if (w > 1e6) throw DomainError("decay_window: shape does not decay");
  }
  return w * safety;
}

namespace {

void check_edges(const KineticState& st) {
  const int nx = st.nx();
  for (int ix = 0; ix < nx; ++ix) {
    if (st.at(0, ix) >= 1e-12 || st.at(st.nw() - 1, ix) >= 1e-12)
      throw DomainError("distribution has not decayed at the w-window edge (x index " + std::to_string(ix) +
                        "); enlarge the w-window");
  }
}

void check_grid(const KineticState& st) {
  if (st.w_grid.size() < 4) throw PreconditionError("kinetic state needs at least 4 w nodes");
  if (st.phi.size() != st.w_grid.size() * static_cast<std::size_t>(st.x.n))
    throw PreconditionError("kinetic state: phi has the wrong shape");
}

// 4-point Lagrange weights for nodes -1, 0, 1, 2 at offset theta in [0, 1).
std::array<double, 4> cubic_weights(double th) {
  return {-th * (th - 1) * (th - 2) / 6.0, (th + 1) * (th - 1) * (th - 2) / 2.0, -(th + 1) * th * (th - 2) / 2.0,
          (th + 1) * th * (th - 1) / 6.0};
}

void kick_column(KineticState& st, int ix, double sigma, std::vector<double>& buf) {
  const int nw = st.nw();
  const int nx = st.nx();
  const double k = std::floor(sigma);
  const auto wts = cubic_weights(sigma - k);
  const int off = static_cast<int>(k);
  buf.assign(static_cast<std::size_t>(nw), 0.0);
  for (int i = 0; i < nw; ++i) {
    double acc = 0.0;
    for (int m = -1; m <= 2; ++m) {
      const int src = i + off + m;
      if (src >= 0 && src < nw) acc += wts[static_cast<std::size_t>(m + 1)] * st.phi[static_cast<std::size_t>(src) * nx + ix];
    }
    buf[static_cast<std::size_t>(i)] = acc;
  }
  buf.front() = 0.0;
  buf.back() = 0.0;
  for (int i = 0; i < nw; ++i) st.phi[static_cast<std::size_t>(i) * nx + ix] = std::max(0.0, buf[static_cast<std::size_t>(i)]);
}

void advect_row(KineticState& st, int iw, double ds) {
  const auto nx = static_cast<std::size_t>(st.nx());
  std::span<double> row(st.phi.data() + static_cast<std::size_t>(iw) * nx, nx);
  const double shift[] = {st.w_grid[static_cast<std::size_t>(iw)] * ds};
  fourier_shift_rows(row, 1, st.nx(), st.x.length, shift);
  for (double& v : row) v = std::max(0.0, v);
}

}  // namespace

KineticState init_from_function(std::vector<double> w_grid, PeriodicGrid x, const std::function<double(double, double)>& phi) {
  KineticState st;
  st.w_grid = std::move(w_grid);
  st.x = x;
  st.phi.assign(st.w_grid.size() * static_cast<std::size_t>(x.n), 0.0);
  for (int iw = 0; iw < st.nw(); ++iw)
    for (int ix = 0; ix < x.n; ++ix) {
      const double v = phi(st.w_grid[static_cast<std::size_t>(iw)], x.x(ix));
      if (v < 0.0) throw DomainError("init_from_function: negative density");
      st.at(iw, ix) = v;
    }
  check_grid(st);
  check_edges(st);
  return st;
}

KineticState init_from_map(std::span<const cplx> f_values, std::vector<double> w_grid, PeriodicGrid x,
                           const std::function<cplx(cplx)>& shape) {
  auto sh = shape ? shape : [](cplx f) { return std::exp(-f * f); };
  KineticState st;
  st.w_grid = std::move(w_grid);
  st.x = x;
  if (f_values.size() != st.w_grid.size() * static_cast<std::size_t>(x.n))
    throw PreconditionError("init_from_map: f samples do not match the grid");
  st.phi.resize(f_values.size());
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    const cplx v = sh(f_values[i]);
    if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v)))
      throw DomainError("init_from_map: shape(f) is not real at sample " + std::to_string(i));
    if (v.real() < 0.0) throw DomainError("init_from_map: shape(f) is negative at sample " + std::to_string(i));
    st.phi[i] = v.real();
  }
  check_grid(st);
  check_edges(st);
  return st;
}

void advect_x_serial(KineticState& st, double ds) {
  for (int iw = 0; iw < st.nw(); ++iw) advect_row(st, iw, ds);
}

void advect_x_omp(KineticState& st, double ds) {
  parallel_for(st.nw(), [&](std::ptrdiff_t iw) { advect_row(st, static_cast<int>(iw), ds); });
}

void kick_w_serial(KineticState& st, std::span<const double> force, double ds) {
  std::vector<double> buf;
  for (int ix = 0; ix < st.nx(); ++ix) kick_column(st, ix, force[static_cast<std::size_t>(ix)] * ds / st.dw(), buf);
}

void kick_w_omp(KineticState& st, std::span<const double> force, double ds) {
  std::vector<double> buf;
#pragma omp parallel for schedule(static) firstprivate(buf)
  for (int ix = 0; ix < st.nx(); ++ix) kick_column(st, ix, force[static_cast<std::size_t>(ix)] * ds / st.dw(), buf);
}

std::vector<double> density(const KineticState& st) {
  std::vector<double> a0(static_cast<std::size_t>(st.nx()), 0.0);
  const double dw = st.dw();
  for (int iw = 0; iw < st.nw(); ++iw) {
    const double wt = (iw == 0 || iw == st.nw() - 1) ? 0.5 * dw : dw;
    for (int ix = 0; ix < st.nx(); ++ix) a0[static_cast<std::size_t>(ix)] += wt * st.at(iw, ix);
  }
  return a0;
}

KineticState step(const KineticState& state, double ds, const StepOptions& opt) {
  check_grid(state);
  KineticState st = state;
  const bool par = opt.mode == KernelMode::parallel;
  auto advect = [&](double h) { par ? advect_x_omp(st, h) : advect_x_serial(st, h); };
  advect(0.5 * ds);
  const auto force = spectral_dx(density(st), st.x.length);
  double fmax = 0.0;
  for (double f : force) fmax = std::max(fmax, std::abs(f));
  if (fmax * std::abs(ds) / st.dw() > opt.max_kick_cells)
    throw IntegrationError("kinetic step: characteristic foot moves " + std::to_string(fmax * std::abs(ds) / st.dw()) +
                           " w-cells; reduce ds");
  par ? kick_w_omp(st, force, ds) : kick_w_serial(st, force, ds);
  advect(0.5 * ds);
  st.s = state.s + ds;
  return st;
}

double default_step(const KineticState& st, double cap) {
  const auto force = spectral_dx(density(st), st.x.length);
  double fmax = 0.0;
  for (double f : force) fmax = std::max(fmax, std::abs(f));
  return fmax > 0.0 ? std::min(cap, 0.25 * st.dw() / fmax) : cap;
}

MomentField moments(const KineticState& st, int N) {
  if (N < 0) throw PreconditionError("moments: negative order");
  MomentField m;
  m.grid = st.x;
  m.N = N;
  m.s = st.s;
  m.A.assign(static_cast<std::size_t>(N) + 1, std::vector<double>(static_cast<std::size_t>(st.nx()), 0.0));
  const double dw = st.dw();
  for (int iw = 0; iw < st.nw(); ++iw) {
    const double wt = (iw == 0 || iw == st.nw() - 1) ? 0.5 * dw : dw;
    const double w = st.w_grid[static_cast<std::size_t>(iw)];
    for (int ix = 0; ix < st.nx(); ++ix) {
      double p = wt * st.at(iw, ix);
      for (int n = 0; n <= N; ++n) {
        m.A[static_cast<std::size_t>(n)][static_cast<std::size_t>(ix)] += p;
        p *= w;
      }
    }
  }
  for (int ix = 0; ix < st.nx(); ++ix)
    if (st.at(0, ix) >= 1e-12 || st.at(st.nw() - 1, ix) >= 1e-12) m.decay_ok = false;
  return m;
}

double mass(const KineticState& st) { return periodic_integral(density(st), st.x.length); }

std::vector<std::vector<double>> MomentField::h_rows() const {
  std::vector<std::vector<double>> h(A.size(), std::vector<double>(static_cast<std::size_t>(grid.n)));
  for (int ix = 0; ix < grid.n; ++ix) {
    std::vector<double> a(A.size());
    for (std::size_t n = 0; n < A.size(); ++n) a[n] = A[n][static_cast<std::size_t>(ix)];
    const auto hv = inverse_coefficients(a);
    for (std::size_t n = 0; n < A.size(); ++n) h[n][static_cast<std::size_t>(ix)] = hv[n];
  }
  return h;
}

BenneyResidual benney_residual(std::span<const MomentField> history) {
  if (history.size() < 3) throw PreconditionError("benney_residual: need at least 3 time slices");
  const double ds = history[1].s - history[0].s;
  for (std::size_t j = 1; j < history.size(); ++j) {
    if (std::abs(history[j].s - history[j - 1].s - ds) > 1e-9 * std::max(1.0, std::abs(ds)))
      throw PreconditionError("benney_residual: history is not equally spaced");
    if (history[j].N != history[0].N || history[j].grid.n != history[0].grid.n)
      throw PreconditionError("benney_residual: inconsistent slices");
  }
  const int N = history[0].N;
  if (N < 1) throw PreconditionError("benney_residual: need N >= 1");
  const double L = history[0].grid.length;
  const auto nx = static_cast<std::size_t>(history[0].grid.n);
  BenneyResidual out;
  double sumsq = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 1; j + 1 < history.size(); ++j) {
    const auto& cur = history[j];
    const auto a0x = spectral_dx(cur.A[0], L);
    std::vector<std::vector<double>> slice;
    for (int n = 0; n < N; ++n) {
      const auto un = static_cast<std::size_t>(n);
      const auto next_x = spectral_dx(cur.A[un + 1], L);
      std::vector<double> r(nx);
      for (std::size_t i = 0; i < nx; ++i) {
        const double as = (history[j + 1].A[un][i] - history[j - 1].A[un][i]) / (2 * ds);
        const double lower = n > 0 ? n * cur.A[un - 1][i] * a0x[i] : 0.0;
        r[i] = as + next_x[i] + lower;
        out.max = std::max(out.max, std::abs(r[i]));
        sumsq += r[i] * r[i];
        ++count;
      }
      slice.push_back(std::move(r));
    }
    out.residual.push_back(std::move(slice));
  }
  out.l2 = std::sqrt(sumsq / static_cast<double>(std::max<std::size_t>(count, 1)));
  return out;
}

namespace {

// Trapezoid quadrature of phi(w, x) k(z - w) over w for every x.
std::vector<cplx> cauchy_column_sum(const KineticState& st, cplx z, int power) {
  std::vector<cplx> out(static_cast<std::size_t>(st.nx()), 0.0);
  const double dw = st.dw();
  for (int iw = 0; iw < st.nw(); ++iw) {
    const double wt = (iw == 0 || iw == st.nw() - 1) ? 0.5 * dw : dw;
    cplx k = 1.0 / (z - st.w_grid[static_cast<std::size_t>(iw)]);
    if (power == 2) k *= k;
    for (int ix = 0; ix < st.nx(); ++ix) out[static_cast<std::size_t>(ix)] += wt * st.at(iw, ix) * k;
  }
  return out;
}

}  // namespace

std::vector<std::vector<cplx>> cauchy_lambda(const KineticState& st, std::span<const cplx> z) {
  std::vector<std::vector<cplx>> out;
  for (const cplx& zz : z) {
    if (!(zz.imag() > 0.0)) throw DomainError("cauchy_lambda: Im z must be positive");
    auto col = cauchy_column_sum(st, zz, 1);
    for (auto& v : col) v += zz;
    out.push_back(std::move(col));
  }
  return out;
}

double vlasov_residual(const KineticState& before, const KineticState& mid, const KineticState& after,
                       std::span<const cplx> z) {
  const double ds = mid.s - before.s;
  if (std::abs((after.s - mid.s) - ds) > 1e-9 * std::max(1.0, std::abs(ds)) || ds == 0.0)
    throw PreconditionError("vlasov_residual: states must be equally spaced in s");
  const auto lb = cauchy_lambda(before, z);
  const auto lm = cauchy_lambda(mid, z);
  const auto la = cauchy_lambda(after, z);
  const auto a0x = spectral_dx(density(mid), mid.x.length);
  double worst = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto lx = spectral_dx(std::span<const cplx>(lm[k]), mid.x.length);
    auto lz = cauchy_column_sum(mid, z[k], 2);
    for (std::size_t i = 0; i < lz.size(); ++i) {
      const cplx lam_z = 1.0 - lz[i];
      const cplx r = (la[k][i] - lb[k][i]) / (2 * ds) + z[k] * lx[i] - a0x[i] * lam_z;
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

}  // namespace bl
