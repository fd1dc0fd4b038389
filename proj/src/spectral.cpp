#include "bl/spectral.hpp"

#include "bl/error.hpp"
#include "bl/parallel.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bl {

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("BL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) omp_set_num_threads(cap);
  }
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

// Plans are created once per size under a lock and then executed through the
// new-array interface, which FFTW documents as thread-safe.
struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;
std::map<int, Plans> plan_cache;

const Plans& plans_for(int n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = plan_cache.find(n);
  if (it != plan_cache.end()) return it->second;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  double* r = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_complex* c = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_complex* c2 = fftw_alloc_complex(static_cast<std::size_t>(n));
  Plans p;
  p.r2c = fftw_plan_dft_r2c_1d(n, r, c, flags);
  p.c2r = fftw_plan_dft_c2r_1d(n, c, r, flags);
  p.fwd = fftw_plan_dft_1d(n, c, c2, FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft_1d(n, c, c2, FFTW_BACKWARD, flags);
  fftw_free(r);
  fftw_free(c);
  fftw_free(c2);
  return plan_cache.emplace(n, p).first->second;
}

using cplx = std::complex<double>;

// Wavenumber of mode k on an n-point grid, zero at the Nyquist index.
double wavenumber(int k, int n, double length) {
  if (2 * k == n) return 0.0;
  const int kk = k <= n / 2 ? k : k - n;
  return 2.0 * std::numbers::pi * kk / length;
}

std::vector<cplx> forward_real(std::span<const double> f) {
  const int n = static_cast<int>(f.size());
  std::vector<double> in(f.begin(), f.end());
  std::vector<cplx> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_execute_dft_r2c(plans_for(n).r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> backward_real(std::vector<cplx> spec, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  fftw_execute_dft_c2r(plans_for(n).c2r, reinterpret_cast<fftw_complex*>(spec.data()), out.data());
  for (double& v : out) v /= n;
  return out;
}

void check_size(std::size_t n) {
  if (n < 2) throw PreconditionError("spectral operator needs at least 2 points");
}

}  // namespace

PeriodicGrid::PeriodicGrid(int points, double period) : n(points), length(period) {
  if (points < 2 || !(period > 0.0)) throw PreconditionError("PeriodicGrid: need n >= 2 and a positive period");
}

std::vector<double> PeriodicGrid::points() const {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = x(i);
  return out;
}

std::vector<double> spectral_dx(std::span<const double> f, double length) { return spectral_dx_n(f, length, 1); }

std::vector<double> spectral_dx_n(std::span<const double> f, double length, int order) {
  check_size(f.size());
  const int n = static_cast<int>(f.size());
  auto s = forward_real(f);
  for (int k = 0; k < static_cast<int>(s.size()); ++k) {
    const cplx ik(0.0, wavenumber(k, n, length));
    cplx m = 1.0;
    for (int j = 0; j < order; ++j) m *= ik;
    s[static_cast<std::size_t>(k)] *= m;
  }
  if (n % 2 == 0) s[static_cast<std::size_t>(n / 2)] = 0.0;
  return backward_real(std::move(s), n);
}

std::vector<cplx> spectral_dx(std::span<const cplx> f, double length) {
  check_size(f.size());
  const int n = static_cast<int>(f.size());
  std::vector<cplx> in(f.begin(), f.end()), s(f.size()), out(f.size());
  const auto& p = plans_for(n);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(s.data()));
  for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] *= cplx(0.0, wavenumber(k, n, length)) / static_cast<double>(n);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(s.data()), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> fourier_shift(std::span<const double> f, double length, double a) {
  std::vector<double> row(f.begin(), f.end());
  const double shift[] = {a};
  fourier_shift_rows(row, 1, static_cast<int>(row.size()), length, shift);
  return row;
}

void fourier_shift_rows(std::span<double> data, int rows, int cols, double length, std::span<const double> shifts) {
  check_size(static_cast<std::size_t>(cols));
  if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) ||
      shifts.size() != static_cast<std::size_t>(rows))
    throw PreconditionError("fourier_shift_rows: shape mismatch");
  for (int r = 0; r < rows; ++r) {
    auto row = data.subspan(static_cast<std::size_t>(r) * static_cast<std::size_t>(cols), static_cast<std::size_t>(cols));
    auto s = forward_real(row);
    for (int k = 0; k < static_cast<int>(s.size()); ++k) {
      if (2 * k == cols) {
        // The Nyquist mode of a real signal cannot carry a phase; keep its
        // real projection.
        s[static_cast<std::size_t>(k)] *= std::cos(std::numbers::pi * cols / length * shifts[static_cast<std::size_t>(r)]);
        continue;
      }
      s[static_cast<std::size_t>(k)] *= std::polar(1.0, -wavenumber(k, cols, length) * shifts[static_cast<std::size_t>(r)]);
    }
    auto back = backward_real(std::move(s), cols);
    std::copy(back.begin(), back.end(), row.begin());
  }
}

double periodic_integral(std::span<const double> f, double length) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * length / static_cast<double>(f.size());
}

cplx periodic_integral(std::span<const cplx> f, double length) {
  cplx s = 0.0;
  for (const cplx& v : f) s += v;
  return s * (length / static_cast<double>(f.size()));
}

}  // namespace bl
