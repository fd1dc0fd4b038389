#pragma once

// Periodic grids and FFT-based spectral operators (FFTW underneath).

#include <complex>
#include <span>
#include <vector>

namespace bl {

struct PeriodicGrid {
  int n = 0;
  double length = 0.0;

  PeriodicGrid() = default;
  PeriodicGrid(int points, double period);
  double dx() const { return length / n; }
  double x(int i) const { return dx() * i; }
  std::vector<double> points() const;
};

// d/dx of a real periodic sample vector; the Nyquist mode is dropped so the
// discrete operator is exactly skew-symmetric.
std::vector<double> spectral_dx(std::span<const double> f, double length);
std::vector<std::complex<double>> spectral_dx(std::span<const std::complex<double>> f, double length);
std::vector<double> spectral_dx_n(std::span<const double> f, double length, int order);

// Samples of f(x - a) for a periodic f, by phase rotation.
std::vector<double> fourier_shift(std::span<const double> f, double length, double a);
// Same, for many rows at once with per-row shift; rows are contiguous.
void fourier_shift_rows(std::span<double> data, int rows, int cols, double length, std::span<const double> shifts);

// Periodic trapezoid rule (the spectral quadrature on a uniform grid).
double periodic_integral(std::span<const double> f, double length);
std::complex<double> periodic_integral(std::span<const std::complex<double>> f, double length);

}  // namespace bl
