#pragma once

// Vlasov dynamics phi_s + w phi_x - A^0_x phi_w = 0 with A^0 = int phi dw,
// on a periodic x-grid and a truncated uniform w-window.

#include "bl/spectral.hpp"

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace bl {

// phi is stored row-major with one row per w node: phi[iw * nx + ix].
struct KineticState {
  std::vector<double> w_grid;
  PeriodicGrid x;
  std::vector<double> phi;
  double s = 0.0;

  int nw() const { return static_cast<int>(w_grid.size()); }
  int nx() const { return x.n; }
  double dw() const { return w_grid[1] - w_grid[0]; }
  double& at(int iw, int ix) { return phi[static_cast<std::size_t>(iw) * static_cast<std::size_t>(x.n) + static_cast<std::size_t>(ix)]; }
  double at(int iw, int ix) const { return phi[static_cast<std::size_t>(iw) * static_cast<std::size_t>(x.n) + static_cast<std::size_t>(ix)]; }
};

struct MomentField {
  PeriodicGrid grid;
  int N = 0;
  std::vector<std::vector<double>> A;  // A[n][ix], n = 0..N
  double s = 0.0;
  bool decay_ok = true;

  // H^n rows from A pointwise via the series inversion.
  std::vector<std::vector<double>> h_rows() const;
};

std::vector<double> uniform_window(double half_width, int points);

// Half-width W such that exp(-w^2)-type data drop below `floor` at |w| = W,
// times the safety factor: the smallest W with shape(W / safety) < floor.
double decay_window(const std::function<double(double)>& shape, double floor = 1e-12, double safety = 1.5);

// phi = shape(f) from complex samples of the boundary map f[iw * nx + ix].
// Imaginary parts of shape(f) beyond rounding are rejected (DomainError), as
// is data that has not decayed at the w-window edges.
KineticState init_from_map(std::span<const std::complex<double>> f_values, std::vector<double> w_grid, PeriodicGrid x,
                           const std::function<std::complex<double>(std::complex<double>)>& shape = {});

KineticState init_from_function(std::vector<double> w_grid, PeriodicGrid x, const std::function<double(double, double)>& phi);

enum class KernelMode { serial, parallel };

struct StepOptions {
  KernelMode mode = KernelMode::parallel;
  double max_kick_cells = 1.0;  // foot displacement limit in w-cells
};

// Strang step: half x-advection, w-kick with refreshed A^0_x, half x-advection.
KineticState step(const KineticState& state, double ds, const StepOptions& opt = {});
// Default step 0.25 dw / max|A^0_x| (or `cap` when the force vanishes).
double default_step(const KineticState& state, double cap = 0.05);

// Kernels exposed for testing and benchmarking. `advect_x` shifts row iw by
// w_iw * ds; `kick_w` moves column ix by -force[ix] * ds in w.
void advect_x_serial(KineticState& state, double ds);
void advect_x_omp(KineticState& state, double ds);
void kick_w_serial(KineticState& state, std::span<const double> force, double ds);
void kick_w_omp(KineticState& state, std::span<const double> force, double ds);

std::vector<double> density(const KineticState& state);  // A^0(x)
MomentField moments(const KineticState& state, int N);
double mass(const KineticState& state);

struct BenneyResidual {
  // residual[j][n][ix] at interior slices j = 1..J-2 (stored from index 0).
  std::vector<std::vector<std::vector<double>>> residual;
  double max = 0.0;
  double l2 = 0.0;
};

BenneyResidual benney_residual(std::span<const MomentField> history);

// lambda(z, x) = z + int phi(w, x)/(z - w) dw for Im z > 0; out[iz][ix].
std::vector<std::vector<std::complex<double>>> cauchy_lambda(const KineticState& state,
                                                             std::span<const std::complex<double>> z);

// max |lambda_s + z lambda_x - A^0_x lambda_z| at the middle of three states
// spaced by ds, over the given z points.
double vlasov_residual(const KineticState& before, const KineticState& mid, const KineticState& after,
                       std::span<const std::complex<double>> z);

}  // namespace bl
