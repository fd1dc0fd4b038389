#pragma once

// Chordal Loewner dynamics in the upper half-plane.
//
// Forward maps g(w, t, tau) solve  dg/dt = -(dA^0/dt) sum_k mu_k / (g - xi_k),
// g(w, tau, tau) = w, with dA^0/dt = -hcap'(t). The slit map f(., t) is the
// inverse of g(., t) and is computed by integrating the same field backward.

#include "bl/driving.hpp"
#include "bl/ode.hpp"
#include "bl/series.hpp"

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace bl {

using cplx = std::complex<double>;

struct LoewnerOptions {
  double eta = 0.1;           // step clamp h <= eta min|g - xi|^2 / |dA^0/dt|
  double eps_swallow = 1e-6;  // swallow threshold on min|g - xi_k|
  double delta_tip = 1e-4;    // tip offset for hull tracing
  OdeOptions ode{};
};

struct PointTrajectory {
  std::vector<double> t;
  std::vector<cplx> g;
  bool swallowed = false;
  double swallow_time = std::numeric_limits<double>::quiet_NaN();
  cplx final() const { return g.back(); }
};

// g(w, t, tau) sampled at tau, the interior `sample_times` in (tau, t_end), and t_end.
PointTrajectory solve_ode_point(const DrivingSpec& spec, cplx w, double tau, double t_end,
                                const LoewnerOptions& opt = {}, std::span<const double> sample_times = {});

// Final value only; throws DomainError if the point is swallowed.
cplx loewner_g(const DrivingSpec& spec, cplx w, double tau, double t, const LoewnerOptions& opt = {});

// f(z, t) = g(., t, 0)^{-1}(z), by reverse-time integration from t to 0.
cplx map_f(const DrivingSpec& spec, cplx z, double t, const LoewnerOptions& opt = {});

// Many independent points: serial reference and the OpenMP kernel.
std::vector<cplx> map_f_many_serial(const DrivingSpec& spec, std::span<const cplx> z, double t, const LoewnerOptions& opt = {});
std::vector<cplx> map_f_many(const DrivingSpec& spec, std::span<const cplx> z, double t, const LoewnerOptions& opt = {});

struct SeriesTrajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> b;  // b[i][n-1] = b_n(t_i), n = 1..N
  std::vector<double> a0() const;      // A^0(t_i) = -b_1(t_i)
};

// Coefficients of g(w, t) = w + sum_{n=1}^N b_n(t) w^{-n}, from the series
// expansion of the Loewner field (series division per branch).
SeriesTrajectory evolve_series(const DrivingSpec& spec, int n_terms, double t_end, std::span<const double> sample_times = {},
                               const OdeOptions& ode = {});

struct HullTrace {
  std::vector<double> times;
  std::vector<cplx> tips;
  std::vector<double> error_estimate;  // |f(xi + i delta) - f(xi + 2 i delta)|
};

HullTrace trace_hull(const DrivingSpec& spec, std::span<const double> t_grid, const LoewnerOptions& opt = {});

// Vector-time system with coordinate rates mu_k / mu_1 reduced to one clock.
struct VectorTimeReduction {
  std::vector<double> t1;                      // reduction clock samples
  std::vector<std::vector<double>> t_k;        // t_k[k][i] = t_k(t1[i])
  DrivingSpec reduced;                         // equivalent single-time multi-slit spec
};

// `spec.branches[k].xi` is read as xi_k(t_k) (a function of the k-th coordinate
// time), weights as the relative rates mu_k(t1), and hcap'(t1) as the common
// -dA^0/dt_k. The reduced spec has driving xi_k(t_k(t)) and hcap' / mu_1.
VectorTimeReduction vector_time_reduce(const DrivingSpec& spec, int samples = 2048);

// Direct integration of the vector-time ODE along the path dt_k/dt1 = mu_k/mu_1,
// carrying the coordinate times in the state.
cplx solve_vector_time_point(const DrivingSpec& spec, cplx w, double t1_end, const LoewnerOptions& opt = {});

struct SlitSegment {
  TimeFunction xi;      // driving on (t_start, t_end)
  TimeFunction hcap;    // capacity added by this segment, hcap(t_start) = 0 in its own clock
  double t_start = 0.0;
  double t_end = 1.0;
};

// Successively grown slits: segment k evolves on (T_{k-1}, T_k) only.
class SuccessiveSlits {
 public:
  explicit SuccessiveSlits(std::vector<SlitSegment> segments, LoewnerOptions opt = {});

  // Composed slit map f_1 o f_2 o ... o f_K.
  cplx f(cplx z) const;
  // Forward map g_K o ... o g_1.
  cplx g(cplx w) const;
  double total_hcap() const;
  // The whole evolution as one single-branch spec (piecewise driving).
  DrivingSpec as_single_spec() const;
  const std::vector<SlitSegment>& segments() const { return segs_; }

 private:
  DrivingSpec segment_spec(std::size_t k) const;
  std::vector<SlitSegment> segs_;
  LoewnerOptions opt_;
};

// Laurent coefficients c_0..c_{count-1} of F(z) - z = sum c_n z^{-(n+1)} for a
// slit map F real on the real axis away from the hull, by the trapezoid rule
// on |z| = radius (lower half-plane via Schwarz reflection).
std::vector<double> laurent_coefficients(const std::function<cplx(cplx)>& map, double radius, int count,
                                         int points = 64);

struct CoefficientFlowReport {
  double max_residual = 0.0;
  int worst_n = 0;
  double worst_t = 0.0;
  std::vector<double> residual_by_n;  // index n-1
};

// max over interior grid times and n <= N of |n b_n' + (dA^0/dt) Phi_n'(xi_t)|
// with b_n' by centered differences of evolve_series output at step h.
CoefficientFlowReport coefficient_flow_check(const DrivingSpec& spec, int n_terms, double h = 1e-3);

struct TimeSplitField {
  std::vector<double> x_grid;
  std::vector<double> s_grid;
  std::vector<std::vector<double>> t_values;  // [s index][x index]
  double valid_until = std::numeric_limits<double>::infinity();
  double crossing_x = std::numeric_limits<double>::quiet_NaN();
};

// Solves xi(t) t_x + t_s = 0 by straight characteristics x = x0 + xi(t0(x0)) s.
TimeSplitField time_splitting_solve(const std::function<double(double)>& xi, const std::function<double(double)>& t0_profile,
                                    std::span<const double> s_grid, std::span<const double> x_grid, int refine = 4);

}  // namespace bl
