#pragma once

// Hydrodynamic reductions in Riemann invariants r^i: consistency of the
// characteristic speeds mu_i(r) and density u(r), the chordal-type system
// d_i z = d_i u / (mu_i - z), the one-component hodograph solve, and the
// (x, s, y) residual checks built on top of it.

#include "bl/hierarchy.hpp"

#include "json.hpp"

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bl {

using cplx = std::complex<double>;
using RPoint = std::vector<double>;
using RFunction = std::function<double(const RPoint&)>;

inline constexpr double kSeparation = 1e-3;

struct ReductionState {
  int N = 0;
  std::string kind = "custom";
  std::vector<RFunction> mu;
  RFunction u;
  // Optional closed forms; finite differences are used when absent.
  std::function<RPoint(const RPoint&)> du;
  RFunction v;
  RPoint r_ref;  // v(r_ref) = 0

  double lambda_vel(int i, const RPoint& r) const;
  RPoint grad_u(const RPoint& r) const;
};

// r^+ = v + 2 sqrt(eta), r^- = v - 2 sqrt(eta) with r = (r^+, r^-):
// u = (r^+ - r^-)^2/16, mu_pm = (r^+ + r^-)/2 +- (r^+ - r^-)/4, v = u (r^+ + r^-)/2.
ReductionState cold_plasma_state();

// Same reduction in new invariants rho^i with r^i = f_i(rho^i).
ReductionState reparametrize(const ReductionState& s, std::vector<std::function<double(double)>> f);

// Tensor grid over r-space, uniform per axis.
struct RGrid {
  std::vector<double> lo, hi;
  std::vector<int> n;
  int dim() const { return static_cast<int>(n.size()); }
  double h(int i) const { return (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]) / (n[static_cast<std::size_t>(i)] - 1); }
  std::size_t size() const;
  std::size_t flat(const std::vector<int>& idx) const;
  std::vector<int> unflat(std::size_t k) const;
  RPoint point(const std::vector<int>& idx) const;
};

struct SampledReduction {
  RGrid grid;
  std::vector<std::vector<double>> mu;      // mu[i][flat]
  std::vector<double> u;                    // u[flat]
  std::vector<std::vector<double>> lambda;  // optional, same layout as mu
};

SampledReduction sample(const ReductionState& s, const RGrid& grid);
// lambda_i = F(mu_i, u) on the sampled data.
void attach_lambda(SampledReduction& s, const std::function<double(double, double)>& F);

struct ResidualReport {
  double max = 0.0;
  double l2 = 0.0;
  RPoint worst;
  nlohmann::json to_json(const std::string& op) const;
};

struct GtResidual {
  ResidualReport first;   // d_i mu_k - d_i u/(mu_i - mu_k)
  ResidualReport second;  // d_i d_k u - 2 d_i u d_k u/(mu_i - mu_k)^2
};

// Centered differences on interior nodes, all ordered pairs i != k.
// SingularityError when |mu_i - mu_k| < sep anywhere on the grid.
GtResidual gt_residual(const SampledReduction& s, double sep = kSeparation);
// d_i lambda_k/(lambda_i - lambda_k) - d_i mu_k/(mu_i - mu_k).
ResidualReport tsarev_check(const SampledReduction& s, double sep = kSeparation);
// d_k(mu_i d_i u) - d_i(mu_k d_k u): integrability of the potential v.
ResidualReport potential_residual(const SampledReduction& s);

// (mu_k - mu_i) F_u(mu_i, u) - [F(mu_k, u) - F(mu_i, u)]/(mu_k - mu_i) + F_mu(mu_i, u).
double ansatz_residual(const std::function<double(double, double)>& F, double mu_i, double mu_k, double u, double h = 1e-5);

// Tabulated fixtures: {"N":2,"kind":"cold_plasma", "grid":{...}} or
// {"N":k,"tabulated":{"lo":[..],"hi":[..],"n":[..],"mu":[[..]..],"u":[..]}}.
SampledReduction fixture_from_json(const nlohmann::json& j);

// --- one-component hodograph ---------------------------------------------

struct N1Model {
  std::function<double(double)> mu, dmu, u, du;
  double lambda(double r) const { return mu(r) * mu(r) + u(r); }
  double dlambda(double r) const { return 2 * mu(r) * dmu(r) + du(r); }
};

N1Model n1_identity_model();  // mu = u = r

// Moments A^n = a_n(r) of a one-component reduction with polynomial mu(r),
// u(r) in variable 0: a_0 = u, a_{n+1}' = mu a_n' - n a_{n-1} u', a_n(0) = 0.
std::vector<Poly> n1_moments(const Poly& mu, const Poly& u, int count);

// Either the inverse initial profile X0 on [r_lo, r_hi] (strictly increasing)
// or a periodic forward profile r0(x) with its derivative.
struct N1Profile {
  enum class Kind { inverse, forward } kind = Kind::inverse;
  std::function<double(double)> f, df;
  double r_lo = 0.0, r_hi = 1.0;
  double period = 0.0;
};

struct N1Point {
  double r, u, v;
};

struct N1Options {
  double r_ref = 0.0;
  int monotone_samples = 64;
};

// r solves x = X0(r) + mu(r) s + lambda(r) y (inverse profile) or
// r = r0(x - mu(r) s - lambda(r) y) (forward profile). ShockError once the
// characteristic map folds.
std::vector<N1Point> n1_solve(const N1Model& m, const N1Profile& p, const std::vector<std::array<double, 3>>& xsy,
                              const N1Options& opt = {});

struct N1Fields {
  Field3<double> r, u, v;
};

N1Fields n1_fields(const N1Model& m, const N1Profile& p, const PeriodicGrid& x, double s0, double ds, int ns, double y0,
                   double dy, int ny, const N1Options& opt = {});

// --- chordal-type system on r-space --------------------------------------

struct LoewnerPathResult {
  cplx z;
  double min_separation;
};

// Integrates d z = sum_i d_i u dr^i/(mu_i - z) along the polyline r_path from z(r_path[0]) = z0.
LoewnerPathResult loewner_system_integrate(const ReductionState& s, cplx z0, const std::vector<RPoint>& r_path,
                                           const OdeOptions& opt = {}, double sep = kSeparation);

// |z_A - z_B| for the two axis-ordered staircase paths from a to b.
double path_independence(const ReductionState& s, cplx z0, const RPoint& a, const RPoint& b, const OdeOptions& opt = {});

// Z(r) for N = 1 tabulated with its derivative on [lo, hi] and interpolated by
// cubic Hermite; used to lift z onto (x, s, y) fields.
class N1Potential {
 public:
  N1Potential(const N1Model& m, cplx z_at_ref, double r_ref, double lo, double hi, int samples = 4096);
  cplx operator()(double r) const;

 private:
  N1Model m_;
  double lo_, h_;
  std::vector<cplx> z_;
};

Field3<cplx> lift(const N1Potential& z, const Field3<double>& r);

struct PairResidual {
  Residual3 first;
  Residual3 second;
};

// z_s + (z^2/2 + u)_x and z_y + (z^3/3 + u z + v)_x.
PairResidual conservation_pair_residual(const Field3<double>& u, const Field3<double>& v, const Field3<cplx>& z);
// v_x + u_s and v_s - u_y - u u_x.
PairResidual dkp_residual(const Field3<double>& u, const Field3<double>& v);

// d_{t_n} z = d_x Phi_{n+1}(z)/(n+1) in physical times, Faber data b_1 = -H^0,
// b_2 = -H^1. OrderError for n > 2.
Residual3 vertex_flows(const Field3<double>& h0, const Field3<double>& h1, const Field3<cplx>& z, int n);

// Modified system on N = 1 data along an r-grid:
//   d z~/dr - z~ dH/dr/(mu - z~ - H), z~ = z - H^{-1}.
ResidualReport modified_loewner_check(const N1Model& m, const N1Potential& z, const N1Potential& hm1, double lo, double hi,
                                      int n, double sep = kSeparation);
// z~_s + (z~^2/2 + H^{-1} z~)_x.
Residual3 modified_conservation_residual(const Field3<cplx>& zt, const Field3<cplx>& hm1);

// w^i = 1/(mu_i(r) - z).
std::vector<cplx> commuting_reduction_velocity(const ReductionState& s, const RPoint& r, cplx z, double sep = kSeparation);

}  // namespace bl
