#pragma once

// dKP hierarchy flows on moment fields, Benney chain evolution under
// closures, Kupershmidt-Manin structure, dKP/ZK and modified-chain residuals.

#include "bl/exact.hpp"
#include "bl/kinetic.hpp"
#include "bl/ode.hpp"

#include "json.hpp"

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bl {

using cplx = std::complex<double>;

// Time labels: t_0 = x always. In the physical convention s = -t_1 and
// y = -t_2; in the hierarchy convention flows are reported in t_n itself.
enum class Convention { hierarchy, physical };

struct HierarchyTimes {
  Convention convention = Convention::physical;
  // Factor converting d/dt_n into the reported time derivative.
  int sign(int n) const { return (convention == Convention::physical && (n == 1 || n == 2)) ? -1 : 1; }
  std::string label(int n) const;
  nlohmann::json metadata() const;
};

// --- Lax flows ---------------------------------------------------------------

// d A^m / d t_n for m = 0..N-n at every grid point, from
// d lambda/d t_n = {L_{n+1}, lambda}; x-derivatives spectral.
std::vector<std::vector<double>> lax_flow(const MomentField& field, int n, HierarchyTimes times = {});

// Same flow as exact differential polynomials in the jet variables
// A^m_{x..x} = jet(m, j).
std::vector<Poly> lax_flow_symbolic(int N, int n, HierarchyTimes times = {});

// -(A^{m+1}_x + m A^{m-1} A^0_x), m = 0..N-1 (the Benney chain right side in s).
std::vector<Poly> benney_rhs_symbolic(int N);

// Coefficients (ascending powers of z) of
//   D_b L_a - D_a L_b + {L_a, L_b},  D_a L_b = (lambda^{b-1} {L_a, lambda})_{>=0},
// i.e. compatibility of the flows generated by L_a and L_b.
std::vector<Poly> commutation_symbolic(int N, int a, int b);
// Numeric version on a field; returns the max coefficient residual.
double commutation_check(const MomentField& field, int a, int b);

// --- chain evolution ---------------------------------------------------------

// Supplies A^{N+1}(x) from the current rows A^0..A^N at time s.
using Closure = std::function<std::vector<double>(double s, const std::vector<std::vector<double>>& A)>;

// A^{N+1} = (A^1)^{N+1} / (A^0)^N.
Closure cold_plasma_closure();
// One-component reduction: A^n = a_n(r) with r recovered from A^0 = a_0(r)
// (a_0 strictly monotone on [r_lo, r_hi]); `a_of_r` must hold a_0..a_{N+1}.
Closure n1_closure(std::vector<std::function<double(double)>> a_of_r, double r_lo, double r_hi);
// A^{N+1} interpolated (cubic in s) from a kinetic moment history.
Closure kinetic_feed_closure(std::vector<MomentField> history);

struct ChainHistory {
  std::vector<MomentField> slices;
  std::string closure;
  bool halted = false;
  std::string diagnostic;
};

// Method of lines in physical time s with classical RK4, recording every
// `record_every` steps. Halts (not throws) once max |A| exceeds 1e6.
ChainHistory evolve_chain(const MomentField& init, const Closure& closure, double s_end, double ds, int record_every = 1,
                          std::string closure_name = "custom");

struct ShallowWater {
  std::vector<double> eta;
  std::vector<double> v;
};

// eta_s + (eta v)_x = 0, v_s + v v_x + eta_x = 0 with spectral x and the
// adaptive Dormand-Prince integrator.
ShallowWater shallow_water_reference(const PeriodicGrid& grid, ShallowWater init, double s_end, const OdeOptions& opt = {});

// --- conservation and Hamiltonian structure ---------------------------------

std::vector<double> conserved_integrals(const MomentField& field);

// {A^m, A^n}(test) = -m A^{m+n-1} test_x - n (A^{m+n-1} test)_x.
std::vector<double> km_bracket_apply(const MomentField& field, int m, int n, std::span<const double> test);
Poly km_bracket_symbolic(int m, int n, const Poly& test);
// <f, {A^m,A^n} g> + <g, {A^n,A^m} f> with the periodic L2 pairing.
double km_skew_residual(const MomentField& field, int m, int n, std::span<const double> f, std::span<const double> g);

// Flow sum_n {A^m, A^n} dh/dA^n for the density h = (A^2 + (A^0)^2)/2,
// reported in s (rows m = 0..N-1).
std::vector<std::vector<double>> hamiltonian_flow(const MomentField& field);
std::vector<Poly> hamiltonian_flow_symbolic(int N);
// max |hamiltonian_flow - lax_flow(., 1)| over the rows both define.
double hamiltonian_flow_check(const MomentField& field);
nlohmann::json hamiltonian_metadata();

// --- fields over (x, s, y) ---------------------------------------------------

// data[(ix * ns + is) * ny + iy]; x periodic, s and y uniform.
template <class T>
struct Field3 {
  PeriodicGrid x;
  double s0 = 0.0, ds = 1.0;
  int ns = 0;
  double y0 = 0.0, dy = 1.0;
  int ny = 0;
  std::vector<T> data;

  std::size_t index(int ix, int is, int iy) const {
    return (static_cast<std::size_t>(ix) * static_cast<std::size_t>(ns) + static_cast<std::size_t>(is)) *
               static_cast<std::size_t>(ny) +
           static_cast<std::size_t>(iy);
  }
  T& operator()(int ix, int is, int iy) { return data[index(ix, is, iy)]; }
  const T& operator()(int ix, int is, int iy) const { return data[index(ix, is, iy)]; }
  double s(int is) const { return s0 + ds * is; }
  double y(int iy) const { return y0 + dy * iy; }
  bool same_grid(const Field3& o) const {
    return x.n == o.x.n && x.length == o.x.length && ns == o.ns && ny == o.ny && s0 == o.s0 && ds == o.ds && y0 == o.y0 &&
           dy == o.dy;
  }
};

template <class T>
Field3<T> make_field3(PeriodicGrid x, double s0, double ds, int ns, double y0, double dy, int ny,
                      const std::function<T(double, double, double)>& f) {
  Field3<T> out{x, s0, ds, ns, y0, dy, ny, {}};
  out.data.resize(static_cast<std::size_t>(x.n) * static_cast<std::size_t>(ns) * static_cast<std::size_t>(ny));
  for (int ix = 0; ix < x.n; ++ix)
    for (int is = 0; is < ns; ++is)
      for (int iy = 0; iy < ny; ++iy) out(ix, is, iy) = f(x.x(ix), out.s(is), out.y(iy));
  return out;
}

// Pointwise residual on interior (s, y) nodes, all x.
struct Residual3 {
  std::vector<double> values;
  double max = 0.0;
  double l2 = 0.0;
};

// x-derivative (spectral) of a Field3 and centered s/y derivatives on the
// interior; shared by the residual evaluators of this and the reduction module.
template <class T>
Field3<T> field_dx(const Field3<T>& f);
template <class T>
T field_ds(const Field3<T>& f, int ix, int is, int iy);
template <class T>
T field_dy(const Field3<T>& f, int ix, int is, int iy);

Residual3 collect_residual(const std::function<cplx(int, int, int)>& r, const PeriodicGrid& x, int ns, int ny);

// u_ss + (u_y + u u_x)_x.
Residual3 zk_residual(const Field3<double>& u);

// --- modified chain ----------------------------------------------------------

// Polynomial table between B^0..B^K and H^{-1}..H^{K-1}.
// In b_of_h, variable j+1 stands for H^j; in h_of_b, variable k stands for B^k.
struct SubstitutionTable {
  int K = 0;
  std::vector<Poly> b_of_h;  // B^0..B^K
  std::vector<Poly> h_of_b;  // H^{-1}..H^{K-1} (index j+1)
};

// Derived from the modified chain and the conservative H-chain by integrating
// the closed one-form row by row. Throws if a row fails to be exact.
SubstitutionTable substitution_table(int K);

struct ModifiedMomentField {
  PeriodicGrid grid;
  std::vector<std::vector<cplx>> B;  // B^0..B^K
  double s = 0.0;
};

// h[j+1] = H^j rows, j = -1..K-1.
ModifiedMomentField to_modified(const PeriodicGrid& grid, const std::vector<std::vector<cplx>>& h, double s,
                                const SubstitutionTable& table);
std::vector<std::vector<cplx>> shadow_h(const ModifiedMomentField& field, const SubstitutionTable& table);

// Cold-plasma H^{-1}: the root of z + eta/(z - v) = 0 in the upper half-plane.
cplx cold_plasma_hm1(double eta, double v);

struct ChainResidual {
  std::vector<double> max_by_row;
  double max = 0.0;
  double l2 = 0.0;
};

ChainResidual modified_chain_residual(std::span<const ModifiedMomentField> history);

struct MdkpResidual {
  Residual3 first;
  Residual3 second;
};

// H^{-1}_s + (H^0 + (H^{-1})^2/2)_x and H^0_s - H^{-1}_y - (H^0 H^{-1} + (H^{-1})^3/3)_x.
MdkpResidual mdkp_residual(const Field3<cplx>& hm1, const Field3<cplx>& h0);

}  // namespace bl
