#include "bl/hierarchy.hpp"
#include "bl/spectral.hpp"

#include "doctest.h"

#include <numbers>
#include <random>

using namespace bl;

namespace {

constexpr double kPi = std::numbers::pi;

MomentField random_field(int N, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-0.2, 0.2);
  MomentField f;
  f.grid = PeriodicGrid(n, 2 * kPi);
  f.N = N;
  for (int m = 0; m <= N; ++m) {
    const double c1 = U(rng), s2 = U(rng);
    std::vector<double> row;
    for (double x : f.grid.points()) row.push_back((m == 0 ? 1.0 : 0.0) + c1 * std::cos(x) + s2 * std::sin(2 * x));
    f.A.push_back(row);
  }
  return f;
}

bool all_zero(const std::vector<Poly>& v) {
  for (const auto& p : v)
    if (!p.is_zero()) return false;
  return true;
}

}  // namespace

TEST_CASE("first Lax flow is the Benney chain") {
  for (int N = 3; N <= 6; ++N) {
    const auto lax = lax_flow_symbolic(N, 1), benney = benney_rhs_symbolic(N), ham = hamiltonian_flow_symbolic(N);
    REQUIRE(lax.size() == benney.size());
    for (std::size_t m = 0; m < lax.size(); ++m) {
      CHECK(lax[m] == benney[m]);
      CHECK(ham[m] == benney[m]);
    }
  }
}

TEST_CASE("second flow in hierarchy times") {
  HierarchyTimes h;
  h.convention = Convention::hierarchy;
  const auto t2 = lax_flow_symbolic(4, 2, h);
  // dA^0/dt_2 = A^2_x + 2 A^0 A^0_x; y = -t_2 flips the sign.
  CHECK(t2[0] == jet(2, 1) + Poly(2) * jet(0) * jet(0, 1));
  CHECK(lax_flow_symbolic(4, 2)[0] == Poly(0) - t2[0]);
  CHECK_THROWS_AS(lax_flow_symbolic(3, 2), OrderError);
  CHECK(h.label(1) == "t1");
}

TEST_CASE("flows commute") {
  for (int a = 1; a <= 3; ++a)
    for (int b = a + 1; b <= 4; ++b) CHECK(all_zero(commutation_symbolic(6, a, b)));
  CHECK(commutation_check(random_field(6, 64, 1), 2, 3) < 1e-10);
}

TEST_CASE("numeric Lax flow against spectral Benney right side") {
  const auto f = random_field(5, 64, 3);
  const auto flow = lax_flow(f, 1);
  const auto a0x = spectral_dx(f.A[0], f.grid.length);
  for (int m = 0; m + 1 <= f.N; ++m) {
    const auto next = spectral_dx(f.A[static_cast<std::size_t>(m) + 1], f.grid.length);
    for (int i = 0; i < f.grid.n; ++i) {
      const double prev = m >= 1 ? f.A[static_cast<std::size_t>(m) - 1][static_cast<std::size_t>(i)] : 0.0;
      const double expect = -(next[static_cast<std::size_t>(i)] + m * prev * a0x[static_cast<std::size_t>(i)]);
      CHECK(flow[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK(hamiltonian_flow_check(f) < 1e-10);
}

TEST_CASE("Kupershmidt-Manin bracket is skew") {
  const auto f = random_field(5, 128, 9);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int m = 0; m <= 6; ++m)
    for (int n = 0; m + n - 1 <= 5; ++n) {
      std::vector<double> a, b;
      const double p = U(rng), q = U(rng);
      for (double x : f.grid.points()) {
        a.push_back(p * std::sin(x) + std::cos(3 * x));
        b.push_back(q * std::cos(2 * x) + std::sin(x));
      }
      CHECK(std::abs(km_skew_residual(f, m, n, a, b)) < 1e-10);
    }
  // {A^0, A^0} = 0 on the jet level for any test function.
  CHECK(km_bracket_symbolic(0, 0, jet(5)).is_zero());
}

TEST_CASE("conserved integrals are stable under the cold-plasma chain") {
  MomentField init;
  init.grid = PeriodicGrid(64, 2 * kPi);
  init.N = 3;
  init.A.assign(4, std::vector<double>(64));
  ShallowWater sw;
  for (int i = 0; i < 64; ++i) {
    const double x = init.grid.x(i), eta = 1 + 0.2 * std::cos(x), v = 0.1 * std::sin(x);
    sw.eta.push_back(eta);
    sw.v.push_back(v);
    for (int n = 0; n <= 3; ++n) init.A[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = eta * std::pow(v, n);
  }
  const auto hist = evolve_chain(init, cold_plasma_closure(), 0.2, 1e-3, 50, "cold_plasma");
  REQUIRE(!hist.halted);
  const auto ref = shallow_water_reference(init.grid, sw, 0.2);
  for (int i = 0; i < 64; ++i)
    CHECK(hist.slices.back().A[0][static_cast<std::size_t>(i)] == doctest::Approx(ref.eta[static_cast<std::size_t>(i)]).epsilon(1e-8));
  const auto I0 = conserved_integrals(hist.slices.front()), I1 = conserved_integrals(hist.slices.back());
  for (std::size_t n = 0; n < 3; ++n) CHECK(I1[n] == doctest::Approx(I0[n]).epsilon(1e-8));
}

TEST_CASE("chain halts instead of throwing on blow-up") {
  MomentField init = random_field(2, 16, 5);
  const Closure wild = [](double, const std::vector<std::vector<double>>& A) {
    std::vector<double> out(A[0].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1e9 * std::sin(static_cast<double>(i));
    return out;
  };
  const auto hist = evolve_chain(init, wild, 1.0, 0.01);
  CHECK(hist.halted);
  CHECK(!hist.diagnostic.empty());
}

TEST_CASE("modified substitution table") {
  const auto t = substitution_table(4);
  // Variable j+1 stands for H^j.
  const Poly Hm1 = Poly::var(0), H0 = Poly::var(1), H1 = Poly::var(2);
  CHECK(t.b_of_h[1] == H0);
  CHECK(t.b_of_h[2] == H1 - Hm1 * H0 + Poly(Rational(1, 12)) * Hm1 * Hm1 * Hm1);
  std::vector<Poly> h(t.h_of_b.begin(), t.h_of_b.end());
  for (std::size_t k = 0; k < t.b_of_h.size(); ++k) CHECK(substitute(t.b_of_h[k], h) == Poly::var(static_cast<int>(k)));
}

TEST_CASE("cold-plasma H^-1") {
  for (double eta : {0.5, 1.0, 2.0})
    for (double v : {-0.3, 0.0, 0.7}) {
      const cplx z = cold_plasma_hm1(eta, v);
      CHECK(z.imag() > 0);
      CHECK(std::abs(z + eta / (z - v)) < 1e-12);
    }
}

TEST_CASE("ZK residual picks up u_ss exactly") {
  const PeriodicGrid g(16, 2 * kPi);
  const auto u = make_field3<double>(g, 0.0, 0.1, 3, 0.0, 0.1, 3, [](double, double s, double y) { return 0.5 * s * s + y; });
  // u_ss = 1 and the flux term vanishes.
  CHECK(zk_residual(u).max == doctest::Approx(1.0).epsilon(1e-10));
}
