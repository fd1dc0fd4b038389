#include "bl/reduction.hpp"

#include "doctest.h"

#include <boost/math/tools/roots.hpp>

#include <numbers>
#include <random>

using namespace bl;

namespace {

ReductionState warped_cold_plasma() {
  return reparametrize(cold_plasma_state(), {[](double p) { return 2 + p + 0.3 * std::sin(2 * p); },
                                             [](double p) { return -1 + p + 0.2 * p * p; }});
}

SampledReduction sampled(const ReductionState& s, double lo0, double lo1, double hi0, double hi1, int n) {
  auto out = sample(s, RGrid{{lo0, lo1}, {hi0, hi1}, {n, n}});
  attach_lambda(out, [](double m, double u) { return m * m + u; });
  return out;
}

N1Profile forward_profile() {
  N1Profile p;
  p.kind = N1Profile::Kind::forward;
  p.f = [](double x) { return 1 + 0.2 * std::sin(x); };
  p.df = [](double x) { return 0.2 * std::cos(x); };
  p.r_lo = 0.8;
  p.r_hi = 1.2;
  p.period = 2 * std::numbers::pi;
  return p;
}

}  // namespace

TEST_CASE("cold plasma satisfies Gibbons-Tsarev and Tsarev exactly on its natural grid") {
  const auto s = sampled(cold_plasma_state(), 2, -1, 3, 0, 33);
  const auto gt = gt_residual(s);
  CHECK(gt.first.max < 1e-9);
  CHECK(gt.second.max < 1e-9);
  CHECK(tsarev_check(s).max < 1e-9);
  CHECK(potential_residual(s).max < 1e-9);
}

TEST_CASE("reparametrized cold plasma converges at second order") {
  double prev = 0.0;
  for (int n : {33, 65}) {
    const auto s = sampled(warped_cold_plasma(), 0, 0, 1, 1, n);
    const double r = gt_residual(s).second.max;
    if (prev > 0) CHECK(std::log2(prev / r) > 1.8);
    prev = r;
  }
}

TEST_CASE("wrong dispersive relation fails Tsarev") {
  auto s = sample(cold_plasma_state(), RGrid{{2, -1}, {3, 0}, {17, 17}});
  attach_lambda(s, [](double m, double) { return m * m * m; });
  CHECK(tsarev_check(s).max > 1e-2);
}

TEST_CASE("characteristic speeds must stay separated") {
  const auto s = sample(cold_plasma_state(), RGrid{{-1, -1}, {1, 1}, {9, 9}});
  CHECK_THROWS_AS(gt_residual(s), SingularityError);
}

TEST_CASE("ansatz residual") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-2, 2);
  int bad = 0;
  for (int k = 0; k < 200; ++k) {
    double a = U(rng), b = U(rng);
    if (std::abs(a - b) < 0.05) b += 0.1;
    const double u = U(rng);
    CHECK(std::abs(ansatz_residual([](double m, double q) { return m * m + q; }, a, b, u)) < 1e-8);
    bad += std::abs(ansatz_residual([](double m, double) { return m * m * m; }, a, b, u)) > 1e-2;
  }
  CHECK(bad >= 198);
  CHECK(ansatz_residual([](double m, double) { return m * m * m; }, 0, 1, 0.3) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("one-component hodograph spot value") {
  N1Profile inv;
  inv.f = [](double r) { return r; };
  inv.df = [](double) { return 1.0; };
  inv.r_lo = -5;
  inv.r_hi = 5;
  const auto p = n1_solve(n1_identity_model(), inv, {{2.0, 1.0, 0.0}});
  CHECK(p[0].r == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p[0].u == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p[0].v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("one-component moments") {
  const auto a = n1_moments(Poly::var(0), Poly::var(0), 4);
  // mu = u = r: a_1' = r, a_2' = r a_1' - a_0 = r^2 - r.
  CHECK(a[0] == Poly::var(0));
  CHECK(a[1] == Poly(Rational(1, 2)) * Poly::var(0, 2));
  CHECK(a[2] == Poly(Rational(1, 3)) * Poly::var(0, 3) - Poly(Rational(1, 2)) * Poly::var(0, 2));
}

TEST_CASE("shock formation is reported") {
  N1Profile p = forward_profile();
  const PeriodicGrid x(64, 2 * std::numbers::pi);
  CHECK_THROWS_AS(n1_fields(n1_identity_model(), p, x, 10.0, 0.1, 3, 0.0, 0.1, 3), ShockError);
}

TEST_CASE("chordal-type system on r-space") {
  ReductionState s;
  s.N = 1;
  s.mu = {[](const RPoint& r) { return r[0]; }};
  s.u = [](const RPoint& r) { return r[0]; };
  // dz/dr = 1/(r - z), z(0) = 10: (z - r - 1) e^{-z} is constant.
  const auto res = loewner_system_integrate(s, 10.0, {{0.0}, {1.0}});
  const auto root = boost::math::tools::bisect([](double z) { return z - 11 * std::exp(z - 10); }, 9.0, 9.99,
                                               boost::math::tools::eps_tolerance<double>(52));
  CHECK(res.z.real() == doctest::Approx(0.5 * (root.first + root.second)).epsilon(1e-10));
  CHECK(path_independence(cold_plasma_state(), cplx(0.5, 1.0), {2.0, -1.0}, {3.0, 0.0}) < 1e-9);
  const auto w = commuting_reduction_velocity(s, {1.0}, cplx(0.0, 1.0));
  CHECK(std::abs(w[0] - 1.0 / cplx(1.0, -1.0)) < 1e-15);
}

TEST_CASE("dKP and ZK residuals converge at second order") {
  const auto m = n1_identity_model();
  const N1Potential Z(m, cplx(1.0, 2.0), 1.0, 0.7, 1.3);
  std::vector<double> dkp, zk, gen;
  for (double h : {0.02, 0.01}) {
    const auto F = n1_fields(m, forward_profile(), PeriodicGrid(64, 2 * std::numbers::pi), 0.5 - h, h, 3, 0.2 - h, h, 3);
    const auto z = lift(Z, F.r);
    const auto d = dkp_residual(F.u, F.v);
    dkp.push_back(std::max(d.first.max, d.second.max));
    zk.push_back(zk_residual(F.u).max);
    const auto g = conservation_pair_residual(F.u, F.v, z);
    gen.push_back(std::max(g.first.max, g.second.max));
  }
  CHECK(std::log2(dkp[0] / dkp[1]) > 1.8);
  CHECK(std::log2(zk[0] / zk[1]) > 1.8);
  CHECK(std::log2(gen[0] / gen[1]) > 1.8);
}

TEST_CASE("fixture parsing") {
  CHECK(fixture_from_json({{"N", 2}, {"kind", "cold_plasma"}, {"grid", {{"n", 9}}}}).u.size() == 81);
  CHECK_THROWS_AS(fixture_from_json({{"N", 3}, {"kind", "cold_plasma"}}), ConfigError);
  CHECK_THROWS_AS(fixture_from_json({{"N", 2}, {"kind", "warm"}}), ConfigError);
  CHECK_THROWS_AS(fixture_from_json({{"N", 2}, {"kind", "cold_plasma"}, {"extra", 1}}), ConfigError);
  const nlohmann::json tab{{"N", 1}, {"tabulated", {{"lo", {0.0}}, {"hi", {1.0}}, {"n", {3}}, {"mu", {{0.0, 0.5, 1.0}}}, {"u", {0.0, 0.5, 1.0}}}}};
  CHECK(fixture_from_json(tab).mu[0][1] == 0.5);
}
