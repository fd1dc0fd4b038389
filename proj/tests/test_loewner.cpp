#include "bl/loewner.hpp"

#include "doctest.h"

#include <numbers>
#include <random>

using namespace bl;

namespace {

DrivingSpec vertical() { return DrivingSpec::single(TimeFunction::constant(0.0)); }

DrivingSpec random_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  return DrivingSpec::single(TimeFunction::sine(0.3 * U(rng), 0.5 * U(rng), 1.0 + 2.0 * std::abs(U(rng))),
                             TimeFunction::linear(0.0, 1.0 + std::abs(U(rng))), 1.0);
}

}  // namespace

TEST_CASE("vertical slit closed forms") {
  const auto spec = vertical();
  // g^2 = w^2 + 4t, f^2 = z^2 - 4t.
  CHECK(std::abs(loewner_g(spec, cplx(0, 3), 0, 1) - cplx(0, std::sqrt(5.0))) < 1e-8);
  CHECK(std::abs(map_f(spec, cplx(0, 3), 1) - cplx(0, std::sqrt(13.0))) < 1e-8);
  const double t[] = {0.0, 0.25, 1.0};
  const auto h = trace_hull(spec, t);
  CHECK(std::abs(h.tips[1] - cplx(0, 1)) < 1e-4);
  CHECK(std::abs(h.tips[2] - cplx(0, 2)) < 1e-4);
}

TEST_CASE("points on the slit are swallowed when the tip passes") {
  const auto tr = solve_ode_point(vertical(), cplx(0, 2), 0, 1.5);
  CHECK(tr.swallowed);
  CHECK(tr.swallow_time == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(loewner_g(vertical(), cplx(0, 1), 0, 1), DomainError);
}

TEST_CASE("semigroup and inverse") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = random_spec(rng);
    const cplx w(0.3, 1.2);
    const cplx full = loewner_g(spec, w, 0.0, 1.0);
    const cplx split = loewner_g(spec, loewner_g(spec, w, 0.0, 0.4), 0.4, 1.0);
    CHECK(std::abs(full - split) < 1e-8);
    CHECK(std::abs(map_f(spec, full, 1.0) - w) < 1e-8);
  }
}

TEST_CASE("parallel map evaluation equals the serial reference") {
  const auto spec = DrivingSpec::single(TimeFunction::sine(0.0, 1.0, 3.0));
  std::vector<cplx> z;
  for (int i = 0; i < 40; ++i) z.emplace_back(-2.0 + 0.1 * i, 0.3 + 0.02 * i);
  const auto a = map_f_many_serial(spec, z, 1.0), b = map_f_many(spec, z, 1.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("series coefficients of the vertical slit") {
  // sqrt(w^2 + 4t) = w + 2t/w - 2t^2/w^3 + 4t^3/w^5 - ...
  const auto s = evolve_series(vertical(), 6, 1.0);
  const std::vector<double> expect{2.0, 0.0, -2.0, 0.0, 4.0, 0.0};
  for (std::size_t n = 0; n < 6; ++n) CHECK(s.b.back()[n] == doctest::Approx(expect[n]).epsilon(1e-10));
  CHECK(s.a0().back() == doctest::Approx(-2.0));
  const auto c = laurent_coefficients([](cplx z) { return map_f(vertical(), z, 1.0); }, 10.0, 3);
  CHECK(c[0] == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(std::abs(c[1]) < 1e-8);
  CHECK(c[2] == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("coefficient flow identity") {
  for (const auto& spec : {DrivingSpec::single(TimeFunction::constant(0.3)), DrivingSpec::single(TimeFunction::sine(0, 1, 3))})
    CHECK(coefficient_flow_check(spec, 6).max_residual < 1e-6);
}

TEST_CASE("successive slits compose like one piecewise evolution") {
  SuccessiveSlits slits({{TimeFunction::constant(0.0), TimeFunction::linear(0.0, 2.0), 0.0, 0.5},
                         {TimeFunction::constant(0.5), TimeFunction::linear(-1.0, 2.0), 0.5, 1.0}});
  CHECK(slits.total_hcap() == doctest::Approx(2.0));
  const cplx w(0.2, 1.5);
  CHECK(std::abs(slits.f(slits.g(w)) - w) < 1e-8);
  CHECK(std::abs(slits.g(w) - loewner_g(slits.as_single_spec(), w, 0.0, 1.0)) < 1e-8);
}

TEST_CASE("vector-time reduction agrees with direct integration") {
  DrivingSpec spec;
  spec.branches = {{TimeFunction::constant(-0.5), TimeFunction::linear(0.5, 0.1)},
                   {TimeFunction::linear(0.5, 0.3), TimeFunction::linear(0.5, -0.1)}};
  spec.t_end = 1.0;
  const auto red = vector_time_reduce(spec);
  const cplx w(0.1, 2.0);
  CHECK(std::abs(loewner_g(red.reduced, w, 0.0, 1.0) - solve_vector_time_point(spec, w, 1.0)) < 1e-6);
  // t_2(1) = int_0^1 (0.5 - 0.1t)/(0.5 + 0.1t) dt = 10 ln 1.2 - 1.
  CHECK(red.t_k[1].back() == doctest::Approx(10 * std::log(1.2) - 1).epsilon(1e-8));
}

TEST_CASE("time splitting along straight characteristics") {
  std::vector<double> s{0.0, 0.2, 0.4}, x;
  for (int i = 0; i <= 10; ++i) x.push_back(2 * std::numbers::pi * i / 10);
  auto t0 = [](double q) { return 1.0 + 0.1 * std::sin(q); };
  const auto f = time_splitting_solve([](double) { return 0.7; }, t0, s, x);
  for (std::size_t j = 0; j < s.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(f.t_values[j][i] == doctest::Approx(t0(x[i] - 0.7 * s[j])).epsilon(1e-10));
}

TEST_CASE("driving spec JSON") {
  const auto spec = DrivingSpec::single(TimeFunction::sine(0.1, 0.5, 2.0));
  const auto back = DrivingSpec::from_json(spec.to_json());
  CHECK(back.branches[0].xi(0.3) == doctest::Approx(spec.branches[0].xi(0.3)));
  CHECK_THROWS_AS(DrivingSpec::from_json({{"branches", nlohmann::json::array()}}), ConfigError);
  CHECK_THROWS_AS(DrivingSpec::from_json({{"branches", {{{"xi", 0.0}}}}, {"bogus", 1}}), ConfigError);
}
