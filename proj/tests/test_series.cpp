#include "bl/exact.hpp"
#include "bl/series.hpp"

#include "doctest.h"

#include <random>

using namespace bl;

namespace {

// Lagrange-Buermann: H^n = [z^{-1}] lambda(z)^{n+1} / (n+1).
std::vector<Poly> lagrange_h(int N) {
  std::vector<Poly> a;
  for (int n = 0; n <= N; ++n) a.push_back(Poly::var(n));
  const Laurent<Poly> lam = AsymptoticSeries<Poly>(a).laurent();
  std::vector<Poly> h;
  for (int n = 0; n <= N; ++n) h.push_back(lam.pow(n + 1)[-1] / (n + 1));
  return h;
}

}  // namespace

TEST_CASE("laurent floor refuses unknown coefficients") {
  Laurent<double> s(1, -3, -3);
  s.ref(1) = 1.0;
  s.ref(-3) = 2.0;
  CHECK(s[-3] == 2.0);
  CHECK(s[5] == 0.0);
  CHECK_THROWS_AS(s[-4], OrderError);
  const auto r = s.reciprocal();
  CHECK(r.valid() == -5);
  CHECK_THROWS_AS(r[-6], OrderError);
  const auto prod = (s * r).truncated(-5);
  CHECK(prod[0] == doctest::Approx(1.0));
  CHECK(prod[-4] == doctest::Approx(0.0));
}

TEST_CASE("inversion matches Lagrange-Buermann symbolically") {
  const int N = 6;
  std::vector<Poly> a;
  for (int n = 0; n <= N; ++n) a.push_back(Poly::var(n));
  const auto h = inverse_coefficients(a);
  const auto ref = lagrange_h(N);
  for (int n = 0; n <= N; ++n) CHECK(h[static_cast<std::size_t>(n)] == ref[static_cast<std::size_t>(n)]);
  const Poly A0 = Poly::var(0), A1 = Poly::var(1), A2 = Poly::var(2);
  CHECK(h[2] == A2 + A0 * A0);
  CHECK(h[3] == Poly::var(3) + Poly(3) * A0 * A1);
  CHECK(h[4] == Poly::var(4) + Poly(4) * A0 * A2 + Poly(2) * A1 * A1 + Poly(2) * A0 * A0 * A0);
}

TEST_CASE("moments_from_h undoes inverse_coefficients exactly") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-9, 9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rational> a;
    for (int n = 0; n < 8; ++n) a.push_back(Rational(d(rng), 1 + std::abs(d(rng))));
    CHECK(moments_from_h(inverse_coefficients(a)) == a);
  }
}

TEST_CASE("compose with the inverse is the identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(11);
    for (auto& v : c) v = U(rng);
    const AsymptoticSeries<double> s(c);
    const auto id = compose(s, invert(s), 10);
    CHECK(id.const_term == doctest::Approx(0.0));
    for (double v : id.coeffs) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("operations refuse to exceed the declared order") {
  const AsymptoticSeries<double> a(std::vector<double>{1.0, 2.0}), b(std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(mul(a, b, 2), OrderError);
  CHECK_THROWS_AS(a.truncated(3), OrderError);
  CHECK_THROWS_AS(lax(a, 4), OrderError);
  AsymptoticSeries<double> shifted = a;
  shifted.const_term = 1.0;
  CHECK_THROWS_AS(invert(shifted), PreconditionError);
}

TEST_CASE("lax polynomials") {
  std::vector<Poly> a;
  for (int n = 0; n <= 4; ++n) a.push_back(Poly::var(n));
  const AsymptoticSeries<Poly> lam(a);
  const auto L2 = lax(lam, 2);
  CHECK(L2.coeffs == std::vector<Poly>{Poly::var(0), Poly(0), Poly(Rational(1, 2))});
  const auto L3 = lax(lam, 3);
  CHECK(L3.coeffs[0] == Poly::var(1));
  CHECK(L3.coeffs[1] == Poly::var(0));
  CHECK(L3.coeffs[3] == Poly(Rational(1, 3)));
}

TEST_CASE("rational parsing") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-0.125") == Rational(-1, 8));
  CHECK(parse_rational("2.5e-1") == Rational(1, 4));
  CHECK(parse_rational("7") == Rational(7));
  CHECK(parse_rational("012/010") == Rational(6, 5));
  CHECK_THROWS_AS(parse_rational("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_rational("abc"), ConfigError);
  CHECK(to_string(Rational(-6, 4)) == "-3/2");
}

TEST_CASE("polynomial jets") {
  const Poly u = jet(0), ux = jet(0, 1);
  CHECK(total_dx(u * u) == Poly(2) * u * ux);
  CHECK(substitute(u * u + ux, {Poly(2)}).terms().size() == 2);
  CHECK((u * u).evaluate({3.0}) == doctest::Approx(9.0));
  CHECK(((u + Poly(1)) * (u - Poly(1))) == u * u - Poly(1));
}
