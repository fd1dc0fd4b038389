#pragma once

// Asymptotic series at infinity, z + c + sum_{n=0}^{N} c_n z^{-(n+1)}, and the
// operations the rest of the library builds on: products, composition,
// functional inversion and Lax polynomials (1/n)(lambda^n)_{>=0}.
//
// Everything is templated on the scalar so the same code runs in double
// precision (PDE pipelines), complex arithmetic, exact rationals and exact
// multivariate polynomials (symbolic identities).

#include "bl/error.hpp"
#include "bl/laurent.hpp"

#include <string>
#include <vector>

namespace bl {

template <class T>
struct AsymptoticSeries {
  int order = 0;
  T const_term = T(0);
  std::vector<T> coeffs;  // coeffs[n] multiplies z^{-(n+1)}, n = 0..order

  AsymptoticSeries() : coeffs(1, T(0)) {}
  explicit AsymptoticSeries(std::vector<T> c) : order(static_cast<int>(c.size()) - 1), coeffs(std::move(c)) {
    if (coeffs.empty()) throw PreconditionError("AsymptoticSeries needs at least one coefficient");
  }

  static AsymptoticSeries identity(int n) { return AsymptoticSeries(std::vector<T>(static_cast<std::size_t>(n) + 1, T(0))); }

  bool normalized() const { return const_term == T(0); }

  Laurent<T> laurent() const {
    Laurent<T> s(1, -(order + 1), -(order + 1));
    s.ref(1) = T(1);
    s.ref(0) = const_term;
    for (int n = 0; n <= order; ++n) s.ref(-(n + 1)) = coeffs[static_cast<std::size_t>(n)];
    return s;
  }

  // Reads z + c + sum c_n z^{-(n+1)} back out of a Laurent series with a monic
  // z^1 term, keeping `n_order` tail coefficients.
  static AsymptoticSeries from_laurent(const Laurent<T>& s, int n_order) {
    if (s.hi() > 1) throw DomainError("series has terms above z^1");
    if (!(s[1] == T(1))) throw DomainError("series is not monic in z");
    AsymptoticSeries out = identity(n_order);
    out.const_term = s[0];
    for (int n = 0; n <= n_order; ++n) out.coeffs[static_cast<std::size_t>(n)] = s[-(n + 1)];
    return out;
  }

  AsymptoticSeries truncated(int n_order) const {
    if (n_order > order) throw OrderError("cannot extend a series beyond its declared order");
    AsymptoticSeries out = *this;
    out.coeffs.resize(static_cast<std::size_t>(n_order) + 1);
    out.order = n_order;
    return out;
  }
};

template <class T>
struct LaxPolynomial {
  int degree = 0;
  std::vector<T> coeffs;  // ascending powers of z
};

// Product truncated at z^{-(N+1)} (or higher if the inputs do not determine
// that coefficient). The polynomial part is available via polynomial_part().
template <class T>
Laurent<T> mul(const AsymptoticSeries<T>& a, const AsymptoticSeries<T>& b, int n_order) {
  if (n_order > std::min(a.order, b.order)) throw OrderError("mul: N exceeds input order");
  return (a.truncated(n_order).laurent() * b.truncated(n_order).laurent()).truncated(-(n_order + 1));
}

// outer(inner(z)) for outer = z + c + sum c_n w^{-(n+1)}; inner is any series
// with a monic z^1 leading term.
template <class T>
Laurent<T> compose(const AsymptoticSeries<T>& outer, const Laurent<T>& inner, int n_order) {
  const int floor = -(n_order + 1);
  Laurent<T> recip = inner.reciprocal(floor);
  Laurent<T> out = inner + Laurent<T>::monomial(0, outer.const_term);
  Laurent<T> power = recip;
  const int top = std::min(outer.order, n_order);
  for (int n = 0; n <= top; ++n) {
    out = out + power.scaled(outer.coeffs[static_cast<std::size_t>(n)]);
    power = (power * recip).truncated(floor);
  }
  return out.truncated(floor);
}

template <class T>
AsymptoticSeries<T> compose(const AsymptoticSeries<T>& outer, const AsymptoticSeries<T>& inner, int n_order) {
  const int n = std::min({n_order, outer.order, inner.order});
  return AsymptoticSeries<T>::from_laurent(compose(outer, inner.laurent(), n), n);
}

// Functional inverse by iterative substitution: solves w = z + sum c_n z^{-(n+1)}
// for z = w + sum d_n w^{-(n+1)}. Each sweep fixes one more coefficient.
template <class T>
AsymptoticSeries<T> invert(const AsymptoticSeries<T>& s) {
  if (!s.normalized()) throw PreconditionError("invert: series must have zero constant term");
  const int n_order = s.order;
  const int floor = -(n_order + 1);
  Laurent<T> w = Laurent<T>::monomial(1, T(1));
  Laurent<T> z = w.truncated(floor);
  for (int sweep = 0; sweep <= n_order + 1; ++sweep) {
    Laurent<T> recip = z.reciprocal(floor);
    Laurent<T> power = recip;
    Laurent<T> tail(floor, floor, floor);
    for (int n = 0; n <= n_order; ++n) {
      tail = tail + power.scaled(s.coeffs[static_cast<std::size_t>(n)]);
      power = (power * recip).truncated(floor);
    }
    z = (w - tail).truncated(floor);
  }
  return AsymptoticSeries<T>::from_laurent(z, n_order);
}

// H^n of z(lambda) = lambda - sum H^n lambda^{-(n+1)} for lambda = z + sum A^n z^{-(n+1)}.
template <class T>
std::vector<T> inverse_coefficients(const std::vector<T>& a) {
  AsymptoticSeries<T> inv = invert(AsymptoticSeries<T>(a));
  std::vector<T> h;
  h.reserve(inv.coeffs.size());
  for (const T& c : inv.coeffs) h.push_back(T(0) - c);
  return h;
}

// A^n recovered from H^n (the inverse direction of inverse_coefficients).
template <class T>
std::vector<T> moments_from_h(const std::vector<T>& h) {
  std::vector<T> neg;
  neg.reserve(h.size());
  for (const T& c : h) neg.push_back(T(0) - c);
  return invert(AsymptoticSeries<T>(neg)).coeffs;
}

// L_n = (1/n) (lambda^n)_{>=0}. Exact while n <= N + 2.
template <class T>
LaxPolynomial<T> lax(const AsymptoticSeries<T>& lambda, int n) {
  if (n < 1 || n > lambda.order + 2)
    throw OrderError("lax: index " + std::to_string(n) + " needs 1 <= n <= N+2 = " +
                     std::to_string(lambda.order + 2));
  Laurent<T> p = lambda.laurent().pow(n).polynomial_part();
  LaxPolynomial<T> out;
  out.degree = n;
  out.coeffs.resize(static_cast<std::size_t>(n) + 1, T(0));
  for (int e = 0; e <= n; ++e) out.coeffs[static_cast<std::size_t>(e)] = div_int(p[e], n);
  return out;
}

template <class T>
Laurent<T> to_laurent(const LaxPolynomial<T>& p) {
  Laurent<T> s(p.degree, 0, kExact);
  for (int e = 0; e <= p.degree; ++e) s.ref(e) = p.coeffs[static_cast<std::size_t>(e)];
  return s;
}

}  // namespace bl
