#pragma once

// Faber polynomials of a normalized map g(w) = w + sum_{n>=1} b_n w^{-n}:
// the recurrence construction and the log generating-function route.

#include "bl/error.hpp"
#include "bl/laurent.hpp"
#include "bl/series.hpp"

#include <vector>

namespace bl {

template <class T>
struct FaberPolynomial {
  int index = 0;
  std::vector<T> coeffs;  // ascending powers of w, size index+1
};

// Phi_0..Phi_{n_max} from b = (b_1, ..., b_m):
//   Phi_0 = 1, Phi_1 = w,
//   Phi_{n+1} = w Phi_n - sum_{k=1}^{n-1} b_{n-k} Phi_k - (n+1) b_n.
template <class T>
std::vector<FaberPolynomial<T>> faber_all(const std::vector<T>& b, int n_max) {
  if (n_max < 0) throw PreconditionError("faber_all: negative degree");
  if (n_max > static_cast<int>(b.size()))
    throw OrderError("faber_all: need b_1..b_" + std::to_string(n_max) + ", have " + std::to_string(b.size()));
  auto bk = [&](int k) -> const T& { return b[static_cast<std::size_t>(k - 1)]; };
  std::vector<FaberPolynomial<T>> phi;
  phi.push_back({0, {T(1)}});
  if (n_max >= 1) phi.push_back({1, {T(0), T(1)}});
  for (int n = 1; n < n_max; ++n) {
    FaberPolynomial<T> next{n + 1, std::vector<T>(static_cast<std::size_t>(n) + 2, T(0))};
    const auto& cur = phi[static_cast<std::size_t>(n)].coeffs;
    for (std::size_t e = 0; e < cur.size(); ++e) next.coeffs[e + 1] += cur[e];
    for (int k = 1; k <= n - 1; ++k) {
      const auto& pk = phi[static_cast<std::size_t>(k)].coeffs;
      for (std::size_t e = 0; e < pk.size(); ++e) next.coeffs[e] -= bk(n - k) * pk[e];
    }
    next.coeffs[0] -= mul_int(bk(n), n + 1);
    phi.push_back(std::move(next));
  }
  return phi;
}

template <class T, class X>
X evaluate(const FaberPolynomial<T>& p, const X& x) {
  X acc(0);
  for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * x + X(*it);
  return acc;
}

template <class T>
FaberPolynomial<T> derivative(const FaberPolynomial<T>& p) {
  FaberPolynomial<T> d{std::max(p.index - 1, 0), {}};
  if (p.coeffs.size() <= 1) {
    d.coeffs = {T(0)};
    return d;
  }
  for (std::size_t e = 1; e < p.coeffs.size(); ++e) d.coeffs.push_back(mul_int(p.coeffs[e], static_cast<long>(e)));
  return d;
}

// Phi_n'(xi).
template <class T, class X>
X faber_derivative(const FaberPolynomial<T>& p, const X& xi) {
  return evaluate(derivative(p), xi);
}

// Phi_n(xi), n = 0..n_max, read off log((g(w) - xi)/w) = -sum Phi_n(xi)/(n w^n).
// g is given as an AsymptoticSeries whose coeffs[n-1] = b_n. Throws
// DomainError when cancellation in the extraction exceeds the tolerance.
std::vector<double> faber_via_log(const AsymptoticSeries<double>& g, double xi, int n_max, double tol = 1e-12);

// Coefficients of 1/(g(w) - xi) = sum_{n>=1} c_n w^{-n} by direct series
// division; out[n] = c_n for n = 1..n_max and out[0] = 0.
std::vector<double> reciprocal_shift_coefficients(const AsymptoticSeries<double>& g, double xi, int n_max);

// b_n as an AsymptoticSeries tail (coeffs[n-1] = b_n).
inline AsymptoticSeries<double> map_from_b(const std::vector<double>& b) {
  return AsymptoticSeries<double>(b.empty() ? std::vector<double>{0.0} : b);
}

}  // namespace bl
