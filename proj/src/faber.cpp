#include "bl/faber.hpp"

#include <cmath>
#include <limits>

namespace bl {

namespace {

// u = (g(w) - xi)/w - 1 as an exact Laurent series in w (exponents <= -1).
Laurent<double> log_argument(const AsymptoticSeries<double>& g, double xi, bool absolute) {
  const int m = g.order + 1;  // g carries b_1..b_m
  Laurent<double> u(-1, -(m + 1), kExact);
  u.ref(-1) = absolute ? std::abs(g.const_term - xi) : g.const_term - xi;
  for (int n = 1; n <= m; ++n) {
    const double b = g.coeffs[static_cast<std::size_t>(n - 1)];
    u.ref(-(n + 1)) = absolute ? std::abs(b) : b;
  }
  return u;
}

}  // namespace

std::vector<double> faber_via_log(const AsymptoticSeries<double>& g, double xi, int n_max, double tol) {
  if (n_max < 0) throw PreconditionError("faber_via_log: negative degree");
  if (!g.normalized()) throw PreconditionError("faber_via_log: map must be normalized");
  const int floor = -n_max;
  const Laurent<double> u = log_argument(g, xi, false).truncated(floor);
  const Laurent<double> ua = log_argument(g, xi, true).truncated(floor);

  // log(1+u) = sum_k (-1)^{k+1} u^k / k; u^k starts at w^{-k}.
  std::vector<double> value(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<double> magnitude(value.size(), 0.0);
  Laurent<double> pk = u;
  Laurent<double> pka = ua;
  for (int k = 1; k <= n_max; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    for (int n = k; n <= n_max; ++n) {
      value[static_cast<std::size_t>(n)] += sign * pk[-n] / k;
      magnitude[static_cast<std::size_t>(n)] += pka[-n] / k;
    }
    pk = (pk * u).truncated(floor);
    pka = (pka * ua).truncated(floor);
  }

  std::vector<double> phi(value.size(), 0.0);
  phi[0] = 1.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int n = 1; n <= n_max; ++n) {
    phi[static_cast<std::size_t>(n)] = -n * value[static_cast<std::size_t>(n)];
    const double err = static_cast<double>(n) * n * eps * magnitude[static_cast<std::size_t>(n)];
    const double scale = std::max(1.0, std::abs(phi[static_cast<std::size_t>(n)]));
    if (!std::isfinite(phi[static_cast<std::size_t>(n)]) || err > tol * scale)
      throw DomainError("faber_via_log: extraction of Phi_" + std::to_string(n) +
                        " is ill-conditioned (cancellation estimate " + std::to_string(err) + ")");
  }
  return phi;
}

std::vector<double> reciprocal_shift_coefficients(const AsymptoticSeries<double>& g, double xi, int n_max) {
  // g(w) - xi = w (1 + u); 1/(g - xi) = w^{-1} / (1 + u).
  Laurent<double> shifted(1, -(g.order + 1), kExact);
  shifted.ref(1) = 1.0;
  shifted.ref(0) = g.const_term - xi;
  for (int n = 0; n <= g.order; ++n) shifted.ref(-(n + 1)) = g.coeffs[static_cast<std::size_t>(n)];
  const Laurent<double> r = shifted.reciprocal(-n_max);
  std::vector<double> c(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int n = 1; n <= n_max; ++n) c[static_cast<std::size_t>(n)] = r[-n];
  return c;
}

}  // namespace bl
