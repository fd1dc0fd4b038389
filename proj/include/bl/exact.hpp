#pragma once

// Exact scalars for the symbolic identity checks: arbitrary-precision
// rationals and sparse multivariate polynomials over them.

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace bl {

using Rational = boost::multiprecision::cpp_rational;

// "p/q" (or "p" when q == 1).
std::string to_string(const Rational& r);
Rational parse_rational(const std::string& text);

// Sparse polynomial in variables x_0, x_1, ... with rational coefficients.
// Monomials are exponent vectors with trailing zeros stripped, so equality of
// polynomials is equality of their term maps.
class Poly {
 public:
  using Monomial = std::vector<int>;
  using Terms = std::map<Monomial, Rational>;

  Poly() = default;
  Poly(int c) : Poly(Rational(c)) {}  // NOLINT: scalar promotion is intended
  Poly(const Rational& c);             // NOLINT

  static Poly var(int id, int power = 1);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  // Largest variable id that appears, or -1.
  int max_var() const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Poly& o);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Poly& b) { return a *= b; }
  friend Poly operator-(Poly a) { return a *= Poly(-1); }
  friend Poly operator/(Poly a, long d);
  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }

  Poly partial(int id) const;
  // Coefficient of x_id^power as a polynomial in the remaining variables.
  Poly coefficient(int id, int power) const;
  // Total degree of the lowest/highest monomial; 0 for constants.
  int total_degree() const;
  bool has_integer_coefficients() const;
  double evaluate(const std::vector<double>& values) const;

  std::string to_string(const std::function<std::string(int)>& name) const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  Terms terms_;
};

// p(values) for any scalar with +, * and construction from double.
template <class T>
T evaluate_as(const Poly& p, const std::vector<T>& values) {
  T sum(0.0);
  for (const auto& [m, c] : p.terms()) {
    T term(c.template convert_to<double>());
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (i >= values.size()) throw std::out_of_range("evaluate_as: missing value for variable " + std::to_string(i));
      for (int e = 0; e < m[i]; ++e) term *= values[i];
    }
    sum += term;
  }
  return sum;
}

// p with variable i replaced by values[i] (variables beyond values.size() kept).
Poly substitute(const Poly& p, const std::vector<Poly>& values);

// Jet variables for differential-polynomial identities in one space variable:
// the j-th x-derivative of moment field number m is variable m*kJetStride + j.
inline constexpr int kJetStride = 16;
inline int jet_id(int field, int derivative) { return field * kJetStride + derivative; }
inline Poly jet(int field, int derivative = 0) { return Poly::var(jet_id(field, derivative)); }

// Total x-derivative: D(x_{m,j}) = x_{m,j+1}.
Poly total_dx(const Poly& p);

std::string jet_name(int id, const std::string& symbol = "A");

}  // namespace bl
