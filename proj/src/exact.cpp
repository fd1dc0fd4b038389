#include "bl/exact.hpp"

#include "bl/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bl {

std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

// Decimal digits with an optional sign; cpp_int alone would read "012" as octal.
boost::multiprecision::cpp_int parse_integer(std::string digits, const std::string& text) {
  bool negative = false;
  if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
    negative = digits[0] == '-';
    digits.erase(0, 1);
  }
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("malformed rational '" + text + "'");
  const auto nz = digits.find_first_not_of('0');
  boost::multiprecision::cpp_int v(nz == std::string::npos ? std::string("0") : digits.substr(nz));
  return negative ? boost::multiprecision::cpp_int(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos && text.find_first_of(".eE") != std::string::npos) {
      // Decimal literal, read exactly: mantissa digits over a power of ten.
      const auto epos = text.find_first_of("eE");
      std::string mant = text.substr(0, epos);
      long exp10 = epos == std::string::npos ? 0 : std::stol(text.substr(epos + 1));
      const auto dot = mant.find('.');
      if (dot != std::string::npos) {
        exp10 -= static_cast<long>(mant.size() - dot - 1);
        mant.erase(dot, 1);
      }
      Rational r{parse_integer(mant, text)};
      const Rational ten(10);
      for (long k = 0; k < std::abs(exp10); ++k) r = exp10 > 0 ? Rational(r * ten) : Rational(r / ten);
      return r;
    }
    if (slash == std::string::npos) return Rational(parse_integer(text, text));
    const auto p = parse_integer(text.substr(0, slash), text);
    const auto q = parse_integer(text.substr(slash + 1), text);
    if (q == 0) throw ConfigError("zero denominator in rational '" + text + "'");
    return Rational(p, q);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("malformed rational '" + text + "'");
  }
}

namespace {

void trim(Poly::Monomial& m) {
  while (!m.empty() && m.back() == 0) m.pop_back();
}

Poly::Monomial multiply(const Poly::Monomial& a, const Poly::Monomial& b) {
  Poly::Monomial out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace

Poly::Poly(const Rational& c) {
  if (c != 0) terms_.emplace(Monomial{}, c);
}

Poly Poly::var(int id, int power) {
  Poly p;
  Monomial m(static_cast<std::size_t>(id) + 1, 0);
  m[static_cast<std::size_t>(id)] = power;
  trim(m);
  p.terms_.emplace(std::move(m), Rational(1));
  return p;
}

int Poly::max_var() const {
  int best = -1;
  for (const auto& [m, c] : terms_) best = std::max(best, static_cast<int>(m.size()) - 1);
  return best;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Poly& Poly::operator+=(const Poly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Poly& Poly::operator*=(const Poly& o) {
  Poly out;
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) out.add_term(multiply(ma, mb), ca * cb);
  terms_ = std::move(out.terms_);
  return *this;
}

Poly operator/(Poly a, long d) {
  if (d == 0) throw DomainError("Poly division by zero");
  for (auto& [m, c] : a.terms_) c /= d;
  return a;
}

Poly Poly::partial(int id) const {
  Poly out;
  const auto k = static_cast<std::size_t>(id);
  for (const auto& [m, c] : terms_) {
    if (k >= m.size() || m[k] == 0) continue;
    Monomial d = m;
    const int e = d[k]--;
    trim(d);
    out.add_term(d, c * e);
  }
  return out;
}

Poly Poly::coefficient(int id, int power) const {
  Poly out;
  const auto k = static_cast<std::size_t>(id);
  for (const auto& [m, c] : terms_) {
    const int e = k < m.size() ? m[k] : 0;
    if (e != power) continue;
    Monomial d = m;
    if (k < d.size()) d[k] = 0;
    trim(d);
    out.add_term(d, c);
  }
  return out;
}

int Poly::total_degree() const {
  int best = 0;
  for (const auto& [m, c] : terms_) {
    int d = 0;
    for (int e : m) d += e;
    best = std::max(best, d);
  }
  return best;
}

bool Poly::has_integer_coefficients() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) {
    return boost::multiprecision::denominator(t.second) == 1;
  });
}

double Poly::evaluate(const std::vector<double>& values) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c.convert_to<double>();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (i >= values.size()) throw DomainError("Poly::evaluate: missing variable value");
      term *= std::pow(values[i], m[i]);
    }
    sum += term;
  }
  return sum;
}

Poly substitute(const Poly& p, const std::vector<Poly>& values) {
  Poly out;
  for (const auto& [m, c] : p.terms()) {
    Poly term(c);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      const Poly base = i < values.size() ? values[i] : Poly::var(static_cast<int>(i));
      for (int e = 0; e < m[i]; ++e) term *= base;
    }
    out += term;
  }
  return out;
}

std::string Poly::to_string(const std::function<std::string(int)>& name) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << bl::to_string(c);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      os << "*" << name(static_cast<int>(i));
      if (m[i] > 1) os << "^" << m[i];
    }
  }
  return os.str();
}

Poly total_dx(const Poly& p) {
  Poly out;
  const int top = p.max_var();
  for (int id = 0; id <= top; ++id) {
    Poly d = p.partial(id);
    if (d.is_zero()) continue;
    if (id % kJetStride == kJetStride - 1)
      throw OrderError("total_dx: jet derivative order exceeds stride");
    out += d * Poly::var(id + 1);
  }
  return out;
}

std::string jet_name(int id, const std::string& symbol) {
  const int field = id / kJetStride;
  const int der = id % kJetStride;
  std::string s = symbol + std::to_string(field);
  for (int k = 0; k < der; ++k) s += "_x";
  return s;
}

}  // namespace bl
