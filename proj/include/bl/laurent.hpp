#pragma once

// Truncated Laurent series in 1/z with explicit accuracy tracking.
//
// A Laurent<T> stores coefficients for exponents lo()..hi() and a validity
// floor valid(): every coefficient with exponent >= valid() is known (zero when
// below lo()), anything lower is unknown. Products and reciprocals propagate
// the floor, so truncation is never silently extended with zeros.

#include "bl/error.hpp"

#include <algorithm>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

namespace bl {

// Floor value meaning "exact": all lower coefficients are zero.
inline constexpr int kExact = -(1 << 20);

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
T div_int(const T& a, long d) {
  if constexpr (std::is_arithmetic_v<T>) {
    return a / static_cast<T>(d);
  } else if constexpr (is_complex<T>::value) {
    return a / static_cast<typename T::value_type>(d);
  } else {
    return a / d;
  }
}

template <class T>
T mul_int(const T& a, long d) {
  if constexpr (std::is_arithmetic_v<T>) {
    return a * static_cast<T>(d);
  } else if constexpr (is_complex<T>::value) {
    return a * static_cast<typename T::value_type>(d);
  } else {
    return a * T(static_cast<int>(d));
  }
}

template <class T>
class Laurent {
 public:
  Laurent() : Laurent(0, 0, kExact) {}

  // Zero series storing exponents lo..hi, known down to `valid`.
  Laurent(int hi, int lo, int valid) : hi_(hi), lo_(std::max(lo, valid)), valid_(valid) {
    if (lo_ > hi_ + 1) lo_ = hi_ + 1;
    c_.assign(static_cast<std::size_t>(hi_ - lo_ + 1), T(0));
  }

  static Laurent monomial(int exponent, const T& coeff, int valid = kExact) {
    Laurent s(exponent, exponent, valid);
    if (exponent >= s.lo_) s.ref(exponent) = coeff;
    return s;
  }

  int hi() const { return hi_; }
  int lo() const { return lo_; }
  int valid() const { return valid_; }
  bool is_exact() const { return valid_ <= kExact / 2; }

  // Coefficient of z^e. Throws OrderError below the validity floor.
  T operator[](int e) const {
    if (e > hi_) return T(0);
    if (e < valid_)
      throw OrderError("coefficient of z^" + std::to_string(e) + " is below the truncation floor z^" +
                       std::to_string(valid_));
    if (e < lo_) return T(0);
    return c_[static_cast<std::size_t>(hi_ - e)];
  }

  T& ref(int e) {
    if (e > hi_ || e < lo_) throw OrderError("Laurent::ref: exponent outside stored range");
    return c_[static_cast<std::size_t>(hi_ - e)];
  }

  // Drop everything below z^floor (floor must not be below the validity floor).
  Laurent truncated(int floor) const {
    const int v = std::max(floor, valid_);
    Laurent out(hi_, std::max(lo_, v), v);
    for (int e = out.lo_; e <= hi_; ++e) out.ref(e) = (*this)[e];
    return out;
  }

  // Exponents >= 0, as an exact polynomial.
  Laurent polynomial_part() const {
    if (valid_ > 0) throw OrderError("polynomial part needs coefficients down to z^0");
    const int top = std::max(hi_, 0);
    Laurent out(top, 0, kExact);
    for (int e = 0; e <= hi_; ++e) out.ref(e) = (*this)[e];
    return out;
  }

  Laurent derivative() const {
    Laurent out(hi_ - 1, lo_ - 1, is_exact() ? kExact : valid_ - 1);
    for (int e = lo_; e <= hi_; ++e) out.ref(e - 1) = mul_int((*this)[e], e);
    return out;
  }

  Laurent scaled(const T& s) const {
    Laurent out = *this;
    for (auto& c : out.c_) c = c * s;
    return out;
  }

  friend Laurent operator+(const Laurent& a, const Laurent& b) { return combine(a, b, 1); }
  friend Laurent operator-(const Laurent& a, const Laurent& b) { return combine(a, b, -1); }

  friend Laurent operator*(const Laurent& a, const Laurent& b) {
    const int hi = a.hi_ + b.hi_;
    int valid = kExact;
    if (!a.is_exact()) valid = std::max(valid, a.valid_ + b.hi_);
    if (!b.is_exact()) valid = std::max(valid, b.valid_ + a.hi_);
    Laurent out(hi, std::max(valid, a.lo_ + b.lo_), valid);
    for (int i = a.lo_; i <= a.hi_; ++i) {
      const T& ai = a.c_[static_cast<std::size_t>(a.hi_ - i)];
      for (int j = b.lo_; j <= b.hi_; ++j) {
        const int e = i + j;
        if (e < out.lo_) continue;
        out.ref(e) += ai * b.c_[static_cast<std::size_t>(b.hi_ - j)];
      }
    }
    return out;
  }

  // 1/self for a series whose leading coefficient (at z^hi) is one. For an
  // exact input the expansion is cut at z^cut.
  Laurent reciprocal(int cut = kExact) const {
    if (!(c_.front() == T(1))) throw DomainError("reciprocal requires a monic leading term");
    const int rhi = -hi_;
    int valid = is_exact() ? cut : std::max(cut, valid_ - 2 * hi_);
    if (valid <= kExact / 2) throw OrderError("reciprocal of an exact series needs a cut");
    // self = z^hi (1 + eps), eps_k = coefficient of z^{-k}, k >= 1.
    const int depth = rhi - valid;  // number of terms after the leading one
    std::vector<T> eps(static_cast<std::size_t>(depth + 1), T(0));
    for (int k = 1; k <= depth; ++k) eps[static_cast<std::size_t>(k)] = (*this)[hi_ - k];
    std::vector<T> r(static_cast<std::size_t>(depth + 1), T(0));
    r[0] = T(1);
    for (int k = 1; k <= depth; ++k) {
      T acc(0);
      for (int j = 1; j <= k; ++j) acc += eps[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(k - j)];
      r[static_cast<std::size_t>(k)] = T(0) - acc;
    }
    Laurent out(rhi, valid, valid);
    for (int k = 0; k <= depth; ++k) out.ref(rhi - k) = r[static_cast<std::size_t>(k)];
    return out;
  }

  Laurent pow(int n) const {
    if (n < 0) throw PreconditionError("Laurent::pow: negative exponent");
    Laurent out = monomial(0, T(1));
    for (int k = 0; k < n; ++k) out = out * (*this);
    return out;
  }

 private:
  static Laurent combine(const Laurent& a, const Laurent& b, int sign) {
    const int hi = std::max(a.hi_, b.hi_);
    const int valid = std::max(a.valid_, b.valid_);
    Laurent out(hi, std::max(valid, std::min(a.lo_, b.lo_)), valid);
    for (int e = out.lo_; e <= hi; ++e) {
      const T bv = b[e];
      out.ref(e) = sign > 0 ? a[e] + bv : a[e] - bv;
    }
    return out;
  }

  int hi_;
  int lo_;
  int valid_;
  std::vector<T> c_;
};

}  // namespace bl
