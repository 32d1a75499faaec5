#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace nvb {

/// Exact number of the form numerator / 2^exponent.
/// Canonical form: numerator odd, or numerator zero with exponent zero.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long v) : num_(v) { normalize(); }  // NOLINT(google-explicit-constructor)
  Dyadic(mpz_class num, std::uint64_t exp) : num_(std::move(num)), exp_(exp) { normalize(); }

  /// Builds from a numerator/exponent pair that must already be canonical.
  static Dyadic from_canonical(const mpz_class& num, std::uint64_t exp) {
    Dyadic d;
    d.num_ = num;
    d.exp_ = exp;
    if (!d.is_canonical()) throw std::invalid_argument("non-canonical dyadic");
    return d;
  }

  const mpz_class& numerator() const { return num_; }
  std::uint64_t exponent() const { return exp_; }
  bool is_zero() const { return sgn(num_) == 0; }
  int sign() const { return sgn(num_); }

  bool is_canonical() const {
    if (sgn(num_) == 0) return exp_ == 0;
    return exp_ == 0 || mpz_odd_p(num_.get_mpz_t());
  }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    Dyadic r;
    if (a.exp_ == b.exp_) {
      r.num_ = a.num_ + b.num_;
      r.exp_ = a.exp_;
      r.normalize();
    } else if (a.exp_ > b.exp_) {
      mpz_mul_2exp(r.num_.get_mpz_t(), b.num_.get_mpz_t(), a.exp_ - b.exp_);
      r.num_ += a.num_;
      r.exp_ = a.exp_;
    } else {
      mpz_mul_2exp(r.num_.get_mpz_t(), a.num_.get_mpz_t(), b.exp_ - a.exp_);
      r.num_ += b.num_;
      r.exp_ = b.exp_;
    }
    return r;
  }
  friend Dyadic operator-(const Dyadic& a) {
    Dyadic r = a;
    r.num_ = -r.num_;
    return r;
  }
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    Dyadic r;
    r.num_ = a.num_ * b.num_;
    r.exp_ = sgn(r.num_) == 0 ? 0 : a.exp_ + b.exp_;
    r.normalize();
    return r;
  }
  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
  Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }

  /// Exact halving.
  Dyadic half() const {
    Dyadic r = *this;
    if (sgn(r.num_) == 0) return r;
    if (r.exp_ == 0 && mpz_even_p(r.num_.get_mpz_t())) {
      mpz_tdiv_q_2exp(r.num_.get_mpz_t(), r.num_.get_mpz_t(), 1);
      r.normalize();
    } else {
      ++r.exp_;
    }
    return r;
  }
  Dyadic twice() const { return *this + *this; }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.exp_ == b.exp_ && a.num_ == b.num_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    int c;
    if (a.exp_ == b.exp_) {
      c = cmp(a.num_, b.num_);
    } else if (a.exp_ > b.exp_) {
      mpz_class t;
      mpz_mul_2exp(t.get_mpz_t(), b.num_.get_mpz_t(), a.exp_ - b.exp_);
      c = cmp(a.num_, t);
    } else {
      mpz_class t;
      mpz_mul_2exp(t.get_mpz_t(), a.num_.get_mpz_t(), b.exp_ - a.exp_);
      c = cmp(t, b.num_);
    }
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  mpq_class to_mpq() const {
    mpq_class q(num_);
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), exp_);
    return q;
  }
  double to_double() const {
    return std::ldexp(num_.get_d(), -static_cast<int>(exp_));
  }
  /// Numerator scaled to the common exponent `e` (requires e >= exponent()).
  mpz_class scaled_to(std::uint64_t e) const {
    mpz_class r;
    mpz_mul_2exp(r.get_mpz_t(), num_.get_mpz_t(), e - exp_);
    return r;
  }
  std::string str() const {
    if (exp_ == 0) return num_.get_str();
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, exp_);
    return num_.get_str() + "/" + den.get_str();
  }
  std::size_t hash() const {
    std::size_t h = std::hash<std::uint64_t>{}(exp_);
    std::size_t limb = mpz_size(num_.get_mpz_t()) ? mpz_getlimbn(num_.get_mpz_t(), 0) : 0;
    h ^= limb + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(sgn(num_) + 1) * 0x85ebca6bULL;
    return h;
  }

 private:
  void normalize() {
    if (sgn(num_) == 0) {
      exp_ = 0;
      return;
    }
    if (exp_ == 0) return;
    std::uint64_t tz = mpz_scan1(num_.get_mpz_t(), 0);
    tz = std::min(tz, exp_);
    if (tz > 0) {
      mpz_tdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(), tz);
      exp_ -= tz;
    }
  }

  mpz_class num_ = 0;
  std::uint64_t exp_ = 0;
};

using Rational = mpq_class;

// Uniform scalar interface shared by Dyadic and Rational coordinates.

inline Dyadic half(const Dyadic& x) { return x.half(); }
inline Rational half(const Rational& x) {
  Rational r;
  mpq_div_2exp(r.get_mpq_t(), x.get_mpq_t(), 1);
  return r;
}
inline Rational to_rational(const Dyadic& x) { return x.to_mpq(); }
inline Rational to_rational(const Rational& x) { return x; }
inline double to_double(const Dyadic& x) { return x.to_double(); }
inline double to_double(const Rational& x) { return x.get_d(); }
inline std::string to_string(const Dyadic& x) { return x.str(); }
inline std::string to_string(const Rational& x) { return x.get_str(); }
inline std::size_t hash_scalar(const Dyadic& x) { return x.hash(); }
inline std::size_t hash_scalar(const Rational& x) {
  const auto* n = mpq_numref(x.get_mpq_t());
  const auto* d = mpq_denref(x.get_mpq_t());
  std::size_t a = mpz_size(n) ? mpz_getlimbn(n, 0) : 0;
  std::size_t b = mpz_size(d) ? mpz_getlimbn(d, 0) : 0;
  return a * 0x9e3779b97f4a7c15ULL ^ (b + (a << 7)) ^ static_cast<std::size_t>(mpz_sgn(n) + 1);
}

/// Exact division by a positive integer. Throws for Dyadic when the quotient
/// is not dyadic.
inline Rational divide_exact(const Rational& x, long k) { return x / k; }
inline Dyadic divide_exact(const Dyadic& x, long k) {
  if (k <= 0) throw std::invalid_argument("divide_exact: non-positive divisor");
  unsigned long odd = static_cast<unsigned long>(k);
  std::uint64_t twos = 0;
  while ((odd & 1UL) == 0) {
    odd >>= 1;
    ++twos;
  }
  if (!mpz_divisible_ui_p(x.numerator().get_mpz_t(), odd))
    throw std::domain_error("quotient is not a dyadic number");
  mpz_class q = x.numerator() / odd;
  return Dyadic(q, x.exponent() + twos);
}

template <class S>
struct ScalarTraits;
template <>
struct ScalarTraits<Dyadic> {
  static constexpr const char* name = "dyadic";
};
template <>
struct ScalarTraits<Rational> {
  static constexpr const char* name = "rational";
};

}  // namespace nvb
