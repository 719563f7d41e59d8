#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace hypbound {

using Rational = mpq_class;

// p / q in lowest terms (mpq_class(p, q) alone does not canonicalize).
inline Rational ratio(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

// Parses "p/q", "p" or "-p/q". Throws ParseError.
Rational parse_rational(std::string_view text);

// Canonical "p/q" (or "p" when q == 1).
std::string to_string(const Rational& q);

double to_double(const Rational& q);

// (base)^exponent for a nonnegative exponent.
Rational pow(const Rational& base, unsigned exponent);

// Exact complex rational, used for step-function values and expectations.
struct ComplexRational {
  Rational re;
  Rational im;

  ComplexRational() = default;
  ComplexRational(Rational r) : re(std::move(r)) {}  // NOLINT(implicit)
  ComplexRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  ComplexRational conj() const { return {re, -im}; }
  Rational norm_sq() const { return re * re + im * im; }
  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }

  ComplexRational& operator+=(const ComplexRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ComplexRational& operator-=(const ComplexRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  ComplexRational& operator*=(const Rational& s) {
    re *= s;
    im *= s;
    return *this;
  }

  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
  friend ComplexRational operator*(ComplexRational a, const Rational& s) { return a *= s; }
  friend ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

// Accepts "p/q" (real) or "re,im" with both parts rationals.
ComplexRational parse_complex_rational(std::string_view text);

}  // namespace hypbound
