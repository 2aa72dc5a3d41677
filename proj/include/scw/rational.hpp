#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

#include "scw/errors.hpp"

namespace scw {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rational& r) { return numerator(r); }
inline BigInt rat_den(const Rational& r) { return denominator(r); }

inline bool is_integer(const Rational& r) { return rat_den(r) == 1; }

// Canonical text form: "p" when the denominator is 1, "p/q" otherwise.
inline std::string rational_to_string(const Rational& r) {
  if (is_integer(r)) return rat_num(r).str();
  return rat_num(r).str() + "/" + rat_den(r).str();
}

// Accepts "p", "p/q", decimal ("1.25", "-0.3") and decimal-exponent
// ("2.5e-3") forms. The text is converted exactly; no binary floating
// point is involved.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw parse_error("invalid rational literal: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  auto parse_int = [&](std::string_view s) {
    BigInt v = 0;
    bool neg = false;
    size_t i = 0;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) neg = (s[i++] == '-');
    if (i == s.size()) fail();
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') fail();
      v = v * 10 + (s[i] - '0');
    }
    return neg ? BigInt(-v) : v;
  };
  auto slash = text.find('/');
  try {
    if (slash != std::string_view::npos) {
      BigInt p = parse_int(text.substr(0, slash));
      BigInt q = parse_int(text.substr(slash + 1));
      if (q == 0) return fail();
      return Rational(p, q);
    }
    // Digits accumulate manually: cpp_int's string constructor would read
    // a leading zero as an octal prefix.
    BigInt mantissa = 0;
    long long exp10 = 0;
    bool seen_dot = false, negative = false, any_digit = false;
    size_t i = 0;
    if (text[i] == '+' || text[i] == '-') negative = (text[i++] == '-');
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (c == '.') {
        if (seen_dot) return fail();
        seen_dot = true;
      } else if (c == 'e' || c == 'E') {
        exp10 += std::stoll(std::string(text.substr(i + 1)));
        i = text.size() - 1;
      } else if (c >= '0' && c <= '9') {
        mantissa = mantissa * 10 + (c - '0');
        any_digit = true;
        if (seen_dot) exp10 -= 1;
      } else {
        return fail();
      }
    }
    if (!any_digit) return fail();
    Rational r(negative ? BigInt(-mantissa) : mantissa, 1);
    for (long long k = 0; k < exp10; ++k) r *= 10;
    for (long long k = 0; k > exp10; --k) r /= 10;
    return r;
  } catch (const std::exception&) {
    return fail();
  }
}

// Best rational approximation of x among all fractions with denominator
// <= max_den, by Stern-Brocot / continued-fraction descent. Exact.
inline Rational best_rational_approx(const Rational& x, const BigInt& max_den) {
  if (max_den < 1) throw precondition_error("best_rational_approx: max_den must be >= 1");
  if (rat_den(x) <= max_den) return x;
  const bool neg = x < 0;
  Rational y = neg ? Rational(-x) : x;
  // Continued fraction expansion of y with convergents p/q; the last
  // convergent with q <= max_den, adjusted by the best semiconvergent,
  // is the closest approximation.
  BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  BigInt num = rat_num(y), den = rat_den(y);
  BigInt best_p = 0, best_q = 1;
  while (true) {
    BigInt a = num / den;
    BigInt p2 = a * p1 + p0;
    BigInt q2 = a * q1 + q0;
    if (q2 > max_den) {
      // semiconvergent: largest k with q0 + k*q1 <= max_den
      if (q1 == 0) {
        best_p = p2;
        best_q = 1;  // integer part alone; q2 = 1 > max_den cannot happen since max_den >= 1
        break;
      }
      BigInt k = (max_den - q0) / q1;
      BigInt sp = p0 + k * p1, sq = q0 + k * q1;
      Rational semi(sp, sq), conv(p1, q1);
      Rational d_semi = abs(y - semi), d_conv = abs(y - conv);
      // 2k >= a is the classical admissibility bound for semiconvergents;
      // comparing distances directly is simpler and exact.
      if (q1 <= max_den && d_conv <= d_semi) {
        best_p = p1;
        best_q = q1;
      } else {
        best_p = sp;
        best_q = sq;
      }
      break;
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    BigInt rem = num - a * den;
    if (rem == 0) {
      best_p = p1;
      best_q = q1;
      break;
    }
    num = den;
    den = rem;
  }
  Rational out(best_p, best_q);
  return neg ? Rational(-out) : out;
}

}  // namespace scw
