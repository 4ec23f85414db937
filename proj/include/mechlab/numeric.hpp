// Copyright 2026 The mechlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

#include "mechlab/error.hpp"

namespace mechlab {

/// Exact arbitrary-precision rational. Always kept in canonical form.
using Rational = mpq_class;

/// Comparison tolerance used by every float-mode check.
inline constexpr double kFloatTolerance = 1e-9;

/// Arithmetic policy for the scalar type a computation runs in.
///
/// Exact mode (Rational) compares with zero slack. Float mode (double)
/// treats a relation as violated only when the deficit exceeds
/// kFloatTolerance * max(1, |lhs|, |rhs|).
template <class Num>
struct NumTraits;

template <>
struct NumTraits<Rational> {
  static constexpr bool kExact = true;
  static constexpr const char* kModeName = "exact";

  static bool is_zero(const Rational& a) { return sgn(a) == 0; }
  static bool is_positive(const Rational& a) { return sgn(a) > 0; }
  static bool is_negative(const Rational& a) { return sgn(a) < 0; }
  static bool equal(const Rational& a, const Rational& b) { return a == b; }
  /// True iff lhs < rhs (no tolerance).
  static bool violates_geq(const Rational& lhs, const Rational& rhs) { return lhs < rhs; }

  static Rational from_rational(const Rational& r) { return r; }
  static Rational to_rational(const Rational& r) { return r; }
  static double to_double(const Rational& r) { return r.get_d(); }
  static std::string to_string(const Rational& r) { return r.get_str(); }
};

template <>
struct NumTraits<double> {
  static constexpr bool kExact = false;
  static constexpr const char* kModeName = "float";

  static bool is_zero(double a) { return std::abs(a) <= kFloatTolerance; }
  static bool is_positive(double a) { return a > kFloatTolerance; }
  static bool is_negative(double a) { return a < -kFloatTolerance; }
  static bool equal(double a, double b) {
    return std::abs(a - b) <= kFloatTolerance * std::max({1.0, std::abs(a), std::abs(b)});
  }
  static bool violates_geq(double lhs, double rhs) {
    return rhs - lhs > kFloatTolerance * std::max({1.0, std::abs(lhs), std::abs(rhs)});
  }

  static double from_rational(const Rational& r) { return r.get_d(); }
  static Rational to_rational(double d) { return Rational(d); }
  static double to_double(double d) { return d; }
  static std::string to_string(double d) {
    std::ostringstream os;
    os.precision(17);
    os << d;
    return os.str();
  }
};

template <class Num>
bool violates_leq(const Num& lhs, const Num& rhs) {
  return NumTraits<Num>::violates_geq(rhs, lhs);
}

template <class Num>
std::string to_string(const Num& value) {
  return NumTraits<Num>::to_string(value);
}

/// Parses "p/q", an integer, or a plain decimal ("0.25", "-3.5e-2") into an
/// exact rational. Decimals convert exactly; there is no binary rounding.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw InputError("malformed number '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string num(text.substr(0, slash));
    std::string den(text.substr(slash + 1));
    auto digits = [](const std::string& s, bool allow_sign) {
      std::size_t start = (allow_sign && !s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
      if (start >= s.size()) return false;
      return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                         [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!digits(num, true) || !digits(den, false)) return fail();
    if (num[0] == '+') num.erase(0, 1);
    mpz_class n(num, 10), d(den, 10);
    if (d == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    Rational r(n, d);
    r.canonicalize();
    return r;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string mantissa;
  std::int64_t scale = 0;
  bool seen_digit = false, seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c >= '0' && c <= '9') {
      mantissa.push_back(c);
      seen_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return fail();
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') return fail();
    std::string exp(text.substr(pos + 1));
    if (exp.empty()) return fail();
    std::size_t used = 0;
    long long e = 0;
    try {
      e = std::stoll(exp, &used);
    } catch (const std::exception&) {
      return fail();
    }
    if (used != exp.size() || e > 4096 || e < -4096) return fail();
    scale += e;
  }
  mpz_class n(mantissa, 10);
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational r = scale < 0 ? Rational(n, p10) : Rational(n * p10);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

}  // namespace mechlab
