#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <vector>

#include "cfl/errors.hpp"

namespace cfl {

/// Exact arbitrary-precision rational, the numeric backbone of every
/// identification computation.  Floating point appears only in the
/// simulation/estimation layer, never in algebra.
using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

inline double to_double(const Rat& r) { return r.template convert_to<double>(); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

/// Renders "p/q", or just "p" when the denominator is one.
inline std::string rat_to_string(const Rat& r) {
  const BigInt num = numerator(r);
  const BigInt den = denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace detail {

inline bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace detail

/// Parses "p/q" or a (signed) decimal literal into an exact rational.
/// "0.35" becomes 7/20, "-4" becomes -4, "3/6" becomes 1/2.
inline Rat parse_rational(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw MalformedRationalError("empty rational literal");

  bool negative = false;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = (s[0] == '-');
    pos = 1;
  }
  const std::string body = s.substr(pos);
  if (body.empty()) throw MalformedRationalError("sign without digits: '" + raw + "'");

  Rat value;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    const std::string num = body.substr(0, slash);
    const std::string den = body.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den))
      throw MalformedRationalError("bad fraction literal: '" + raw + "'");
    const BigInt d(den);
    if (d == 0) throw MalformedRationalError("zero denominator: '" + raw + "'");
    value = Rat(BigInt(num), d);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    const std::string whole = body.substr(0, dot);
    const std::string frac = body.substr(dot + 1);
    if (frac.empty() || !detail::all_digits(frac) ||
        (!whole.empty() && !detail::all_digits(whole)))
      throw MalformedRationalError("bad decimal literal: '" + raw + "'");
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const BigInt w = whole.empty() ? BigInt(0) : BigInt(whole);
    value = Rat(w * scale + BigInt(frac), scale);
  } else {
    if (!detail::all_digits(body))
      throw MalformedRationalError("bad integer literal: '" + raw + "'");
    value = Rat(BigInt(body));
  }
  return negative ? Rat(-value) : value;
}

}  // namespace cfl
