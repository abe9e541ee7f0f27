#pragma once

#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

namespace mpe {

/// Arbitrary precision rational used for every scheme coefficient.
using Rational = boost::multiprecision::cpp_rational;

/// Formats as "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& r);

/// Parses "p/q", "p", or a plain decimal such as "1.3512" (exactly).
Rational parse_rational(std::string_view text);

/// Nearest double.
double to_double(const Rational& r);

/// Converts to any boost::multiprecision floating type (or double).
template <class Real>
Real to_real(const Rational& r) {
  if constexpr (std::is_same_v<Real, double>) {
    return r.convert_to<double>();
  } else {
    return Real(boost::multiprecision::numerator(r)) /
           Real(boost::multiprecision::denominator(r));
  }
}

}  // namespace mpe
