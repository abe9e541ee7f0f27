#include "mpe/rational.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace mpe {

namespace mp = boost::multiprecision;

std::string to_string(const Rational& r) {
  const auto num = mp::numerator(r);
  const auto den = mp::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.erase(s.begin());
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.pop_back();
  }
  if (s.empty()) throw std::invalid_argument("empty rational");
  try {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      const mp::cpp_int num(s.substr(0, slash));
      const mp::cpp_int den(s.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator");
      return Rational(num, den);
    }
    if (const auto dot = s.find('.'); dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      const auto decimals = s.size() - dot - 1;
      if (digits.empty() || digits == "-" || digits == "+") {
        throw std::invalid_argument("bad decimal");
      }
      if (digits.front() == '+') digits.erase(digits.begin());
      mp::cpp_int den = 1;
      for (std::size_t i = 0; i < decimals; ++i) den *= 10;
      return Rational(mp::cpp_int(digits), den);
    }
    if (s.front() == '+') s.erase(s.begin());
    return Rational(mp::cpp_int(s));
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("cannot parse rational '" + std::string(text) +
                                "'");
  }
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace mpe
