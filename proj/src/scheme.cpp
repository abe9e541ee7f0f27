#include "mpe/scheme.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace mpe {

namespace {

Rational q(long p, long d = 1) { return Rational(p, d); }

Term term(Rational weight, std::vector<Stage> stages) {
  return Term{std::move(weight), std::move(stages)};
}

SplitScheme make(std::string name, int order, SchemeClass cls,
                 std::vector<Term> terms) {
  SplitScheme s{std::move(name), order, cls, std::move(terms), true};
  s.validate();
  return s;
}

// Product chains written as in the Lie-derivative notation, where the left
// factor acts first on the state.
struct Factor {
  char op;
  Rational x;
};

std::vector<Stage> chain(std::initializer_list<Factor> factors) {
  std::vector<Stage> stages;
  for (const auto& f : factors) {
    if (f.x == 0) continue;
    if (f.op == 'A') {
      if (!stages.empty() && stages.back().b == 0) {
        stages.back().a += f.x;
      } else {
        stages.push_back({f.x, 0});
      }
    } else {
      if (stages.empty()) {
        stages.push_back({0, f.x});
      } else {
        stages.back().b += f.x;
      }
    }
  }
  return stages;
}

Factor A(Rational x) { return {'A', std::move(x)}; }
Factor B(Rational x) { return {'B', std::move(x)}; }

constexpr std::array<std::string_view, 15> kNames = {
    "lie1", "lie2", "strang_a", "strang_b", "sws2", "s3_1", "s3_2", "s4_1",
    "s4_2", "s4_3", "s4_4", "s6",   "s8",      "s10",  "s4_neg"};

SplitScheme renamed(SplitScheme s, std::string name) {
  s.name = std::move(name);
  return s;
}

}  // namespace

Rational Term::sum_a() const {
  Rational s = 0;
  for (const auto& st : stages) s += st.a;
  return s;
}

Rational Term::sum_b() const {
  Rational s = 0;
  for (const auto& st : stages) s += st.b;
  return s;
}

std::string_view to_string(SchemeClass c) {
  switch (c) {
    case SchemeClass::MpePositive:
      return "mpe_positive";
    case SchemeClass::Spe:
      return "spe";
    case SchemeClass::SpeNegative:
      return "spe_negative";
  }
  return "?";
}

SchemeClass parse_scheme_class(std::string_view s) {
  if (s == "mpe_positive") return SchemeClass::MpePositive;
  if (s == "spe") return SchemeClass::Spe;
  if (s == "spe_negative") return SchemeClass::SpeNegative;
  throw std::invalid_argument("unknown scheme class '" + std::string(s) + "'");
}

bool SplitScheme::has_nonnegative_steps() const {
  for (const auto& t : terms) {
    for (const auto& s : t.stages) {
      if (s.a < 0 || s.b < 0) return false;
    }
  }
  return true;
}

void SplitScheme::validate() const {
  if (terms.empty()) throw std::invalid_argument(name + ": no terms");
  if (claimed_order < 1) throw std::invalid_argument(name + ": order must be >= 1");
  Rational total = 0;
  for (const auto& t : terms) {
    if (t.stages.empty()) throw std::invalid_argument(name + ": empty term");
    total += t.weight;
  }
  if (total != 1) {
    throw std::invalid_argument(name + ": weights sum to " + mpe::to_string(total));
  }
  switch (scheme_class) {
    case SchemeClass::MpePositive:
    case SchemeClass::Spe:
      if (!has_nonnegative_steps()) {
        throw std::invalid_argument(name + ": negative step in a positive scheme");
      }
      for (const auto& t : terms) {
        if (t.sum_a() != 1) {
          throw std::invalid_argument(name + ": a term's A steps do not sum to 1");
        }
      }
      if (scheme_class == SchemeClass::Spe && terms.size() != 1) {
        throw std::invalid_argument(name + ": single-product scheme with several terms");
      }
      break;
    case SchemeClass::SpeNegative:
      if (terms.size() != 1 || terms.front().weight != 1) {
        throw std::invalid_argument(name + ": spe_negative needs one term of weight 1");
      }
      if (has_nonnegative_steps()) {
        throw std::invalid_argument(name + ": spe_negative without a negative step");
      }
      break;
  }
}

std::span<const std::string_view> catalog_names() { return kNames; }

Rational triple_jump_s() {
  using Dec = boost::multiprecision::cpp_dec_float_50;
  const Dec c = boost::multiprecision::cbrt(Dec(2));
  const Dec s = (Dec(2) + c + Dec(1) / c) / Dec(3);
  // 30 significant digits; s lies in (1, 10).
  std::string digits = s.str(30, std::ios_base::fixed);
  const auto dot = digits.find('.');
  digits = digits.substr(0, dot + 30);
  return parse_rational(digits);
}

std::vector<Rational> richardson_weights(std::span<const int> gammas) {
  if (gammas.empty()) throw std::invalid_argument("need at least one gamma");
  std::set<int> seen;
  for (int g : gammas) {
    if (g < 1) throw std::invalid_argument("gammas must be >= 1");
    if (!seen.insert(g).second) {
      throw std::invalid_argument("duplicate gamma " + std::to_string(g));
    }
  }
  std::vector<Rational> c;
  for (int gi : gammas) {
    Rational w = 1;
    for (int gj : gammas) {
      if (gj == gi) continue;
      const long gi2 = static_cast<long>(gi) * gi;
      const long gj2 = static_cast<long>(gj) * gj;
      w *= Rational(gi2) / Rational(gi2 - gj2);
    }
    c.push_back(w);
  }
  return c;
}

SplitScheme richardson_scheme(std::span<const int> gammas) {
  const auto weights = richardson_weights(gammas);
  SplitScheme s;
  s.name = "richardson(";
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    s.name += (i ? "," : "") + std::to_string(gammas[i]);
  }
  s.name += ")";
  s.claimed_order = 2 * static_cast<int>(gammas.size());
  s.scheme_class = gammas.size() == 1 ? SchemeClass::Spe : SchemeClass::MpePositive;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const int g = gammas[i];
    std::vector<Stage> stages;
    stages.push_back({Rational(1, 2 * g), Rational(1, g)});
    for (int r = 1; r < g; ++r) stages.push_back({Rational(1, g), Rational(1, g)});
    stages.push_back({Rational(1, 2 * g), 0});
    s.terms.push_back(Term{weights[i], std::move(stages)});
  }
  s.validate();
  return s;
}

SplitScheme catalog(std::string_view name) {
  const Rational h = q(1, 2);
  if (name == "lie1") {
    return make("lie1", 1, SchemeClass::Spe, {term(1, chain({B(1), A(1)}))});
  }
  if (name == "lie2") {
    return make("lie2", 1, SchemeClass::Spe, {term(1, chain({A(1), B(1)}))});
  }
  if (name == "strang_a") {
    return make("strang_a", 2, SchemeClass::Spe,
                {term(1, chain({A(h), B(1), A(h)}))});
  }
  if (name == "strang_b") {
    return make("strang_b", 2, SchemeClass::Spe,
                {term(1, chain({B(h), A(1), B(h)}))});
  }
  if (name == "sws2") {
    return make("sws2", 2, SchemeClass::MpePositive,
                {term(h, chain({A(1), B(1)})), term(h, chain({B(1), A(1)}))});
  }
  if (name == "s3_1") {
    return make("s3_1", 3, SchemeClass::MpePositive,
                {term(q(2, 3), chain({A(h), B(1), A(h)})),
                 term(q(2, 3), chain({B(h), A(1), B(h)})),
                 term(q(-1, 6), chain({B(1), A(1)})),
                 term(q(-1, 6), chain({A(1), B(1)}))});
  }
  if (name == "s3_2") {
    return make("s3_2", 3, SchemeClass::MpePositive,
                {term(q(9, 8), chain({B(q(1, 3)), A(q(2, 3)), B(q(2, 3)), A(q(1, 3))})),
                 term(q(-1, 8), chain({B(1), A(1)}))});
  }
  if (name == "s4_1") {
    return make("s4_1", 4, SchemeClass::MpePositive,
                {term(q(2, 3), chain({B(h), A(h), B(h), A(h)})),
                 term(q(2, 3), chain({A(h), B(h), A(h), B(h)})),
                 term(q(-1, 6), chain({A(1), B(1)})),
                 term(q(-1, 6), chain({B(1), A(1)}))});
  }
  const Rational qt = q(1, 4);
  // The second chain below is the A<->B mirror of the first. The typeset
  // coefficient of its fourth factor is 1 where the mirror (and sum a = 1)
  // requires 1/2; 1/2 is what makes the scheme fourth order.
  auto symmetric_a = chain({A(qt), B(h), A(h), B(h), A(qt)});
  auto symmetric_b = chain({B(qt), A(h), B(h), A(h), B(qt)});
  if (name == "s4_2") {
    return make("s4_2", 4, SchemeClass::MpePositive,
                {term(q(2, 3), symmetric_a), term(q(2, 3), symmetric_b),
                 term(q(-1, 6), chain({A(h), B(1), A(h)})),
                 term(q(-1, 6), chain({B(h), A(1), B(h)}))});
  }
  if (name == "s4_3") {
    const Rational e = q(1, 8);
    const Rational t = q(3, 8);
    return make("s4_3", 4, SchemeClass::MpePositive,
                {term(q(4, 3), chain({A(e), B(qt), A(t), B(h), A(t), B(qt), A(e)})),
                 term(q(4, 3), chain({B(e), A(qt), B(t), A(h), B(t), A(qt), B(e)})),
                 term(q(-5, 6), symmetric_a), term(q(-5, 6), symmetric_b)});
  }
  if (name == "s4_4") {
    const std::array<int, 2> g = {1, 2};
    return renamed(richardson_scheme(g), "s4_4");
  }
  if (name == "s6") {
    const std::array<int, 3> g = {1, 2, 3};
    return renamed(richardson_scheme(g), "s6");
  }
  if (name == "s8") {
    const std::array<int, 4> g = {1, 2, 3, 4};
    return renamed(richardson_scheme(g), "s8");
  }
  if (name == "s10") {
    const std::array<int, 5> g = {1, 2, 3, 4, 5};
    return renamed(richardson_scheme(g), "s10");
  }
  if (name == "s4_neg") {
    const Rational s = triple_jump_s();
    SplitScheme out{"s4_neg", 4, SchemeClass::SpeNegative,
                    {term(1, chain({A(s / 2), B(s), A((1 - s) / 2), B(1 - 2 * s),
                                    A((1 - s) / 2), B(s), A(s / 2)}))},
                    false};
    out.validate();
    return out;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

SchemeStats scheme_stats(const SplitScheme& scheme) {
  SchemeStats st;
  st.sum_c_abs = 0;
  st.b_max = 0;
  bool first = true;
  for (const auto& t : scheme.terms) {
    st.sum_c_abs += t.weight < 0 ? Rational(-t.weight) : t.weight;
    const Rational b = t.sum_b();
    if (first || b > st.b_max) st.b_max = b;
    first = false;
    st.stage_count += t.stages.size();
  }
  return st;
}

nlohmann::json to_json(const SplitScheme& scheme) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : scheme.terms) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : t.stages) {
      stages.push_back({mpe::to_string(s.a), mpe::to_string(s.b)});
    }
    terms.push_back({{"c", mpe::to_string(t.weight)}, {"stages", stages}});
  }
  return {{"name", scheme.name},
          {"claimed_order", scheme.claimed_order},
          {"class", std::string(to_string(scheme.scheme_class))},
          {"exact", scheme.exact},
          {"terms", terms}};
}

SplitScheme scheme_from_json(const nlohmann::json& j) {
  SplitScheme s;
  s.name = j.at("name").get<std::string>();
  s.claimed_order = j.at("claimed_order").get<int>();
  s.scheme_class = parse_scheme_class(j.at("class").get<std::string>());
  s.exact = j.value("exact", true);
  for (const auto& t : j.at("terms")) {
    Term term;
    term.weight = parse_rational(t.at("c").get<std::string>());
    for (const auto& st : t.at("stages")) {
      if (!st.is_array() || st.size() != 2) {
        throw std::invalid_argument("stage must be a pair of rationals");
      }
      term.stages.push_back({parse_rational(st[0].get<std::string>()),
                             parse_rational(st[1].get<std::string>())});
    }
    s.terms.push_back(std::move(term));
  }
  s.validate();
  return s;
}

}  // namespace mpe
