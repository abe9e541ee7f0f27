#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mpe/rational.hpp"

namespace mpe {

/// One A-then-B substep: u <- E_B(b tau) E_A(a tau) u. A trailing stage with
/// b = 0 is a final pure-A substep.
struct Stage {
  Rational a;
  Rational b;
};

/// One product chain of a multi-product expansion and its weight.
struct Term {
  Rational weight;
  std::vector<Stage> stages;

  Rational sum_a() const;
  Rational sum_b() const;
};

enum class SchemeClass { MpePositive, Spe, SpeNegative };

std::string_view to_string(SchemeClass c);
SchemeClass parse_scheme_class(std::string_view s);

/// Weighted list of stage sequences. Output of one step is
/// sum_i c_i * (term_i applied to u).
struct SplitScheme {
  std::string name;
  int claimed_order = 1;
  SchemeClass scheme_class = SchemeClass::Spe;
  std::vector<Term> terms;
  /// False when some coefficient is a truncated decimal of an irrational
  /// number; order conditions are then compared with a tolerance.
  bool exact = true;

  /// True when every a and b is >= 0.
  bool has_nonnegative_steps() const;

  /// Checks the class invariants (sum of weights, positivity, per-term
  /// sum of a); throws std::invalid_argument on violation.
  void validate() const;
};

/// Names accepted by catalog(), in catalog order.
std::span<const std::string_view> catalog_names();

/// Published scheme by name. Throws std::invalid_argument for unknown names.
SplitScheme catalog(std::string_view name);

/// Richardson weights c_i = prod_{j != i} g_i^2 / (g_i^2 - g_j^2).
/// Throws std::invalid_argument on duplicates or entries < 1.
std::vector<Rational> richardson_weights(std::span<const int> gammas);

/// sum_i c_i [Strang_A(t / g_i)]^{g_i} with adjacent half steps merged.
SplitScheme richardson_scheme(std::span<const int> gammas);

struct SchemeStats {
  Rational sum_c_abs;   ///< sum |c_i|
  Rational b_max;       ///< max over terms of sum_j b_ij
  std::size_t stage_count = 0;
};

SchemeStats scheme_stats(const SplitScheme& scheme);

/// (s/2, s) (1-s)/2 ... fourth-order symmetric composition with
/// s = (2 + 2^{1/3} + 2^{-1/3}) / 3 rounded to 30 significant digits.
Rational triple_jump_s();

// JSON: {name, claimed_order, class, terms: [{c: "p/q", stages: [["p/q","p/q"], ...]}]}
nlohmann::json to_json(const SplitScheme& scheme);
SplitScheme scheme_from_json(const nlohmann::json& j);

/// Floating-point image of a scheme used by the integrators.
template <class Real>
struct NumericScheme {
  struct NumTerm {
    Real weight;
    std::vector<std::pair<Real, Real>> stages;
  };
  std::vector<NumTerm> terms;
};

template <class Real>
NumericScheme<Real> to_numeric(const SplitScheme& scheme) {
  NumericScheme<Real> out;
  out.terms.reserve(scheme.terms.size());
  for (const auto& t : scheme.terms) {
    typename NumericScheme<Real>::NumTerm nt{to_real<Real>(t.weight), {}};
    for (const auto& s : t.stages) {
      nt.stages.emplace_back(to_real<Real>(s.a), to_real<Real>(s.b));
    }
    out.terms.push_back(std::move(nt));
  }
  return out;
}

}  // namespace mpe
