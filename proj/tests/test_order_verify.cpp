#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "mpe/order_verify.hpp"

using namespace mpe;

namespace {

// Independent oracle: Taylor coefficient of a word in the non-commuting
// expansion of one product chain. Factors are listed in the order they act;
// the coefficient of the word w_1 ... w_r (w_1 acting first) sums over
// non-decreasing factor indices with matching letters, dividing by k! for
// each index repeated k times.
struct Factor {
  char letter;
  Rational x;
};

std::vector<Factor> factors_of(const Term& t) {
  std::vector<Factor> out;
  for (const auto& s : t.stages) {
    if (s.a != 0) out.push_back({'A', s.a});
    if (s.b != 0) out.push_back({'B', s.b});
  }
  return out;
}

Rational word_coefficient(const std::vector<Factor>& f, const std::string& word) {
  Rational total = 0;
  std::vector<std::size_t> idx(word.size(), 0);
  // Enumerate non-decreasing index tuples.
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t from) {
    if (pos == word.size()) {
      Rational p = 1;
      std::map<std::size_t, int> mult;
      for (auto i : idx) {
        p *= f[i].x;
        mult[i]++;
      }
      for (const auto& [_, k] : mult) {
        for (int r = 2; r <= k; ++r) p /= r;
      }
      total += p;
      return;
    }
    for (std::size_t i = from; i < f.size(); ++i) {
      if (f[i].letter != word[pos]) continue;
      idx[pos] = i;
      rec(pos + 1, i);
    }
  };
  if (word != "I") rec(0, 0);
  else total = 1;
  return total;
}

// Printed condition = scale * scheme word coefficient.
Rational printed_scale(const std::string& id) {
  static const std::map<std::string, int> scale = {
      {"I", 1},   {"A", 1},   {"B", 1},   {"AA", 2},  {"BB", 2},
      {"AB", 1},  {"BA", 1},  {"AAA", 6}, {"BBB", 6}, {"AAB", 2},
      {"BAA", 2}, {"ABA", 1}, {"BAB", 1}, {"ABB", 2}, {"BBA", 2}};
  return scale.at(id);
}

Rational oracle_lhs(const SplitScheme& s, const std::string& id) {
  Rational total = 0;
  for (const auto& t : s.terms) total += t.weight * word_coefficient(factors_of(t), id);
  return printed_scale(id) * total;
}

SplitScheme random_scheme(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-6, 6), den(1, 5), stages(1, 4), terms(1, 3);
  SplitScheme s;
  s.name = "random";
  s.scheme_class = SchemeClass::MpePositive;
  const int m = terms(rng);
  for (int i = 0; i < m; ++i) {
    Term t;
    t.weight = Rational(num(rng)) / den(rng);
    const int k = stages(rng);
    for (int j = 0; j < k; ++j) {
      t.stages.push_back({Rational(num(rng)) / den(rng), Rational(num(rng)) / den(rng)});
    }
    s.terms.push_back(t);
  }
  return s;
}

}  // namespace

TEST_CASE("printed conditions equal scaled word coefficients") {
  // The exact-flow coefficient of any word of length r is 1/r!, so the
  // printed right-hand sides must be scale / r!.
  for (const auto& r : verify_conditions(catalog("lie1"))) {
    Rational fact = 1;
    for (int k = 2; k <= static_cast<int>(r.condition_id.size()); ++k) fact *= k;
    if (r.condition_id == "I") fact = 1;
    CHECK(r.rhs == printed_scale(r.condition_id) / fact);
  }
  for (auto name : catalog_names()) {
    const auto s = catalog(name);
    if (!s.exact) continue;
    for (const auto& r : verify_conditions(s)) {
      CAPTURE(name);
      CAPTURE(r.condition_id);
      CHECK(r.lhs == oracle_lhs(s, r.condition_id));
    }
  }
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_scheme(rng);
    for (const auto& r : verify_conditions(s)) {
      CAPTURE(r.condition_id);
      CHECK(r.lhs == oracle_lhs(s, r.condition_id));
    }
  }
}

TEST_CASE("verify_conditions examples") {
  auto level_ok = [](const std::vector<ConditionReport>& rs, int level) {
    bool ok = true;
    for (const auto& r : rs) {
      if (r.order_level == level) ok = ok && r.satisfied;
    }
    return ok;
  };
  const auto strang2 = verify_conditions(catalog("strang_a"), 2);
  CHECK(strang2.size() == 7);
  for (const auto& r : strang2) CHECK(r.satisfied);
  CHECK_FALSE(level_ok(verify_conditions(catalog("strang_a"), 3), 3));

  const auto lie = verify_conditions(catalog("lie1"), 2);
  bool mixed_fails = false;
  for (const auto& r : lie) {
    if ((r.condition_id == "AB" || r.condition_id == "BA") && !r.satisfied) {
      mixed_fails = true;
      CHECK((r.lhs == 1 || r.lhs == 0));
    }
  }
  CHECK(mixed_fails);
  CHECK(algebraic_order(lie) == 1);

  for (auto name : {"s3_1", "s3_2"}) {
    const auto rs = verify_conditions(catalog(name), 3);
    CHECK(rs.size() == 15);
    for (const auto& r : rs) CHECK(r.satisfied);
  }
  CHECK_THROWS_AS(verify_conditions(catalog("lie1"), 4), std::invalid_argument);
}

TEST_CASE("every catalog scheme passes up to min(order, 3)") {
  for (auto name : catalog_names()) {
    const auto s = catalog(name);
    CAPTURE(name);
    CHECK(algebraic_order(verify_conditions(s)) >= std::min(s.claimed_order, 3));
  }
}

TEST_CASE("matrix oracle") {
  const auto o = make_matrix_oracle();
  CHECK(o.dimension == 6);
  CHECK(o.seed == 42u);
  const double na = Eigen::JacobiSVD<Eigen::MatrixXd>(o.A).singularValues()(0);
  const double nb = Eigen::JacobiSVD<Eigen::MatrixXd>(o.B).singularValues()(0);
  CHECK(na <= 1.0 + 1e-12);
  CHECK(nb <= 1.0 + 1e-12);
  CHECK((o.A * o.B - o.B * o.A).norm() >= 1e-3);
  // Same seed, same matrices.
  CHECK((make_matrix_oracle(42).A - o.A).norm() == 0.0);

  // Two independent exponentials agree.
  for (double t : {0.01, 0.3, 2.0}) {
    const Eigen::MatrixXd M = t * (o.A + o.B);
    CHECK((expm_taylor<double>(M) - expm_pade(M)).norm() <= 1e-12 * expm_pade(M).norm());
  }
  using MatX = Eigen::Matrix<Extended, Eigen::Dynamic, Eigen::Dynamic>;
  const MatX ext = expm_taylor<Extended>(MatX(o.A.cast<Extended>()));
  const Eigen::MatrixXd back = ext.cast<double>();
  CHECK((back - expm_pade(o.A)).norm() <= 1e-13);
}

TEST_CASE("empirical order") {
  const auto o = make_matrix_oracle();
  const auto ladder = geometric_ladder(5e-2, 3e-3, 8);
  CHECK(ladder.size() == 8);
  CHECK(ladder.front() == 5e-2);
  CHECK(ladder.back() == 3e-3);

  const auto lie = empirical_order(catalog("lie1"), o, ladder);
  CHECK(lie.slope == doctest::Approx(2.0).epsilon(0.15 / 2.0));
  const auto s42 = empirical_order(catalog("s4_2"), o, ladder);
  CHECK(s42.slope == doctest::Approx(5.0).epsilon(0.3 / 5.0));

  const std::vector<int> g3 = {1, 2, 3};
  const auto r6 = empirical_order(richardson_scheme(g3), o, ladder, Precision::Extended);
  CHECK(r6.slope >= 6.7);

  // In double precision the tenth-order scheme sits on the round-off floor.
  const auto s10 = empirical_order(catalog("s10"), o, ladder, Precision::Double);
  CHECK(s10.floor_reached);
  const auto s10x = empirical_order(catalog("s10"), o, ladder, Precision::Extended);
  CHECK_FALSE(s10x.floor_reached);
  CHECK(s10x.slope >= 6.5);
}

TEST_CASE("commuting operators are split exactly") {
  const auto o = make_commuting_oracle();
  CHECK((o.A * o.B - o.B * o.A).norm() < 1e-14);
  for (auto name : catalog_names()) {
    CAPTURE(name);
    CHECK(one_step_error(catalog(name), o, 0.05) <= 1e-12);
  }
}

TEST_CASE("reversibility defect") {
  const auto o = make_matrix_oracle();
  CHECK(reversibility_defect(catalog("strang_a").terms[0].stages, o, 0.1) <= 1e-12);
  for (const auto& t : catalog("s4_2").terms) {
    CHECK(reversibility_defect(t.stages, o, 0.1) <= 1e-12);
  }
  CHECK(reversibility_defect(catalog("lie1").terms[0].stages, o, 0.1) > 1e-3);
}

TEST_CASE("order report") {
  const auto o = make_matrix_oracle();
  const auto ladder = geometric_ladder(5e-2, 3e-3, 6);
  const auto j = order_report(catalog("s3_2"), o, ladder, Precision::Double);
  CHECK(j.at("scheme") == "s3_2");
  CHECK(j.at("algebraic").size() == 15);
  CHECK(j.at("algebraic_order") == 3);
  CHECK(j.at("empirical").at("ladder").size() == 6);
  CHECK(j.at("empirical").at("slope").get<double>() == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}
