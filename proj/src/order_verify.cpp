#include "mpe/order_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <boost/multiprecision/eigen.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "mpe/apply.hpp"

namespace mpe {

namespace {

// Printed sums for one term; indices are 0-based, j runs over stages.
struct TermSums {
  const std::vector<Stage>& st;

  std::size_t m() const { return st.size(); }
  const Rational& a(std::size_t j) const { return st[j].a; }
  const Rational& b(std::size_t j) const { return st[j].b; }

  Rational sum_a() const {
    Rational s = 0;
    for (std::size_t j = 0; j < m(); ++j) s += a(j);
    return s;
  }
  Rational sum_b() const {
    Rational s = 0;
    for (std::size_t j = 0; j < m(); ++j) s += b(j);
    return s;
  }
  // sum_{j >= from} b_j^power / a_j^power
  Rational tail_b(std::size_t from, int power = 1) const {
    Rational s = 0;
    for (std::size_t j = from; j < m(); ++j) s += pow(b(j), power);
    return s;
  }
  Rational tail_a(std::size_t from, int power = 1) const {
    Rational s = 0;
    for (std::size_t j = from; j < m(); ++j) s += pow(a(j), power);
    return s;
  }
  static Rational pow(const Rational& x, int p) {
    Rational r = 1;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
  }

  // Level 2.
  Rational ab() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) s += a(j1) * tail_b(j1);
    return s;
  }
  Rational ba() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) s += b(j1) * tail_a(j1 + 1);
    return s;
  }

  // Level 3.
  Rational aab() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) s += pow(a(j1), 2) * tail_b(j1);
    Rational t = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) {
      for (std::size_t j2 = j1 + 1; j2 < m(); ++j2) t += a(j1) * a(j2) * tail_b(j2);
    }
    return s + 2 * t;
  }
  Rational baa() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) s += b(j1) * tail_a(j1 + 1, 2);
    // The nested index reads j2 = j1 + 1 .. m-1, then j3 = j2 + 1 .. m.
    Rational t = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) {
      for (std::size_t j2 = j1 + 1; j2 < m(); ++j2) t += b(j1) * a(j2) * tail_a(j2 + 1);
    }
    return s + 2 * t;
  }
  Rational aba() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) {
      for (std::size_t j2 = j1; j2 < m(); ++j2) s += a(j1) * b(j2) * tail_a(j2 + 1);
    }
    return s;
  }
  Rational bab() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) {
      for (std::size_t j2 = j1 + 1; j2 < m(); ++j2) s += b(j1) * a(j2) * tail_b(j2);
    }
    return s;
  }
  Rational abb() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) s += a(j1) * tail_b(j1, 2);
    Rational t = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) {
      for (std::size_t j2 = j1; j2 < m(); ++j2) t += a(j1) * b(j2) * tail_b(j2 + 1);
    }
    return s + 2 * t;
  }
  Rational bba() const {
    Rational s = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) s += pow(b(j1), 2) * tail_a(j1 + 1);
    Rational t = 0;
    for (std::size_t j1 = 0; j1 < m(); ++j1) {
      for (std::size_t j2 = j1 + 1; j2 < m(); ++j2) t += b(j1) * b(j2) * tail_a(j2 + 1);
    }
    return s + 2 * t;
  }
};

struct ConditionDef {
  int level;
  const char* id;
  Rational rhs;
  Rational (*eval)(const TermSums&);
};

const std::vector<ConditionDef>& condition_table() {
  static const std::vector<ConditionDef> table = {
      {1, "I", 1, [](const TermSums&) { return Rational(1); }},
      {1, "A", 1, [](const TermSums& t) { return t.sum_a(); }},
      {1, "B", 1, [](const TermSums& t) { return t.sum_b(); }},
      {2, "AA", 1, [](const TermSums& t) { return TermSums::pow(t.sum_a(), 2); }},
      {2, "BB", 1, [](const TermSums& t) { return TermSums::pow(t.sum_b(), 2); }},
      {2, "AB", Rational(1, 2), [](const TermSums& t) { return t.ab(); }},
      {2, "BA", Rational(1, 2), [](const TermSums& t) { return t.ba(); }},
      {3, "AAA", 1, [](const TermSums& t) { return TermSums::pow(t.sum_a(), 3); }},
      {3, "BBB", 1, [](const TermSums& t) { return TermSums::pow(t.sum_b(), 3); }},
      {3, "AAB", Rational(1, 3), [](const TermSums& t) { return t.aab(); }},
      {3, "BAA", Rational(1, 3), [](const TermSums& t) { return t.baa(); }},
      {3, "ABA", Rational(1, 6), [](const TermSums& t) { return t.aba(); }},
      {3, "BAB", Rational(1, 6), [](const TermSums& t) { return t.bab(); }},
      {3, "ABB", Rational(1, 3), [](const TermSums& t) { return t.abb(); }},
      {3, "BBA", Rational(1, 3), [](const TermSums& t) { return t.bba(); }},
  };
  return table;
}

template <class Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <class Real>
Real one_norm(const Mat<Real>& M) {
  Real best = 0;
  for (Eigen::Index c = 0; c < M.cols(); ++c) {
    Real s = 0;
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      using std::abs;
      s += abs(M(r, c));
    }
    if (s > best) best = s;
  }
  return best;
}

template <class Real>
Real vec_norm(const Vec<Real>& v) {
  Real s = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i) * v(i);
  using std::sqrt;
  return sqrt(s);
}

// Caches exp(t M) per distinct t; schemes reuse a handful of substeps.
template <class Real>
class ExpCache {
 public:
  explicit ExpCache(Mat<Real> M) : M_(std::move(M)) {}
  const Mat<Real>& operator()(const Real& t) {
    for (const auto& [key, val] : cache_) {
      if (key == t) return val;
    }
    cache_.emplace_back(t, expm_taylor<Real>(Mat<Real>(t * M_)));
    return cache_.back().second;
  }

 private:
  Mat<Real> M_;
  std::vector<std::pair<Real, Mat<Real>>> cache_;
};

template <class Real>
double one_step_error_impl(const NumericScheme<Real>& scheme,
                           const MatrixOraclePair& oracle, double tau_d,
                           double* floor_out) {
  const Mat<Real> A = oracle.A.cast<Real>();
  const Mat<Real> B = oracle.B.cast<Real>();
  const int n = oracle.dimension;
  using std::sqrt;
  const Vec<Real> v = Vec<Real>::Constant(n, Real(1) / sqrt(Real(n)));
  auto ea = std::make_shared<ExpCache<Real>>(A);
  auto eb = std::make_shared<ExpCache<Real>>(B);
  FlowPair<Vec<Real>, Real> flows{
      [ea](Real t, const Vec<Real>& x) -> Vec<Real> { return (*ea)(t) * x; },
      [eb](Real t, const Vec<Real>& x) -> Vec<Real> { return (*eb)(t) * x; }};
  const Real tau(tau_d);
  const Vec<Real> approx = apply(scheme, flows, tau, v);
  const Vec<Real> exact = expm_taylor<Real>(Mat<Real>(tau * (A + B))) * v;
  if (floor_out != nullptr) {
    *floor_out = static_cast<double>(Real(100) *
                                     std::numeric_limits<Real>::epsilon() *
                                     vec_norm<Real>(v));
  }
  return static_cast<double>(vec_norm<Real>(Vec<Real>(approx - exact)));
}

double error_and_floor(const SplitScheme& scheme, const MatrixOraclePair& oracle,
                       double tau, Precision precision, double* floor_out) {
  if (precision == Precision::Extended) {
    return one_step_error_impl(to_numeric<Extended>(scheme), oracle, tau, floor_out);
  }
  return one_step_error_impl(to_numeric<double>(scheme), oracle, tau, floor_out);
}

void fit(EmpiricalOrder& out) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : out.ladder) {
    if (p.used) pts.emplace_back(std::log(p.tau), std::log(p.error));
  }
  out.points_used = pts.size();
  if (pts.size() < 2) {
    out.slope = std::numeric_limits<double>::quiet_NaN();
    out.residual = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  out.slope = sxy / sxx;
  double rss = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - (my + out.slope * (x - mx));
    rss += r * r;
  }
  out.residual = std::sqrt(rss / pts.size());
}

}  // namespace

std::vector<ConditionReport> verify_conditions(const SplitScheme& scheme,
                                               int up_to) {
  if (up_to < 1 || up_to > 3) throw std::invalid_argument("up_to must be 1, 2 or 3");
  const Rational tolerance(1, 1000000000000LL);
  std::vector<ConditionReport> out;
  for (const auto& def : condition_table()) {
    if (def.level > up_to) continue;
    Rational lhs = 0;
    for (const auto& term : scheme.terms) {
      lhs += term.weight * def.eval(TermSums{term.stages});
    }
    ConditionReport r{def.level, def.id, lhs, def.rhs, false};
    if (scheme.exact) {
      r.satisfied = lhs == def.rhs;
    } else {
      const Rational diff = lhs - def.rhs;
      r.satisfied = (diff < 0 ? Rational(-diff) : diff) <= tolerance;
    }
    out.push_back(std::move(r));
  }
  return out;
}

int algebraic_order(const std::vector<ConditionReport>& reports) {
  int max_level = 0;
  for (const auto& r : reports) max_level = std::max(max_level, r.order_level);
  for (int level = 1; level <= max_level; ++level) {
    for (const auto& r : reports) {
      if (r.order_level == level && !r.satisfied) return level - 1;
    }
  }
  return max_level;
}

MatrixOraclePair make_matrix_oracle(std::uint64_t seed, int dimension,
                                    double norm_cap) {
  if (dimension < 2) throw std::invalid_argument("oracle dimension must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto draw = [&] {
    Eigen::MatrixXd M(dimension, dimension);
    for (int r = 0; r < dimension; ++r) {
      for (int c = 0; c < dimension; ++c) M(r, c) = dist(rng);
    }
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
    return Eigen::MatrixXd(M * (norm_cap / s));
  };
  MatrixOraclePair p;
  p.dimension = dimension;
  p.seed = seed;
  p.norm_cap = norm_cap;
  p.A = draw();
  p.B = draw();
  return p;
}

MatrixOraclePair make_commuting_oracle(std::uint64_t seed, int dimension) {
  auto p = make_matrix_oracle(seed, dimension, 1.0);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dimension, dimension);
  p.B = 0.5 * p.A - 0.3 * p.A * p.A + 0.2 * I;
  return p;
}

template <class Real>
Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> expm_taylor(
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& M) {
  const Eigen::Index n = M.rows();
  const Real norm = one_norm<Real>(M);
  int squarings = 0;
  Real scale = 1;
  while (norm * scale > Real(0.25)) {
    scale /= 2;
    ++squarings;
  }
  const Mat<Real> X = M * scale;
  Mat<Real> result = Mat<Real>::Identity(n, n);
  Mat<Real> term = Mat<Real>::Identity(n, n);
  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int k = 1; k < 200; ++k) {
    term = Mat<Real>(term * X) / Real(k);
    result += term;
    if (one_norm<Real>(term) <= eps * one_norm<Real>(result) / 16) break;
  }
  for (int s = 0; s < squarings; ++s) result = Mat<Real>(result * result);
  return result;
}

template Eigen::MatrixXd expm_taylor<double>(const Eigen::MatrixXd&);
template Mat<Extended> expm_taylor<Extended>(const Mat<Extended>&);

Eigen::MatrixXd expm_pade(const Eigen::MatrixXd& M) { return M.exp(); }

std::vector<double> geometric_ladder(double tau_max, double tau_min, int count) {
  if (count < 2 || !(tau_max > tau_min) || !(tau_min > 0)) {
    throw std::invalid_argument("bad ladder specification");
  }
  std::vector<double> out;
  const double ratio = std::pow(tau_min / tau_max, 1.0 / (count - 1));
  for (int i = 0; i < count; ++i) out.push_back(tau_max * std::pow(ratio, i));
  out.back() = tau_min;
  return out;
}

double one_step_error(const SplitScheme& scheme, const MatrixOraclePair& oracle,
                      double tau, Precision precision) {
  return error_and_floor(scheme, oracle, tau, precision, nullptr);
}

EmpiricalOrder empirical_order(const SplitScheme& scheme,
                               const MatrixOraclePair& oracle,
                               std::span<const double> tau_ladder,
                               Precision precision) {
  EmpiricalOrder out;
  for (double tau : tau_ladder) {
    if (!(tau > 0)) throw std::invalid_argument("ladder entries must be positive");
    double floor = 0;
    const double err = error_and_floor(scheme, oracle, tau, precision, &floor);
    const bool above = err >= floor;
    if (!above) out.floor_reached = true;
    out.ladder.push_back({tau, err, above && err > 0});
  }
  fit(out);
  if (out.residual > 0.05 && out.points_used >= 5) {
    // Keep the asymptotic middle of the ladder.
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < out.ladder.size(); ++i) {
      if (out.ladder[i].used) used.push_back(i);
    }
    auto by_tau = [&](std::size_t x, std::size_t y) {
      return out.ladder[x].tau < out.ladder[y].tau;
    };
    const auto [lo, hi] = std::minmax_element(used.begin(), used.end(), by_tau);
    out.ladder[*lo].used = false;
    out.ladder[*hi].used = false;
    fit(out);
  }
  return out;
}

double reversibility_defect(std::span<const Stage> term,
                            const MatrixOraclePair& oracle, double tau) {
  const int n = oracle.dimension;
  auto product = [&](double t) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
    for (const auto& s : term) {
      P = expm_pade(to_double(s.a) * t * oracle.A) * P;
      P = expm_pade(to_double(s.b) * t * oracle.B) * P;
    }
    return P;
  };
  const Eigen::MatrixXd D =
      product(tau) * product(-tau) - Eigen::MatrixXd::Identity(n, n);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(D).singularValues()(0);
}

nlohmann::json order_report(const SplitScheme& scheme,
                            const MatrixOraclePair& oracle,
                            std::span<const double> tau_ladder,
                            Precision precision) {
  nlohmann::json algebraic = nlohmann::json::array();
  const auto reports = verify_conditions(scheme, 3);
  for (const auto& r : reports) {
    algebraic.push_back({{"level", r.order_level},
                         {"condition", r.condition_id},
                         {"lhs", to_string(r.lhs)},
                         {"rhs", to_string(r.rhs)},
                         {"satisfied", r.satisfied}});
  }
  const auto emp = empirical_order(scheme, oracle, tau_ladder, precision);
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& p : emp.ladder) {
    ladder.push_back({{"tau", p.tau}, {"error", p.error}, {"used", p.used}});
  }
  return {{"scheme", scheme.name},
          {"claimed_order", scheme.claimed_order},
          {"algebraic_order", algebraic_order(reports)},
          {"algebraic", algebraic},
          {"empirical",
           {{"slope", emp.slope},
            {"residual", emp.residual},
            {"floor_reached", emp.floor_reached},
            {"precision", precision == Precision::Extended ? "extended" : "double"},
            {"ladder", ladder}}}};
}

}  // namespace mpe
