#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "json.hpp"
#include "mpe/scheme.hpp"

namespace mpe {

// Algebraic order conditions ------------------------------------------------

/// One printed order condition. condition_id spells the Taylor word in the
/// order the flows act (e.g. "AB": the A flow acts before the B flow).
struct ConditionReport {
  int order_level = 1;
  std::string condition_id;
  Rational lhs;
  Rational rhs;
  bool satisfied = false;
};

/// Evaluates the 3 + 4 + 8 printed conditions up to `up_to` (1..3) in exact
/// rational arithmetic. For inexact schemes (truncated irrational
/// coefficients) `satisfied` means |lhs - rhs| <= 1e-12.
std::vector<ConditionReport> verify_conditions(const SplitScheme& scheme,
                                               int up_to = 3);

/// Highest k <= 3 such that every condition of level <= k holds (0 if none).
int algebraic_order(const std::vector<ConditionReport>& reports);

// Matrix oracle ---------------------------------------------------------------

using Extended = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<50>, boost::multiprecision::et_off>;

/// Linear test pair u' = A u + B u with dense non-commuting matrices.
struct MatrixOraclePair {
  int dimension = 6;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  std::uint64_t seed = 42;
  double norm_cap = 1.0;
};

/// Entries i.i.d. uniform on [-1, 1], each matrix scaled to spectral norm
/// `norm_cap`.
MatrixOraclePair make_matrix_oracle(std::uint64_t seed = 42, int dimension = 6,
                                    double norm_cap = 1.0);

/// Pair with B = p(A) (polynomial of A), so A and B commute.
MatrixOraclePair make_commuting_oracle(std::uint64_t seed = 42, int dimension = 6);

/// Scaling-and-squaring Taylor exponential, usable with double or Extended.
template <class Real>
Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> expm_taylor(
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& M);

/// Scaling-and-squaring Pade exponential (Eigen's MatrixFunctions module).
Eigen::MatrixXd expm_pade(const Eigen::MatrixXd& M);

enum class Precision { Double, Extended };

struct LadderPoint {
  double tau = 0.0;
  double error = 0.0;
  bool used = false;
};

struct EmpiricalOrder {
  double slope = 0.0;
  double residual = 0.0;
  bool floor_reached = false;
  std::size_t points_used = 0;
  std::vector<LadderPoint> ladder;
};

/// Geometric ladder of `count` values from tau_max down to tau_min.
std::vector<double> geometric_ladder(double tau_max, double tau_min, int count);

/// Least-squares slope of log ||S(tau) v - exp(tau (A + B)) v|| against
/// log tau. Points below the round-off floor (100 eps ||v||) are dropped;
/// if the RMS log residual exceeds 0.05 the largest and smallest tau are
/// dropped and the fit repeated.
EmpiricalOrder empirical_order(const SplitScheme& scheme,
                               const MatrixOraclePair& oracle,
                               std::span<const double> tau_ladder,
                               Precision precision = Precision::Double);

/// One-step error ||S(tau) v - exp(tau (A + B)) v|| at a single tau.
double one_step_error(const SplitScheme& scheme, const MatrixOraclePair& oracle,
                      double tau, Precision precision = Precision::Double);

/// ||S(tau) S(-tau) - I||_2 for a single product chain with exact matrix flows.
double reversibility_defect(std::span<const Stage> term,
                            const MatrixOraclePair& oracle, double tau);

/// JSON report for the order-check command.
nlohmann::json order_report(const SplitScheme& scheme,
                            const MatrixOraclePair& oracle,
                            std::span<const double> tau_ladder,
                            Precision precision);

}  // namespace mpe
