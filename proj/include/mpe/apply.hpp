#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mpe/grid.hpp"
#include "mpe/scheme.hpp"

namespace mpe {

/// The two sub-propagators a scheme composes. Both must be the identity at
/// tau = 0.
template <class State, class Real = double>
struct FlowPair {
  std::function<State(Real, const State&)> a_flow;
  std::function<State(Real, const State&)> b_flow;
};

/// A sub-flow failure, tagged with where in the scheme it happened.
class FlowError : public std::runtime_error {
 public:
  FlowError(std::size_t term, std::size_t stage, char flow, const std::string& what)
      : std::runtime_error("term " + std::to_string(term) + ", stage " +
                           std::to_string(stage) + ", flow " + flow + ": " + what),
        term_(term),
        stage_(stage) {}
  std::size_t term() const { return term_; }
  std::size_t stage() const { return stage_; }

 private:
  std::size_t term_;
  std::size_t stage_;
};

namespace detail {

template <class Real>
inline void neumaier_add(Real& sum, Real& comp, const Real& x) {
  using std::abs;
  const Real t = sum + x;
  if (abs(sum) >= abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

}  // namespace detail

/// Compensated sum_i w_i * x_i over fields.
inline Field weighted_sum(std::span<const double> w, std::span<const Field> xs) {
  ScalarKind kind = ScalarKind::Real;
  for (const auto& x : xs) {
    xs.front().require_compatible(x);
    if (x.kind() == ScalarKind::Complex) kind = ScalarKind::Complex;
  }
  Field out(xs.front().grid_ptr(), kind, xs.front().components());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sr = 0, cr = 0, si = 0, ci = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Complex z = w[i] * xs[i][k];
      detail::neumaier_add(sr, cr, z.real());
      detail::neumaier_add(si, ci, z.imag());
    }
    out[k] = Complex(sr + cr, si + ci);
  }
  return out;
}

/// Compensated sum_i w_i * x_i over dense Eigen vectors/matrices.
template <class Real, int R, int C, int O, int MR, int MC>
Eigen::Matrix<Real, R, C, O, MR, MC> weighted_sum(
    std::span<const Real> w,
    std::span<const Eigen::Matrix<Real, R, C, O, MR, MC>> xs) {
  Eigen::Matrix<Real, R, C, O, MR, MC> out = xs.front();
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    Real s = 0, c = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      detail::neumaier_add(s, c, Real(w[i] * xs[i](k)));
    }
    out(k) = s + c;
  }
  return out;
}

/// One step u -> S(tau) u. Terms are evaluated independently from the same
/// input and combined in catalog order.
template <class State, class Real>
State apply(const NumericScheme<Real>& scheme, const FlowPair<State, Real>& flows,
            Real tau, const State& u) {
  std::vector<State> results;
  std::vector<Real> weights;
  results.reserve(scheme.terms.size());
  for (std::size_t i = 0; i < scheme.terms.size(); ++i) {
    const auto& term = scheme.terms[i];
    State x = u;
    for (std::size_t j = 0; j < term.stages.size(); ++j) {
      const auto& [a, b] = term.stages[j];
      try {
        if (a != Real(0)) x = flows.a_flow(Real(a * tau), x);
      } catch (const FlowError&) {
        throw;
      } catch (const std::exception& e) {
        throw FlowError(i, j, 'A', e.what());
      }
      try {
        if (b != Real(0)) x = flows.b_flow(Real(b * tau), x);
      } catch (const FlowError&) {
        throw;
      } catch (const std::exception& e) {
        throw FlowError(i, j, 'B', e.what());
      }
    }
    results.push_back(std::move(x));
    weights.push_back(term.weight);
  }
  if (results.size() == 1 && weights.front() == Real(1)) return results.front();
  return weighted_sum(std::span<const Real>(weights),
                      std::span<const State>(results));
}

template <class State>
State apply(const SplitScheme& scheme, const FlowPair<State>& flows, double tau,
            const State& u) {
  if (tau < 0.0 && scheme.scheme_class != SchemeClass::SpeNegative) {
    throw std::invalid_argument("negative step for scheme " + scheme.name);
  }
  return apply(to_numeric<double>(scheme), flows, tau, u);
}

}  // namespace mpe
