#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "mpe/grid.hpp"
#include "mpe/ssprk.hpp"

namespace mpe {

// Pointwise closed-form flows -------------------------------------------------

/// Exact flow of u' = lambda * tanh(u): arcsinh(sinh(v) * exp(lambda * tau)).
/// Arguments whose sinh would overflow go through the log form.
Field flow_tanh(const Field& v, double lambda, double tau);
double flow_tanh(double v, double lambda, double tau);

/// Exact flow of u' = u - u^3: e^tau v / sqrt(1 + (e^{2 tau} - 1) v^2).
/// Throws std::domain_error (naming the offending max) when max|v| > bound,
/// or when a negative tau drives the denominator through zero.
Field flow_double_well(const Field& v, double tau,
                       double bound = std::numeric_limits<double>::infinity());
double flow_double_well(double v, double tau);

/// Exact flow of u' = i (omega + rho |u|^2) u: e^{i tau (omega + rho|v|^2)} v.
Field flow_phase(const Field& v, const Field& omega, double rho, double tau);

// Truncated nonlinearities -------------------------------------------------

/// u - u^3 inside [-M, M], extended linearly outside so that it is C^1.
double truncate_double_well(double u, double M);
double truncate_double_well_derivative(double u, double M);
/// sup |f'| of the truncated double well: max(1, 3 M^2 - 1).
double double_well_kappa(double M);

/// K_pq = Gamma(p+q+2) / (Gamma(p+1) Gamma(q+1)).
double fkpp_coefficient(double p, double q);

/// Truncated K u^5 (1-u)^5 with linear extensions outside [-M, M].
double truncate_fkpp(double u, double M, double K);
double truncate_fkpp_derivative(double u, double M, double K);

/// f(u) minus its grid mean, evaluated on component 0 of a real field.
Field conservative_rhs(const std::function<double(double)>& f_base,
                       const Field& u);

// Flow objects ----------------------------------------------------------------

enum class FlowKind {
  ClosedFormTanh,
  ClosedFormDoubleWell,
  ClosedFormPhase,
  RkGeneric,
  RkSystem,
};

/// A B-propagator E_B(tau) together with the data needed to reason about its
/// stability (truncation bound M and Lipschitz constant kappa).
class NonlinearFlow {
 public:
  /// u' = lambda tanh u; kappa = |lambda|.
  static NonlinearFlow tanh_flow(double lambda);
  /// Allen-Cahn reaction truncated at M. Uses the closed form while the
  /// trajectory stays inside [-M, M] and integrates the truncated f with
  /// SSP-RK otherwise.
  static NonlinearFlow double_well(double M, RkConfig rk = {});
  /// Schroedinger phase rotation with potential omega and cubic coefficient rho.
  static NonlinearFlow phase(Field omega, double rho);
  /// u' = f(u) by SSP-RK. With `conservative`, the grid mean of f(u) is
  /// subtracted at every stage.
  static NonlinearFlow pointwise(std::function<double(double)> f, double kappa,
                                 RkConfig rk, bool conservative = false,
                                 std::optional<double> truncation_bound = {});
  /// (u, v)' = (-g, g) with g = k_plus u v^2 - k_minus v^3, by SSP-RK.
  /// kappa is the sup of |dg| over the box [-M, M]^2.
  static NonlinearFlow reaction_system(double k_plus, double k_minus, double M,
                                       RkConfig rk = {});

  Field operator()(double tau, const Field& v) const;

  /// Right-hand side f(v) of the flow (for the RK kinds and diagnostics).
  Field rhs(const Field& v) const;

  FlowKind kind() const { return kind_; }
  std::optional<double> truncation_bound() const { return bound_; }
  double lipschitz_kappa() const { return kappa_; }
  const RkConfig& rk_config() const { return rk_; }
  void set_rk_config(RkConfig rk) { rk_ = rk; }

 private:
  FlowKind kind_ = FlowKind::RkGeneric;
  double lambda_ = 0.0;
  double rho_ = 0.0;
  double k_plus_ = 0.0;
  double k_minus_ = 0.0;
  std::optional<double> bound_;
  double kappa_ = 0.0;
  bool conservative_ = false;
  RkConfig rk_;
  std::function<double(double)> f_;
  std::optional<Field> omega_;
};

}  // namespace mpe
