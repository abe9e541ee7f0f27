#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mpe/apply.hpp"
#include "mpe/grid.hpp"
#include "mpe/nonlinear_flows.hpp"

namespace mpe {

enum class ModelId { Toy, Ac, Cac, Fkpp, NlsLinear, NlsNonlinear, RdSystem };

std::string_view to_string(ModelId id);
/// Throws std::invalid_argument for unknown names.
ModelId parse_model_id(std::string_view name);
/// Model names in registry order.
std::span<const std::string_view> model_names();

/// Which potential the nonlinear Schroedinger model uses.
///   printed:    sin^2 x + sin^2 y - 1
///   consistent: sin^2 x sin^2 y - 1, for which sin x sin y e^{-2it} solves
///               the equation exactly.
enum class NlsPotential { Printed, Consistent };

/// Parameters of one experiment model. Immutable once built; overrides go
/// through with_param / with_grid.
struct ModelSpec {
  ModelId id = ModelId::Toy;
  int components = 1;
  ScalarKind kind = ScalarKind::Real;
  double length = 0.0;
  double origin = 0.0;
  int n = 0;
  /// Named reals: eps, lambda, M, D, p, q, K, rho, k_plus, k_minus, D_u, D_v.
  std::map<std::string, double> params;
  NlsPotential potential = NlsPotential::Printed;

  /// Throws std::out_of_range for a parameter the model does not have.
  double param(const std::string& name) const;
  ModelSpec with_param(const std::string& name, double value) const;
  ModelSpec with_grid(int n_per_axis) const;
};

/// Default parameter pack of a model.
ModelSpec default_model(ModelId id);
ModelSpec default_model(std::string_view name);

/// Diffusion multiplier nu per component (propagator exp(-tau nu lambda)).
std::vector<Complex> linear_coefficients(const ModelSpec& spec);

/// Square 2-D grid on the model's domain with spec.n points per axis.
GridPtr make_model_grid(const ModelSpec& spec);

/// Nodal samples of the initial data. Throws std::invalid_argument when the
/// grid does not cover the model domain.
Field initial_condition(const ModelSpec& spec, const GridPtr& grid);

/// Free energy. For rd_system throws std::domain_error where a log argument
/// is not positive.
double energy(const ModelSpec& spec, const Field& u);
/// Plain integral of u (u + v for rd_system); integral of |u|^2 for nls.
double mass(const ModelSpec& spec, const Field& u);
/// max |u| over all nodes and components.
double max_norm(const Field& u);

/// Exact solution (nls models only). Throws std::invalid_argument otherwise.
Field exact_solution(const ModelSpec& spec, double t, const GridPtr& grid);
/// Real potential omega (nls models only).
Field potential(const ModelSpec& spec, const GridPtr& grid);

/// The model's B-propagator (with its truncation data).
NonlinearFlow nonlinear_flow(const ModelSpec& spec, const GridPtr& grid,
                             RkConfig rk = {});

struct FlowOptions {
  RkConfig rk;
  /// Permit negative linear substeps for dissipative models.
  bool allow_backward = false;
};

/// Linear (A) and nonlinear (B) propagators for schemes::apply.
FlowPair<Field> flows(const ModelSpec& spec, const GridPtr& grid,
                      const FlowOptions& options = {});

nlohmann::json to_json(const ModelSpec& spec);

}  // namespace mpe
