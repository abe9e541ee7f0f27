#include "mpe/models.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mpe {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::string_view, 7> kNames = {
    "toy", "ac", "cac", "fkpp", "nls_linear", "nls_nonlinear", "rd_system"};

// Circles of the Allen-Cahn initial data: (x, y, r).
constexpr std::array<std::array<double, 3>, 7> kAcCircles = {{
    {kPi / 2, kPi / 2, kPi / 5},
    {kPi / 4, 3 * kPi / 4, 2 * kPi / 15},
    {kPi / 2, 5 * kPi / 4, 2 * kPi / 15},
    {kPi, kPi / 4, kPi / 10},
    {3 * kPi / 2, kPi / 4, kPi / 10},
    {kPi, kPi, kPi / 4},
    {3 * kPi / 2, 3 * kPi / 2, kPi / 4},
}};

double ac_bump(double s, double eps) {
  return s < 0.0 ? 2.0 * std::exp(-eps * eps / (s * s)) : 0.0;
}

bool is_nls(ModelId id) {
  return id == ModelId::NlsLinear || id == ModelId::NlsNonlinear;
}

void require_domain(const ModelSpec& spec, const SpectralGrid& g) {
  if (g.dim() != 2 || std::abs(g.length() - spec.length) > 1e-12 * spec.length ||
      std::abs(g.origin() - spec.origin) > 1e-12 * std::max(1.0, spec.length)) {
    std::ostringstream msg;
    msg << "grid does not cover the " << to_string(spec.id) << " domain";
    throw std::invalid_argument(msg.str());
  }
}

// h^2 * sum |grad u|^2 for a single real or complex component.
double gradient_energy(const Field& u) {
  double total = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    const Field d = spectral_derivative(u, axis);
    for (const auto& z : d.values()) total += std::norm(z);
  }
  return total * u.grid().cell_volume();
}

// Antiderivative of u^5 (1 - u)^5 vanishing at 0.
double fkpp_primitive(double u) {
  constexpr std::array<double, 6> binom = {1, 5, 10, 10, 5, 1};
  double s = 0.0;
  for (int k = 0; k <= 5; ++k) {
    s += (k % 2 == 0 ? 1.0 : -1.0) * binom[k] * std::pow(u, 6 + k) / (6 + k);
  }
  return s;
}

double sup_abs_derivative(const std::function<double(double)>& df, double M) {
  double best = 0.0;
  const int samples = 20000;
  for (int i = 0; i <= samples; ++i) {
    best = std::max(best, std::abs(df(-M + 2.0 * M * i / samples)));
  }
  return best;
}

}  // namespace

std::string_view to_string(ModelId id) { return kNames[static_cast<int>(id)]; }

ModelId parse_model_id(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<ModelId>(i);
  }
  throw std::invalid_argument("unknown model: " + std::string(name));
}

std::span<const std::string_view> model_names() { return kNames; }

double ModelSpec::param(const std::string& name) const {
  const auto it = params.find(name);
  if (it == params.end()) {
    throw std::out_of_range("model " + std::string(to_string(id)) +
                            " has no parameter " + name);
  }
  return it->second;
}

ModelSpec ModelSpec::with_param(const std::string& name, double value) const {
  (void)param(name);
  ModelSpec out = *this;
  out.params[name] = value;
  if (id == ModelId::Fkpp && (name == "p" || name == "q")) {
    out.params["K"] = fkpp_coefficient(out.params["p"], out.params["q"]);
  }
  return out;
}

ModelSpec ModelSpec::with_grid(int n_per_axis) const {
  if (n_per_axis < 2 || n_per_axis % 2 != 0) {
    throw std::invalid_argument("grid size must be even and >= 2");
  }
  ModelSpec out = *this;
  out.n = n_per_axis;
  return out;
}

ModelSpec default_model(ModelId id) {
  ModelSpec s;
  s.id = id;
  switch (id) {
    case ModelId::Toy:
      s.length = 2 * kPi;
      s.n = 1024;
      s.params = {{"eps", 0.1}, {"lambda", 1.0}};
      break;
    case ModelId::Ac:
      s.length = 2 * kPi;
      s.n = 400;
      s.params = {{"eps", 0.1}, {"M", 6.0}};
      break;
    case ModelId::Cac:
      s.length = 2.0;
      s.origin = -1.0;
      s.n = 256;
      s.params = {{"eps", 0.02}, {"M", 6.0}};
      break;
    case ModelId::Fkpp:
      s.length = 1.0;
      s.n = 512;
      s.params = {{"D", 0.001}, {"p", 5.0}, {"q", 5.0}, {"M", 6.0},
                  {"K", fkpp_coefficient(5.0, 5.0)}};
      break;
    case ModelId::NlsLinear:
      s.kind = ScalarKind::Complex;
      s.length = 16 * kPi;
      s.origin = -8 * kPi;
      s.n = 400;
      s.params = {{"eps", 1.0}, {"rho", 0.0}};
      break;
    case ModelId::NlsNonlinear:
      s.kind = ScalarKind::Complex;
      s.length = 2 * kPi;
      s.origin = -kPi;
      s.n = 400;
      s.params = {{"eps", 0.5}, {"rho", -1.0}};
      break;
    case ModelId::RdSystem:
      s.components = 2;
      s.length = 2.0;
      s.origin = -1.0;
      s.n = 1024;
      s.params = {{"k_plus", 1.0}, {"k_minus", 0.1}, {"D_u", 0.2},
                  {"D_v", 0.1}, {"M", 6.0}};
      break;
  }
  return s;
}

ModelSpec default_model(std::string_view name) {
  return default_model(parse_model_id(name));
}

std::vector<Complex> linear_coefficients(const ModelSpec& spec) {
  switch (spec.id) {
    case ModelId::Toy:
    case ModelId::Ac:
    case ModelId::Cac: {
      const double eps = spec.param("eps");
      return {Complex(eps * eps, 0.0)};
    }
    case ModelId::Fkpp:
      return {Complex(spec.param("D"), 0.0)};
    case ModelId::NlsLinear:
    case ModelId::NlsNonlinear:
      return {Complex(0.0, spec.param("eps"))};
    case ModelId::RdSystem:
      return {Complex(spec.param("D_u"), 0.0), Complex(spec.param("D_v"), 0.0)};
  }
  return {};
}

GridPtr make_model_grid(const ModelSpec& spec) {
  return make_grid(2, spec.n, spec.length, spec.origin);
}

Field initial_condition(const ModelSpec& spec, const GridPtr& grid) {
  require_domain(spec, *grid);
  switch (spec.id) {
    case ModelId::Toy:
      return sample(grid, ScalarKind::Real,
                    [](double x, double y) { return 0.5 * std::sin(x) * std::sin(y); });
    case ModelId::Ac: {
      const double eps = spec.param("eps");
      return sample(grid, ScalarKind::Real, [eps](double x, double y) {
        double u = -1.0;
        for (const auto& [cx, cy, r] : kAcCircles) {
          u += ac_bump(std::hypot(x - cx, y - cy) - r, eps);
        }
        return u;
      });
    }
    case ModelId::Cac: {
      const double eps = spec.param("eps");
      return sample(grid, ScalarKind::Real, [eps](double x, double y) {
        const double r2 = 0.2 * 0.2;
        return -std::tanh(((x - 0.3) * (x - 0.3) + y * y - r2) / eps) *
               std::tanh(((x + 0.3) * (x + 0.3) + y * y - r2) / eps) *
               std::tanh((x * x + (y - 0.3) * (y - 0.3) - r2) / eps) *
               std::tanh((x * x + (y + 0.3) * (y + 0.3) - r2) / eps);
      });
    }
    case ModelId::Fkpp:
      return sample(grid, ScalarKind::Real, [](double x, double y) {
        return 0.45 * std::cos(2 * kPi * x) * std::cos(2 * kPi * y) + 0.5;
      });
    case ModelId::NlsLinear:
    case ModelId::NlsNonlinear:
      return exact_solution(spec, 0.0, grid);
    case ModelId::RdSystem: {
      auto profile = [](double x, double y) {
        return std::tanh(10.0 * std::hypot(x, y) - 4.0) / 2.0;
      };
      const Field t = sample(grid, ScalarKind::Real, profile);
      Field out(grid, ScalarKind::Real, 2);
      auto u = out.component(0);
      auto v = out.component(1);
      for (std::size_t k = 0; k < grid->size(); ++k) {
        u[k] = 1.5 - t[k];
        v[k] = 1.5 + t[k];
      }
      return out;
    }
  }
  throw std::logic_error("unhandled model");
}

double energy(const ModelSpec& spec, const Field& u) {
  const SpectralGrid& g = u.grid();
  const double h2 = g.cell_volume();
  switch (spec.id) {
    case ModelId::Toy: {
      const double eps = spec.param("eps");
      const double lambda = spec.param("lambda");
      double pot = 0.0;
      for (const auto& z : u.values()) {
        const double a = std::abs(z.real());
        // log cosh a without overflow.
        pot += a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
      }
      return 0.5 * eps * eps * gradient_energy(u) - lambda * pot * h2;
    }
    case ModelId::Ac:
    case ModelId::Cac: {
      const double eps = spec.param("eps");
      double pot = 0.0;
      for (const auto& z : u.values()) {
        const double w = z.real() * z.real() - 1.0;
        pot += 0.25 * w * w;
      }
      return 0.5 * eps * eps * gradient_energy(u) + pot * h2;
    }
    case ModelId::Fkpp: {
      const double D = spec.param("D");
      const double K = spec.param("K");
      double pot = 0.0;
      for (const auto& z : u.values()) pot += fkpp_primitive(z.real());
      return 0.5 * D * gradient_energy(u) - K * pot * h2;
    }
    case ModelId::NlsLinear:
    case ModelId::NlsNonlinear: {
      const double eps = spec.param("eps");
      const double rho = spec.param("rho");
      const Field lap = spectral_laplacian(u);
      const Field w = potential(spec, u.grid_ptr());
      Complex kinetic = 0.0;
      double pot = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        kinetic += std::conj(u[k]) * lap[k];
        const double m = std::norm(u[k]);
        pot += w[k].real() * m + 0.5 * rho * m * m;
      }
      kinetic *= -eps;
      if (std::abs(kinetic.imag()) > 1e-10 * std::max(1.0, std::abs(kinetic))) {
        throw std::runtime_error("nls energy has a non-negligible imaginary part");
      }
      return (kinetic.real() - pot) * h2;
    }
    case ModelId::RdSystem: {
      const double Uu = std::log(spec.param("k_plus"));
      const double Uv = std::log(spec.param("k_minus"));
      const auto cu = u.component(0);
      const auto cv = u.component(1);
      double total = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double a = cu[k].real() - 1.0 + Uu;
        const double b = cv[k].real() - 1.0 + Uv;
        if (!(a > 0.0) || !(b > 0.0)) {
          std::ostringstream msg;
          msg << "rd_system energy undefined: log argument " << (a > 0.0 ? b : a)
              << " at node " << k;
          throw std::domain_error(msg.str());
        }
        total += cu[k].real() * std::log(a) + cv[k].real() * std::log(b);
      }
      return total * h2;
    }
  }
  throw std::logic_error("unhandled model");
}

double mass(const ModelSpec& spec, const Field& u) {
  if (is_nls(spec.id)) {
    double s = 0.0;
    for (const auto& z : u.values()) s += std::norm(z);
    return s * u.grid().cell_volume();
  }
  double s = 0.0;
  for (int c = 0; c < u.components(); ++c) s += integrate(u, c).real();
  return s;
}

double max_norm(const Field& u) { return norm_inf(u); }

Field exact_solution(const ModelSpec& spec, double t, const GridPtr& grid) {
  require_domain(spec, *grid);
  if (spec.id == ModelId::NlsLinear) {
    const Complex phase = Complex(0.0, 1.0) * std::polar(1.0, t);
    Field out = sample(grid, ScalarKind::Complex, [](double x, double y) {
      return 1.0 / (std::cosh(x) * std::cosh(y));
    });
    for (auto& z : out.values()) z *= phase;
    return out;
  }
  if (spec.id == ModelId::NlsNonlinear) {
    const Complex phase = std::polar(1.0, -2.0 * t);
    Field out = sample(grid, ScalarKind::Complex,
                       [](double x, double y) { return std::sin(x) * std::sin(y); });
    for (auto& z : out.values()) z *= phase;
    return out;
  }
  throw std::invalid_argument("model " + std::string(to_string(spec.id)) +
                              " has no exact solution");
}

Field potential(const ModelSpec& spec, const GridPtr& grid) {
  if (spec.id == ModelId::NlsLinear) {
    return sample(grid, ScalarKind::Real, [](double x, double y) {
      const double tx = std::tanh(x);
      const double ty = std::tanh(y);
      return 3.0 - 2.0 * tx * tx - 2.0 * ty * ty;
    });
  }
  if (spec.id == ModelId::NlsNonlinear) {
    if (spec.potential == NlsPotential::Consistent) {
      return sample(grid, ScalarKind::Real, [](double x, double y) {
        const double s = std::sin(x) * std::sin(y);
        return s * s - 1.0;
      });
    }
    return sample(grid, ScalarKind::Real, [](double x, double y) {
      const double sx = std::sin(x);
      const double sy = std::sin(y);
      return sx * sx + sy * sy - 1.0;
    });
  }
  throw std::invalid_argument("model " + std::string(to_string(spec.id)) +
                              " has no potential");
}

NonlinearFlow nonlinear_flow(const ModelSpec& spec, const GridPtr& grid,
                             RkConfig rk) {
  switch (spec.id) {
    case ModelId::Toy:
      return NonlinearFlow::tanh_flow(spec.param("lambda"));
    case ModelId::Ac:
      return NonlinearFlow::double_well(spec.param("M"), rk);
    case ModelId::Cac: {
      const double M = spec.param("M");
      // f minus its mean: the mean can move each value by up to sup|f'|.
      return NonlinearFlow::pointwise(
          [M](double u) { return truncate_double_well(u, M); },
          2.0 * double_well_kappa(M), rk, true, M);
    }
    case ModelId::Fkpp: {
      if (spec.param("p") != 5.0 || spec.param("q") != 5.0) {
        throw std::invalid_argument("the truncated fkpp reaction needs p = q = 5");
      }
      const double M = spec.param("M");
      const double K = spec.param("K");
      const double kappa = sup_abs_derivative(
          [M, K](double u) { return truncate_fkpp_derivative(u, M, K); }, M);
      return NonlinearFlow::pointwise(
          [M, K](double u) { return truncate_fkpp(u, M, K); }, kappa, rk, false, M);
    }
    case ModelId::NlsLinear:
    case ModelId::NlsNonlinear:
      return NonlinearFlow::phase(potential(spec, grid), spec.param("rho"));
    case ModelId::RdSystem:
      return NonlinearFlow::reaction_system(spec.param("k_plus"),
                                            spec.param("k_minus"), spec.param("M"), rk);
  }
  throw std::logic_error("unhandled model");
}

FlowPair<Field> flows(const ModelSpec& spec, const GridPtr& grid,
                      const FlowOptions& options) {
  auto nu = linear_coefficients(spec);
  const bool backward = options.allow_backward;
  auto b = std::make_shared<NonlinearFlow>(nonlinear_flow(spec, grid, options.rk));
  FlowPair<Field> out;
  out.a_flow = [nu, backward](double tau, const Field& v) {
    return linear_propagate(v, nu, tau, backward);
  };
  out.b_flow = [b](double tau, const Field& v) { return (*b)(tau, v); };
  return out;
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["model"] = to_string(spec.id);
  j["n"] = spec.n;
  j["length"] = spec.length;
  j["origin"] = spec.origin;
  j["components"] = spec.components;
  j["scalar_kind"] = spec.kind == ScalarKind::Real ? "real" : "complex";
  j["params"] = spec.params;
  if (spec.id == ModelId::NlsNonlinear) {
    j["potential"] = spec.potential == NlsPotential::Printed ? "printed" : "consistent";
  }
  return j;
}

}  // namespace mpe
