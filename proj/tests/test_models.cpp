#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mpe/apply.hpp"
#include "mpe/models.hpp"

using namespace mpe;
constexpr double pi = std::numbers::pi;

namespace {

std::size_t node(const SpectralGrid& g, double x, double y) {
  const int i = static_cast<int>(std::lround((x - g.origin()) / g.spacing()));
  const int j = static_cast<int>(std::lround((y - g.origin()) / g.spacing()));
  return static_cast<std::size_t>(i) * g.n() + j;
}

}  // namespace

TEST_CASE("registry and default parameter packs") {
  CHECK(model_names().size() == 7);
  CHECK_THROWS_AS(parse_model_id("heat"), std::invalid_argument);

  auto toy = default_model("toy");
  CHECK(toy.param("eps") == 0.1);
  CHECK(toy.param("lambda") == 1.0);
  CHECK(toy.n == 1024);
  CHECK(toy.length == doctest::Approx(2 * pi));

  auto ac = default_model("ac");
  CHECK(ac.param("eps") == 0.1);
  CHECK(ac.n == 400);
  CHECK(ac.param("M") == 6.0);

  auto cac = default_model("cac");
  CHECK(cac.param("eps") == 0.02);
  CHECK(cac.n == 256);
  CHECK(cac.origin == -1.0);
  CHECK(cac.length == 2.0);

  auto fk = default_model("fkpp");
  CHECK(fk.param("D") == 0.001);
  CHECK(fk.param("p") == 5.0);
  CHECK(fk.param("q") == 5.0);
  CHECK(fk.length / fk.n == doctest::Approx(1.0 / 512));

  auto nl = default_model("nls_linear");
  CHECK(nl.param("eps") == 1.0);
  CHECK(nl.param("rho") == 0.0);
  CHECK(nl.length == doctest::Approx(16 * pi));
  CHECK(nl.n == 400);
  CHECK(linear_coefficients(nl)[0] == Complex(0.0, 1.0));

  auto nn = default_model("nls_nonlinear");
  CHECK(nn.param("eps") == 0.5);
  CHECK(nn.param("rho") == -1.0);
  CHECK(nn.length == doctest::Approx(2 * pi));

  auto rd = default_model("rd_system");
  CHECK(rd.param("k_plus") == 1.0);
  CHECK(rd.param("k_minus") == 0.1);
  CHECK(rd.param("D_u") == 0.2);
  CHECK(rd.param("D_v") == 0.1);
  CHECK(rd.length / rd.n == doctest::Approx(1.0 / 512));
  CHECK(linear_coefficients(rd).size() == 2);

  for (auto name : model_names()) {
    for (const auto& nu : linear_coefficients(default_model(name))) CHECK(nu.real() >= 0.0);
  }
  CHECK_THROWS_AS(toy.param("rho"), std::out_of_range);
  CHECK(toy.with_param("lambda", 2.0).param("lambda") == 2.0);
  CHECK_THROWS_AS(toy.with_param("nope", 1.0), std::out_of_range);
}

TEST_CASE("initial conditions") {
  const auto toy = default_model("toy").with_grid(64);
  const auto g = make_model_grid(toy);
  const Field u = initial_condition(toy, g);
  CHECK(u[node(*g, pi / 2, pi / 2)].real() == doctest::Approx(0.5).epsilon(1e-14));

  const auto ac = default_model("ac").with_grid(128);
  const auto ga = make_model_grid(ac);
  const Field ua = initial_condition(ac, ga);
  // Corner (0, 0) is far from all seven circles.
  CHECK(ua[0].real() == -1.0);
  // Centre of the first circle is deep inside it: 2 exp(-eps^2/r^2) - 1.
  const double r1 = pi / 5;
  CHECK(ua[node(*ga, pi / 2, pi / 2)].real() ==
        doctest::Approx(-1.0 + 2.0 * std::exp(-0.01 / (r1 * r1))).epsilon(1e-12));
  CHECK(norm_inf(ua) <= 1.0);

  // Wrong domain is rejected.
  CHECK_THROWS_AS(initial_condition(ac, make_grid(2, 64, 2.0)), std::invalid_argument);

  const auto fk = default_model("fkpp").with_grid(64);
  const Field uf = initial_condition(fk, make_model_grid(fk));
  double lo = 1, hi = 0;
  for (const auto& z : uf.values()) {
    lo = std::min(lo, z.real());
    hi = std::max(hi, z.real());
  }
  CHECK(lo == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.95).epsilon(1e-12));

  const auto rd = default_model("rd_system").with_grid(64);
  const Field ur = initial_condition(rd, make_model_grid(rd));
  CHECK(ur.components() == 2);
  for (std::size_t k = 0; k < ur.grid().size(); ++k) {
    CHECK(ur.component(0)[k].real() + ur.component(1)[k].real() == doctest::Approx(3.0));
  }

  const auto cac = default_model("cac").with_grid(64);
  const Field uc = initial_condition(cac, make_model_grid(cac));
  CHECK(norm_inf(uc) <= 1.0);
  // Inside a bubble u is near +1, far outside near -1.
  CHECK(uc[node(uc.grid(), 0.3, 0.0)].real() > 0.9);
  CHECK(uc[0].real() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("Allen-Cahn energy") {
  const auto ac = default_model("ac").with_grid(64);
  const auto g = make_model_grid(ac);
  Field one = sample(g, ScalarKind::Real, [](double, double) { return 1.0; });
  CHECK(std::abs(energy(ac, one)) < 1e-14);
  Field zero(g, ScalarKind::Real);
  CHECK(energy(ac, zero) == doctest::Approx(pi * pi).epsilon(1e-13));

  // Independent oracle: 4096-point composite trapezoid in x, exact factor 2 pi in y.
  Field s = sample(g, ScalarKind::Real, [](double x, double) { return std::sin(x); });
  const double eps = 0.1;
  const int m = 4096;
  double q = 0;
  for (int i = 0; i < m; ++i) {
    const double x = 2 * pi * i / m;
    const double c = std::cos(x), sn = std::sin(x);
    q += 0.5 * eps * eps * c * c + 0.25 * (sn * sn - 1) * (sn * sn - 1);
  }
  q *= (2 * pi / m) * (2 * pi);
  CHECK(std::abs(energy(ac, s) - q) < 1e-8);
}

TEST_CASE("mass") {
  const auto ac = default_model("ac").with_grid(32);
  const auto g = make_model_grid(ac);
  Field one = sample(g, ScalarKind::Real, [](double, double) { return 1.0; });
  CHECK(mass(ac, one) == doctest::Approx(4 * pi * pi).epsilon(1e-14));
  CHECK(mass(ac, Field(g, ScalarKind::Real)) == 0.0);

  const auto nn = default_model("nls_nonlinear").with_grid(32);
  const auto gn = make_model_grid(nn);
  Field c1 = sample(gn, ScalarKind::Complex, [](double, double) { return 1.0; });
  CHECK(mass(nn, c1) == doctest::Approx(4 * pi * pi).epsilon(1e-14));

  // Q of the linear exact solution: (int sech^2)^2 = 4, tails below 1e-9.
  const auto nl = default_model("nls_linear").with_grid(400);
  const auto gl = make_model_grid(nl);
  CHECK(std::abs(mass(nl, exact_solution(nl, 0.0, gl)) - 4.0) < 1e-6);
}

TEST_CASE("exact solutions and potentials") {
  const auto nl = default_model("nls_linear").with_grid(64);
  const auto gl = make_model_grid(nl);
  const Field e0 = exact_solution(nl, 0.0, gl);
  CHECK(std::abs(e0[node(*gl, 0.0, 0.0)] - Complex(0, 1)) < 1e-15);
  CHECK(potential(nl, gl)[node(*gl, 0.0, 0.0)].real() == doctest::Approx(3.0));

  const auto nn = default_model("nls_nonlinear").with_grid(64);
  const auto gn = make_model_grid(nn);
  const Field ep = exact_solution(nn, pi, gn);
  CHECK(std::abs(ep[node(*gn, pi / 2, pi / 2)] - Complex(1, 0)) < 1e-14);
  const Field w = potential(nn, gn);
  CHECK(w[node(*gn, 0.0, 0.0)].real() == doctest::Approx(-1.0));
  CHECK(w[node(*gn, pi / 2, pi / 2)].real() == doctest::Approx(1.0));

  CHECK_THROWS_AS(exact_solution(default_model("toy"), 0.0,
                                 make_model_grid(default_model("toy").with_grid(8))),
                  std::invalid_argument);
  CHECK_THROWS_AS(potential(default_model("ac"), gn), std::invalid_argument);
}

TEST_CASE("nonlinear Schroedinger residual of the exact solution") {
  // Residual of i u_t = -eps Lap u - omega u - rho |u|^2 u with the analytic
  // time derivative and spectral Laplacian.
  auto residual = [](const ModelSpec& spec, double t) {
    const auto g = make_model_grid(spec);
    const Field u = exact_solution(spec, t, g);
    const Field lap = spectral_laplacian(u);
    const Field w = potential(spec, g);
    const double eps = spec.param("eps"), rho = spec.param("rho");
    Field r(g, ScalarKind::Complex);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Complex ut = spec.id == ModelId::NlsNonlinear ? Complex(0, -2) * u[k]
                                                          : Complex(0, 1) * u[k];
      r[k] = Complex(0, 1) * ut + eps * lap[k] + w[k].real() * u[k] +
             rho * std::norm(u[k]) * u[k];
    }
    return norm_l2(r);
  };
  auto consistent = default_model("nls_nonlinear").with_grid(128);
  consistent.potential = NlsPotential::Consistent;
  CHECK(residual(consistent, 0.3) <= 1e-8);
  // The printed potential leaves an O(1) residual.
  CHECK(residual(default_model("nls_nonlinear").with_grid(128), 0.3) > 0.1);
  // Linear problem: residual limited by the sech tails at the boundary.
  CHECK(residual(default_model("nls_linear").with_grid(400), 0.3) <= 1e-8);
}

TEST_CASE("other energies") {
  const auto toy = default_model("toy").with_grid(32);
  const auto gt = make_model_grid(toy);
  CHECK(std::abs(energy(toy, Field(gt, ScalarKind::Real))) < 1e-14);

  const auto nn = default_model("nls_nonlinear").with_grid(64);
  const auto gn = make_model_grid(nn);
  const double e = energy(nn, exact_solution(nn, 0.0, gn));
  CHECK(std::isfinite(e));
  CHECK(e == doctest::Approx(energy(nn, exact_solution(nn, 1.7, gn))).epsilon(1e-12));

  // The printed rd energy needs v - 1 + ln(k_minus) > 0, which fails for
  // the initial data.
  const auto rd = default_model("rd_system").with_grid(32);
  const auto gr = make_model_grid(rd);
  CHECK_THROWS_AS(energy(rd, initial_condition(rd, gr)), std::domain_error);
  const auto rd2 = rd.with_param("k_minus", 20.0);
  CHECK(std::isfinite(energy(rd2, initial_condition(rd2, gr))));
}

TEST_CASE("conservative Allen-Cahn keeps mass under one step") {
  const auto cac = default_model("cac").with_grid(64);
  const auto g = make_model_grid(cac);
  const Field u0 = initial_condition(cac, g);
  const auto fl = flows(cac, g);
  const double m0 = mass(cac, u0);
  for (auto name : catalog_names()) {
    const auto s = catalog(name);
    if (s.scheme_class != SchemeClass::MpePositive) continue;
    CAPTURE(name);
    const double m1 = mass(cac, apply(s, fl, 0.01, u0));
    CHECK(std::abs(m1 - m0) <= 1e-10 * std::abs(m0));
  }
}

TEST_CASE("phase flow preserves Q") {
  const auto nn = default_model("nls_nonlinear").with_grid(32);
  const auto g = make_model_grid(nn);
  const auto fl = flows(nn, g);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  Field u(g, ScalarKind::Complex);
  for (auto& z : u.values()) z = Complex(d(rng), d(rng));
  const double q0 = mass(nn, u);
  CHECK(std::abs(mass(nn, fl.b_flow(0.37, u)) - q0) <= 1e-12 * q0);
}

TEST_CASE("Allen-Cahn maximum principle for the exact sub-flows") {
  const auto ac = default_model("ac").with_grid(64);
  const auto g = make_model_grid(ac);
  const auto fl = flows(ac, g);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Field u(g, ScalarKind::Real);
  for (auto& z : u.values()) z = d(rng);
  for (double tau : {1e-3, 0.1, 1.0}) {
    CHECK(norm_inf(fl.b_flow(tau, u)) <= 1.0 + 1e-12);
    CHECK(norm_inf(fl.a_flow(tau, u)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("model flows") {
  for (auto name : model_names()) {
    auto spec = default_model(name).with_grid(16);
    const auto g = make_model_grid(spec);
    const Field u0 = initial_condition(spec, g);
    const auto fl = flows(spec, g);
    CAPTURE(name);
    const Field a = fl.a_flow(0.0, u0);
    const Field b = fl.b_flow(0.0, u0);
    for (std::size_t k = 0; k < u0.size(); ++k) {
      CHECK(std::abs(a[k] - u0[k]) <= 1e-14);
      CHECK(std::abs(b[k] - u0[k]) <= 1e-15);
    }
    const auto nf = nonlinear_flow(spec, g);
    if (nf.kind() != FlowKind::ClosedFormPhase) CHECK(nf.lipschitz_kappa() > 0.0);
  }
  CHECK(to_json(default_model("fkpp")).at("params").at("K") == 2772.0);
}
