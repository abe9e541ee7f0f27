#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "mpe/harness.hpp"

using namespace mpe;

namespace {

std::string read_body(const std::string& path) {
  std::ifstream is(path);
  std::string first;
  std::getline(is, first);  // timestamp line
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig small_ac(const std::string& scheme, double tau, double t_final) {
  RunConfig c;
  c.model = "ac";
  c.scheme = scheme;
  c.n = 32;
  c.tau = tau;
  c.t_final = t_final;
  return c;
}

}  // namespace

TEST_CASE("adaptive_tau examples") {
  const StepController c(0.01, 0.1, 1e6);
  CHECK(adaptive_tau(c, 0.0) == 0.1);
  CHECK(adaptive_tau(c, 1e300) == 0.01);
  CHECK(adaptive_tau(c, std::numeric_limits<double>::infinity()) == 0.01);
  CHECK(adaptive_tau(c, 1e-3) == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(adaptive_tau(c, -1e-3) == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-15));
  for (double e : {1e-6, 1e-4, 1e-2, 1.0, 1e3}) {
    const double t = adaptive_tau(c, e);
    CHECK(t >= 0.01);
    CHECK(t <= 0.1);
  }
  CHECK_THROWS_AS(StepController(0.2, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepController(0.0, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepController(0.01, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("estimate_e_prime") {
  std::vector<EnergySample> h = {{0.0, 2.0}, {0.1, 2.0}};
  CHECK(estimate_e_prime(h) == 0.0);
  h = {{0.0, 2.0}, {0.1, 1.5}};
  CHECK(estimate_e_prime(h) == doctest::Approx(-5.0).epsilon(1e-14));
  h = {{0.3, 1.0}};
  CHECK(estimate_e_prime(h) == 0.0);
  h = {{0.3, 1.0}, {0.3, 0.5}};
  CHECK_THROWS_AS(estimate_e_prime(h), std::invalid_argument);

  StepController c(0.01, 0.1, 1e6);
  CHECK(c.next_tau() == 0.1);
  c.record(0.0, 1.0);
  c.record(0.1, 1.0);
  c.record(0.2, 0.9);
  CHECK(c.history().size() == 2);
  CHECK(c.history().front().t == 0.1);
  CHECK(c.next_tau() == 0.01);  // E' = -1 pushes below tau_min
}

TEST_CASE("convergence rates") {
  const std::vector<double> taus = {0.2, 0.1, 0.05};
  const std::vector<double> errs = {64.0, 8.0, 1.0};
  const auto r = convergence_rates(taus, errs);
  CHECK(std::isnan(r[0]));
  CHECK(r[1] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r[2] == doctest::Approx(3.0).epsilon(1e-14));
  const std::vector<double> bad = {1.0};
  CHECK_THROWS_AS(convergence_rates(taus, bad), std::invalid_argument);
}

TEST_CASE("random subdivision") {
  std::mt19937_64 rng(5);
  for (int n : {1, 10, 80}) {
    const auto s = random_subdivision(0.5, n, rng);
    CHECK(s.size() == static_cast<std::size_t>(n));
    double total = 0;
    for (double x : s) {
      CHECK(x > 0.0);
      CHECK(x <= 0.5);
      total += x;
    }
    CHECK(total == doctest::Approx(0.5).epsilon(1e-14));
  }
  std::mt19937_64 a(9), b(9);
  CHECK(random_subdivision(1.0, 20, a) == random_subdivision(1.0, 20, b));
  CHECK_THROWS_AS(random_subdivision(1.0, 0, a), std::invalid_argument);
}

TEST_CASE("run mechanics") {
  SUBCASE("zero final time returns the initial state") {
    const auto r = run(small_ac("strang_a", 0.1, 0.0));
    CHECK(r.status == RunStatus::Completed);
    CHECK(r.rows.size() == 1);
    CHECK(r.steps_taken == 0);
  }
  SUBCASE("shortened final step") {
    auto c = small_ac("strang_a", 0.3, 1.0);
    const auto r = run(c);
    CHECK(r.steps_taken == 4);
    REQUIRE(r.rows.size() == 5);
    CHECK(r.rows.back().t == 1.0);
    CHECK(r.rows.back().tau == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.rows[2].t == doctest::Approx(0.6).epsilon(1e-15));
  }
  SUBCASE("diagnostics sampling") {
    auto c = small_ac("strang_a", 0.1, 1.0);
    c.diagnostics_every = 0;
    CHECK(run(c).rows.size() == 2);
    c.diagnostics_every = 3;
    CHECK(run(c).rows.size() == 5);  // 0, 3, 6, 9, 10
  }
  SUBCASE("determinism") {
    const auto c = small_ac("s4_4", 0.05, 0.5);
    const auto r1 = run(c), r2 = run(c);
    REQUIRE(r1.rows.size() == r2.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
      CHECK(r1.rows[i].energy == r2.rows[i].energy);
      CHECK(r1.rows[i].max_norm == r2.rows[i].max_norm);
    }
    CHECK(error_inf(r1.final_state, r2.final_state) == 0.0);
  }
  SUBCASE("negative schemes need allow_backward") {
    auto c = small_ac("s4_neg", 0.05, 0.1);
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    c.allow_backward = true;
    CHECK(run(c).steps_taken == 2);
  }
  SUBCASE("rd monitor") {
    RunConfig c;
    c.model = "rd_system";
    c.scheme = "s3_1";
    c.n = 32;
    c.tau = 0.01;
    c.t_final = 0.05;
    c.params["M"] = 1.0;
    const auto r = run(c);
    CHECK(r.status == RunStatus::MonitorViolation);
    CHECK(r.rows.back().max_norm > 1.0);
  }
  SUBCASE("explicit schedule") {
    auto c = small_ac("strang_a", 0.1, 0.3);
    c.steps = {0.1, 0.05, 0.15};
    const auto r = run(c);
    CHECK(r.steps_taken == 3);
    CHECK(r.final_time == doctest::Approx(0.3).epsilon(1e-14));
  }
  SUBCASE("invalid configs") {
    auto c = small_ac("strang_a", -0.1, 1.0);
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    c = small_ac("nope", 0.1, 1.0);
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    c = small_ac("strang_a", 0.1, 1.0);
    c.format = "xml";
    CHECK_THROWS_AS(run(c), std::invalid_argument);
  }
}

TEST_CASE("adaptive run keeps tau in bounds") {
  RunConfig c;
  c.model = "cac";
  c.scheme = "s3_1";
  c.n = 32;
  c.adaptive = true;
  c.t_final = 0.5;
  const auto r = run(c);
  CHECK(r.status == RunStatus::Completed);
  REQUIRE(r.rows.size() >= 2);
  CHECK(r.rows[1].tau == 0.1);  // no energy slope yet
  for (std::size_t i = 1; i + 1 < r.rows.size(); ++i) {
    CHECK(r.rows[i].tau >= 0.01 * (1 - 1e-12));
    CHECK(r.rows[i].tau <= 0.1 * (1 + 1e-12));
  }
}

TEST_CASE("energy decreases for Allen-Cahn with positive schemes") {
  for (auto name : {"strang_a", "s3_1", "s4_4"}) {
    CAPTURE(name);
    const auto r = run(small_ac(name, 1.0 / 40, 1.0));
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      CHECK(r.rows[i].energy <= r.rows[i - 1].energy + 1e-8);
    }
  }
}

TEST_CASE("convergence study on the toy model") {
  RunConfig c;
  c.model = "toy";
  c.scheme = "strang_a";
  c.n = 16;
  c.t_final = 1.0;
  const Field ref = reference_solution(c, false, "s6", 1.0 / 200);
  const std::vector<double> taus = {0.1, 0.05, 0.025};
  const auto rep = convergence_study(c, taus, ref);
  REQUIRE(rep.rows.size() == 3);
  CHECK(std::isnan(rep.rows[0].rate));
  CHECK(rep.rows[2].rate == doctest::Approx(2.0).epsilon(0.1));
  CHECK(rep.rows[0].subintervals == 10);
  std::vector<double> e;
  for (const auto& row : rep.rows) e.push_back(row.error_inf);
  const auto recomputed = convergence_rates(taus, e);
  for (std::size_t i = 1; i < 3; ++i) CHECK(recomputed[i] == rep.rows[i].rate);

  c.seed = 3;
  const std::vector<int> counts = {10, 20, 40};
  const auto rr = convergence_study_random(c, counts, ref);
  REQUIRE(rr.rows.size() == 3);
  for (const auto& row : rr.rows) CHECK(row.tau >= 1.0 / row.subintervals);
  CHECK(rr.rows[2].error_inf < rr.rows[0].error_inf);

  RunConfig nl;
  nl.model = "nls_linear";
  nl.n = 16;
  nl.t_final = 0.5;
  const Field exact = reference_solution(nl, true, "", 0.0);
  CHECK(exact.kind() == ScalarKind::Complex);
}

TEST_CASE("presets") {
  CHECK(preset_names().size() == 8);
  const auto cac = preset("cac_adaptive");
  CHECK(cac.config.adaptive);
  CHECK(cac.config.tau_min == 0.01);
  CHECK(cac.config.tau_max == 0.1);
  CHECK(cac.config.alpha == 1e6);
  CHECK(cac.config.t_final == 60.0);

  const auto rd = preset("rd_accuracy");
  CHECK(rd.reference_scheme == "s4_1");
  CHECK(rd.reference_tau == 1.0 / 1600);
  CHECK(rd.config.t_final == 0.2);
  CHECK(resolve_model(rd.config).length / resolve_model(rd.config).n ==
        doctest::Approx(1.0 / 512));

  auto toy = preset("toy_accuracy");
  toy.config.n = 128;
  const auto spec = resolve_model(toy.config);
  CHECK(spec.n == 128);
  CHECK(spec.param("eps") == 0.1);
  CHECK(toy.reference_scheme == "s6");
  CHECK(toy.reference_tau == 1.0 / 200);

  CHECK_THROWS_AS(preset("unknown"), std::invalid_argument);
  for (auto name : preset_names()) CHECK_NOTHROW(preset(name).config.validate());
}

TEST_CASE("config JSON round trip") {
  RunConfig c = small_ac("s4_2", 0.02, 3.0);
  c.params["eps"] = 0.05;
  c.seed = 77;
  c.steps = {0.1, 0.2};
  const RunConfig back = run_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(back.model == "ac");
  CHECK(back.scheme == "s4_2");
  CHECK(back.params.at("eps") == 0.05);
  CHECK(*back.n == 32);
  CHECK(back.seed == 77u);
  CHECK(back.steps == c.steps);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"bogus", 1}}), std::invalid_argument);

  // Keys absent from the file keep the base values.
  RunConfig base;
  base.tau = 0.5;
  CHECK(run_config_from_json(nlohmann::json{{"model", "cac"}}, base).tau == 0.5);

  CHECK(resolve_scheme("richardson(1,2)").terms.size() == 2);
  CHECK_THROWS_AS(resolve_scheme("richardson(1,x)"), std::invalid_argument);
}

TEST_CASE("CSV output") {
  const auto dir = std::filesystem::temp_directory_path() / "mpe_test_harness";
  std::filesystem::create_directories(dir);
  const auto c = small_ac("strang_a", 0.1, 0.3);
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  write_diagnostics_csv(a, run(c));
  write_diagnostics_csv(b, run(c));
  std::ifstream is(a);
  std::string first, header;
  std::getline(is, first);
  std::getline(is, header);
  CHECK(first.rfind("# generated ", 0) == 0);
  CHECK(header == "step,t,tau,energy,mass,max_norm");
  CHECK(read_body(a) == read_body(b));

  ConvergenceReport rep{"s3_1", {{0.1, 10, 8.0, 1.0, std::nan("")}, {0.05, 20, 1.0, 0.1, 3.0}}};
  const auto cpath = (dir / "conv.csv").string();
  write_convergence_csv(cpath, rep);
  std::ifstream cs(cpath);
  std::getline(cs, first);
  std::getline(cs, header);
  CHECK(header == "tau,error_inf,rate");
  std::string row;
  std::getline(cs, row);
  CHECK(row == "0.10000000000000001,8,");
  CHECK(to_json(rep).at("rows").at(0).at("rate").is_null());

  const auto j = to_json(run(c));
  CHECK(j.at("status") == "completed");
  CHECK(j.at("diagnostics").size() == 4);
}
