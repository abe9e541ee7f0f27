// mpesplit: run, verify and benchmark operator-splitting schemes.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpe/field_io.hpp"
#include "mpe/harness.hpp"
#include "mpe/models.hpp"
#include "mpe/order_verify.hpp"
#include "mpe/scheme.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by `run` and `converge`. Values only override the config
// when the flag was given on the command line.
struct RunFlags {
  std::string config_file;
  std::string preset_name;
  std::string model, scheme, format, out, nls_potential;
  int nx = 0;
  double tau = 0, tfinal = 0, tau_min = 0, tau_max = 0, alpha = 0;
  bool adaptive = false, allow_backward = false;
  std::uint64_t seed = 0;
  int diagnostics_every = 1, rk_substeps = 4;
  std::vector<std::string> params;

  std::map<std::string, CLI::Option*> opt;

  void attach(CLI::App* app) {
    opt["config"] = app->add_option("--config", config_file, "JSON run config file")
                        ->check(CLI::ExistingFile);
    opt["preset"] = app->add_option("--preset", preset_name, "start from a named preset");
    opt["model"] = app->add_option("--model", model, "model name");
    opt["scheme"] = app->add_option("--scheme", scheme, "scheme name");
    opt["nx"] = app->add_option("--nx", nx, "grid points per axis");
    opt["tau"] = app->add_option("--tau", tau, "uniform step");
    opt["tfinal"] = app->add_option("--tfinal", tfinal, "final time");
    opt["adaptive"] = app->add_flag("--adaptive", adaptive, "energy-based adaptive steps");
    opt["tau_min"] = app->add_option("--tau-min", tau_min);
    opt["tau_max"] = app->add_option("--tau-max", tau_max);
    opt["alpha"] = app->add_option("--alpha", alpha);
    opt["out"] = app->add_option("--out", out, "output directory");
    opt["seed"] = app->add_option("--seed", seed);
    opt["format"] = app->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    opt["allow_backward"] = app->add_flag("--allow-backward", allow_backward,
                                          "permit negative linear substeps");
    opt["diagnostics_every"] = app->add_option("--diagnostics-every", diagnostics_every);
    opt["rk_substeps"] = app->add_option("--rk-substeps", rk_substeps);
    opt["nls_potential"] = app->add_option("--nls-potential", nls_potential)
                               ->check(CLI::IsMember({"printed", "consistent"}));
    opt["param"] = app->add_option("--param", params, "model parameter override key=value");
  }

  bool given(const std::string& key) const { return opt.at(key)->count() > 0; }

  mpe::RunConfig build(mpe::Preset* preset_out = nullptr) const {
    mpe::RunConfig c;
    if (given("preset")) {
      mpe::Preset p = mpe::preset(preset_name);
      c = p.config;
      if (preset_out != nullptr) *preset_out = p;
    }
    if (given("config")) {
      std::ifstream is(config_file);
      c = mpe::run_config_from_json(json::parse(is), c);
    }
    if (given("model")) c.model = model;
    if (given("scheme")) c.scheme = scheme;
    if (given("nx")) c.n = nx;
    if (given("tau")) c.tau = tau;
    if (given("tfinal")) c.t_final = tfinal;
    if (given("adaptive")) c.adaptive = adaptive;
    if (given("tau_min")) c.tau_min = tau_min;
    if (given("tau_max")) c.tau_max = tau_max;
    if (given("alpha")) c.alpha = alpha;
    if (given("out")) c.out_dir = out;
    if (given("seed")) c.seed = seed;
    if (given("format")) c.format = format;
    if (given("allow_backward")) c.allow_backward = allow_backward;
    if (given("diagnostics_every")) c.diagnostics_every = diagnostics_every;
    if (given("rk_substeps")) c.rk_substeps = rk_substeps;
    if (given("nls_potential")) c.nls_potential = nls_potential;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--param expects key=value");
      c.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    c.validate();
    return c;
  }
};

fs::path prepare_out(const std::string& dir) {
  fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
  fs::create_directories(p);
  return p;
}

int cmd_run(const RunFlags& f) {
  const mpe::RunConfig c = f.build();
  const mpe::RunRecord r = mpe::run(c);
  const fs::path dir = prepare_out(c.out_dir);
  if (c.format == "csv") {
    mpe::write_diagnostics_csv((dir / "diagnostics.csv").string(), r);
  } else {
    std::ofstream(dir / "run.json") << mpe::to_json(r).dump(2) << '\n';
  }
  mpe::write_field(dir / "final", r.final_state);
  std::cout << "status " << mpe::to_string(r.status) << ", steps " << r.steps_taken
            << ", t " << r.final_time;
  if (!r.message.empty()) std::cout << " (" << r.message << ")";
  std::cout << "\n";
  return r.status == mpe::RunStatus::Completed ? 0 : 3;
}

struct ConvergeFlags {
  std::vector<double> ladder;
  std::vector<int> random_counts;
  std::string ref_scheme;
  double ref_tau = 0;
  bool exact = false;
  std::string reference, save_reference;
};

int cmd_converge(const RunFlags& f, const ConvergeFlags& g) {
  mpe::Preset p;
  mpe::RunConfig c = f.build(&p);
  const bool from_preset = f.given("preset");
  if (from_preset && p.accuracy_t_final > 0 && !f.given("tfinal")) {
    c.t_final = p.accuracy_t_final;
  }
  std::vector<double> ladder = g.ladder.empty() && from_preset ? p.ladder : g.ladder;
  std::vector<int> counts =
      g.random_counts.empty() && from_preset ? p.random_counts : g.random_counts;
  if (!g.ladder.empty()) counts.clear();
  if (!g.random_counts.empty()) ladder.clear();
  if (ladder.empty() == counts.empty()) {
    throw std::invalid_argument("give exactly one of --ladder or --random");
  }

  mpe::Field reference;
  if (!g.reference.empty()) {
    reference = mpe::read_field(g.reference);
    const mpe::ModelSpec spec = mpe::resolve_model(c);
    const mpe::GridPtr grid = mpe::make_model_grid(spec);
    if (!reference.grid().same_as(*grid)) {
      throw std::invalid_argument("reference grid differs from the run grid");
    }
    // Rebind to the run grid object so fields compare as compatible.
    reference = mpe::Field(grid, reference.kind(),
                           std::vector<mpe::Complex>(reference.values().begin(),
                                                     reference.values().end()),
                           reference.components());
  } else {
    const bool exact = g.exact || (from_preset && p.exact_reference && g.ref_scheme.empty());
    const std::string scheme = !g.ref_scheme.empty() ? g.ref_scheme : p.reference_scheme;
    const double tau = g.ref_tau > 0 ? g.ref_tau : p.reference_tau;
    if (!exact && (scheme.empty() || !(tau > 0))) {
      throw std::invalid_argument("need --exact, --reference, or --ref-scheme with --ref-tau");
    }
    reference = mpe::reference_solution(c, exact, scheme, tau);
  }
  if (!g.save_reference.empty()) mpe::write_field(g.save_reference, reference);

  const mpe::ConvergenceReport rep =
      ladder.empty() ? mpe::convergence_study_random(c, counts, reference)
                     : mpe::convergence_study(c, ladder, reference);
  const fs::path dir = prepare_out(c.out_dir);
  if (c.format == "csv") {
    mpe::write_convergence_csv((dir / "convergence.csv").string(), rep);
  } else {
    std::ofstream(dir / "convergence.json") << mpe::to_json(rep).dump(2) << '\n';
  }
  for (const auto& row : rep.rows) {
    std::cout << "tau " << row.tau << "  error_inf " << row.error_inf << "  rate "
              << row.rate << "\n";
  }
  return 0;
}

struct OrderFlags {
  std::string scheme = "all";
  std::uint64_t seed = 42;
  int dim = 6;
  double tau_max = 5e-2, tau_min = 3e-3;
  int count = 8;
  std::string precision = "extended";
};

int cmd_order_check(const OrderFlags& o) {
  const auto oracle = mpe::make_matrix_oracle(o.seed, o.dim);
  const auto ladder = mpe::geometric_ladder(o.tau_max, o.tau_min, o.count);
  const auto prec =
      o.precision == "double" ? mpe::Precision::Double : mpe::Precision::Extended;
  json out = json::array();
  if (o.scheme == "all") {
    for (auto name : mpe::catalog_names()) {
      out.push_back(mpe::order_report(mpe::catalog(name), oracle, ladder, prec));
    }
  } else {
    out.push_back(mpe::order_report(mpe::resolve_scheme(o.scheme), oracle, ladder, prec));
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_list_schemes(bool as_json) {
  json out = json::array();
  for (auto name : mpe::catalog_names()) {
    const auto s = mpe::catalog(name);
    const auto st = mpe::scheme_stats(s);
    if (as_json) {
      json j = mpe::to_json(s);
      j["sum_c_abs"] = mpe::to_string(st.sum_c_abs);
      j["b_max"] = mpe::to_string(st.b_max);
      out.push_back(j);
    } else {
      std::cout << name << "  order " << s.claimed_order << "  "
                << mpe::to_string(s.scheme_class) << "  terms " << s.terms.size()
                << "  sum|c| " << mpe::to_string(st.sum_c_abs) << "  b "
                << mpe::to_string(st.b_max) << "\n";
    }
  }
  if (as_json) std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_list_models() {
  json out = json::array();
  for (auto name : mpe::model_names()) out.push_back(mpe::to_json(mpe::default_model(name)));
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_preset(const std::string& name) {
  if (name.empty()) {
    for (auto n : mpe::preset_names()) std::cout << n << "\n";
    return 0;
  }
  std::cout << mpe::to_json(mpe::preset(name)).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-product and single-product operator-splitting integrators"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "integrate one model with one scheme");
  run_flags.attach(run);

  RunFlags conv_flags;
  ConvergeFlags conv;
  auto* converge = app.add_subcommand("converge", "temporal convergence table");
  conv_flags.attach(converge);
  converge->add_option("--ladder", conv.ladder, "uniform step sizes")->delimiter(',');
  converge->add_option("--random", conv.random_counts, "random-grid subinterval counts")
      ->delimiter(',');
  converge->add_option("--ref-scheme", conv.ref_scheme);
  converge->add_option("--ref-tau", conv.ref_tau);
  converge->add_flag("--exact", conv.exact, "compare against the exact solution");
  converge->add_option("--reference", conv.reference, "stored reference field (base path)");
  converge->add_option("--save-reference", conv.save_reference);

  OrderFlags order;
  auto* order_check = app.add_subcommand("order-check", "algebraic and empirical order");
  order_check->add_option("--scheme", order.scheme, "scheme name or all");
  order_check->add_option("--seed", order.seed);
  order_check->add_option("--dim", order.dim);
  order_check->add_option("--tau-max", order.tau_max);
  order_check->add_option("--tau-min", order.tau_min);
  order_check->add_option("--count", order.count);
  order_check->add_option("--precision", order.precision)
      ->check(CLI::IsMember({"double", "extended"}));

  bool schemes_json = false;
  auto* list_schemes = app.add_subcommand("list-schemes", "print the scheme catalog");
  list_schemes->add_flag("--json", schemes_json);

  auto* list_models = app.add_subcommand("list-models", "print model defaults");

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "print a preset (or list presets)");
  preset->add_option("name", preset_name);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (converge->parsed()) return cmd_converge(conv_flags, conv);
    if (order_check->parsed()) return cmd_order_check(order);
    if (list_schemes->parsed()) return cmd_list_schemes(schemes_json);
    if (list_models->parsed()) return cmd_list_models();
    if (preset->parsed()) return cmd_preset(preset_name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
