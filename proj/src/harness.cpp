#include "mpe/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mpe/apply.hpp"

namespace mpe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, 8> kPresetNames = {
    "toy_accuracy", "ac_compare",          "cac_adaptive", "fkpp",
    "nls_linear_accuracy", "nls_nonlinear", "rd_system",    "rd_accuracy"};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

// RunConfig ---------------------------------------------------------------------

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (!(t_final >= 0.0)) fail("t_final must be >= 0");
  if (steps.empty() && !adaptive && !(tau > 0.0)) fail("tau must be positive");
  if (adaptive && !(tau_min > 0.0 && tau_min <= tau_max && alpha > 0.0)) {
    fail("adaptive stepping needs 0 < tau_min <= tau_max and alpha > 0");
  }
  for (double s : steps) {
    if (!(s > 0.0)) fail("explicit steps must be positive");
  }
  if (diagnostics_every < 0) fail("diagnostics_every must be >= 0");
  if (rk_substeps < 1) fail("rk_substeps must be >= 1");
  if (format != "csv" && format != "json") fail("format must be csv or json");
  if (nls_potential != "printed" && nls_potential != "consistent") {
    fail("nls_potential must be printed or consistent");
  }
  if (n && (*n < 2 || *n % 2 != 0)) fail("grid size must be even and >= 2");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["model"] = c.model;
  j["params"] = c.params;
  j["nls_potential"] = c.nls_potential;
  j["scheme"] = c.scheme;
  if (c.n) j["n"] = *c.n;
  j["tau"] = c.tau;
  j["t_final"] = c.t_final;
  j["adaptive"] = c.adaptive;
  j["tau_min"] = c.tau_min;
  j["tau_max"] = c.tau_max;
  j["alpha"] = c.alpha;
  if (!c.steps.empty()) j["steps"] = c.steps;
  j["diagnostics_every"] = c.diagnostics_every;
  j["rk_substeps"] = c.rk_substeps;
  j["allow_backward"] = c.allow_backward;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["format"] = c.format;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  static const std::array<std::string_view, 18> known = {
      "model",   "params",  "nls_potential", "scheme",         "n",
      "tau",     "t_final", "adaptive",      "tau_min",        "tau_max",
      "alpha",   "steps",   "diagnostics_every", "rk_substeps", "allow_backward",
      "seed",    "out_dir", "format"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("unknown run config key: " + key);
    }
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("model", c.model);
  if (j.contains("params")) {
    for (const auto& [k, v] : j.at("params").items()) c.params[k] = v.get<double>();
  }
  get("nls_potential", c.nls_potential);
  get("scheme", c.scheme);
  if (j.contains("n")) c.n = j.at("n").get<int>();
  get("tau", c.tau);
  get("t_final", c.t_final);
  get("adaptive", c.adaptive);
  get("tau_min", c.tau_min);
  get("tau_max", c.tau_max);
  get("alpha", c.alpha);
  get("steps", c.steps);
  get("diagnostics_every", c.diagnostics_every);
  get("rk_substeps", c.rk_substeps);
  get("allow_backward", c.allow_backward);
  get("seed", c.seed);
  get("out_dir", c.out_dir);
  get("format", c.format);
  return c;
}

ModelSpec resolve_model(const RunConfig& c) {
  ModelSpec spec = default_model(c.model);
  for (const auto& [k, v] : c.params) spec = spec.with_param(k, v);
  if (c.n) spec = spec.with_grid(*c.n);
  spec.potential =
      c.nls_potential == "consistent" ? NlsPotential::Consistent : NlsPotential::Printed;
  return spec;
}

SplitScheme resolve_scheme(std::string_view name) {
  constexpr std::string_view prefix = "richardson(";
  if (name.starts_with(prefix) && name.ends_with(")")) {
    std::string inner(name.substr(prefix.size(), name.size() - prefix.size() - 1));
    std::vector<int> gammas;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        gammas.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad richardson scheme: " + std::string(name));
      }
    }
    return richardson_scheme(gammas);
  }
  return catalog(name);
}

// Step control ------------------------------------------------------------------

StepController::StepController(double tau_min, double tau_max, double alpha)
    : tau_min_(tau_min), tau_max_(tau_max), alpha_(alpha) {
  if (!(tau_min > 0.0 && tau_min <= tau_max && alpha > 0.0)) {
    throw std::invalid_argument("step controller needs 0 < tau_min <= tau_max, alpha > 0");
  }
}

void StepController::record(double t, double energy) {
  history_.push_back({t, energy});
  if (history_.size() > 2) history_.erase(history_.begin());
}

double StepController::next_tau() const {
  return adaptive_tau(*this, estimate_e_prime(history_));
}

double adaptive_tau(const StepController& c, double e_prime) {
  const double raw = c.tau_max() / std::sqrt(1.0 + c.alpha() * e_prime * e_prime);
  if (!std::isfinite(raw)) return c.tau_min();
  return std::clamp(std::max(c.tau_min(), raw), c.tau_min(), c.tau_max());
}

double estimate_e_prime(std::span<const EnergySample> history) {
  if (history.size() < 2) return 0.0;
  const auto& a = history[history.size() - 2];
  const auto& b = history[history.size() - 1];
  if (b.t == a.t) throw std::invalid_argument("energy samples share a time");
  return (b.energy - a.energy) / (b.t - a.t);
}

// Runs --------------------------------------------------------------------------

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::MonitorViolation: return "monitor_violation";
    case RunStatus::Failed: return "failed";
  }
  return "unknown";
}

RunRecord run(const RunConfig& config) {
  config.validate();
  const ModelSpec spec = resolve_model(config);
  const GridPtr grid = make_model_grid(spec);
  return run(config, grid, initial_condition(spec, grid));
}

RunRecord run(const RunConfig& config, const GridPtr& grid, Field u) {
  config.validate();
  ModelSpec spec = resolve_model(config).with_grid(grid->n());
  const SplitScheme scheme = resolve_scheme(config.scheme);
  if (scheme.scheme_class == SchemeClass::SpeNegative && !config.allow_backward) {
    throw std::invalid_argument("scheme " + scheme.name +
                                " has negative steps; pass allow_backward");
  }
  if (spec.id == ModelId::Fkpp) {
    for (const auto& z : u.values()) {
      if (!(z.real() >= 0.0 && z.real() <= 1.0)) {
        throw std::invalid_argument("fkpp initial data must lie in [0, 1]");
      }
    }
  }
  const FlowPair<Field> fl =
      flows(spec, grid, FlowOptions{RkConfig{config.rk_substeps}, config.allow_backward});
  const NumericScheme<double> numeric = to_numeric<double>(scheme);
  const bool monitor = spec.id == ModelId::RdSystem;
  const double monitor_bound =
      monitor ? spec.param("M") : std::numeric_limits<double>::infinity();

  RunRecord rec;
  rec.config = config;
  auto safe_energy = [&](const Field& f) {
    try {
      return energy(spec, f);
    } catch (const std::domain_error&) {
      return kNaN;
    }
  };
  auto diag = [&](long step, double t, double tau, const Field& f) {
    return DiagnosticsRow{step, t, tau, safe_energy(f), mass(spec, f), max_norm(f)};
  };

  rec.rows.push_back(diag(0, 0.0, 0.0, u));
  std::optional<StepController> controller;
  if (config.adaptive && config.steps.empty()) {
    controller.emplace(config.tau_min, config.tau_max, config.alpha);
    controller->record(0.0, rec.rows.front().energy);
  }

  const double T = config.t_final;
  const double slack = 1e-12 * std::max(1.0, T);
  double t = 0.0;
  long step = 0;
  while (T - t > slack) {
    double tau;
    if (!config.steps.empty()) {
      if (static_cast<std::size_t>(step) >= config.steps.size()) break;
      tau = config.steps[step];
    } else if (controller) {
      tau = controller->next_tau();
    } else {
      tau = config.tau;
    }
    double t_next = config.steps.empty() && !controller ? (step + 1) * config.tau : t + tau;
    if (t_next > T - slack) t_next = T;
    tau = t_next - t;
    try {
      u = apply(numeric, fl, tau, u);
    } catch (const std::exception& e) {
      rec.status = RunStatus::Failed;
      rec.message = "step " + std::to_string(step + 1) + ": " + e.what();
      break;
    }
    ++step;
    t = t_next;
    const double mx = max_norm(u);
    if (!std::isfinite(mx)) {
      rec.status = RunStatus::Diverged;
      rec.message = "non-finite state at step " + std::to_string(step);
      break;
    }
    const bool last = T - t <= slack;
    const bool sample =
        last || controller || monitor ||
        (config.diagnostics_every > 0 && step % config.diagnostics_every == 0);
    if (sample) {
      const bool keep =
          last || (config.diagnostics_every > 0 && step % config.diagnostics_every == 0);
      const DiagnosticsRow row = diag(step, t, tau, u);
      if (keep) rec.rows.push_back(row);
      if (controller) controller->record(t, row.energy);
      if (row.max_norm > monitor_bound) {
        if (!keep) rec.rows.push_back(row);
        rec.status = RunStatus::MonitorViolation;
        rec.message = "max norm " + fmt(row.max_norm) + " exceeds M at step " +
                      std::to_string(step);
        break;
      }
    }
  }
  rec.final_state = std::move(u);
  rec.final_time = t;
  rec.steps_taken = step;
  return rec;
}

// Convergence ---------------------------------------------------------------------

std::vector<double> convergence_rates(std::span<const double> taus,
                                      std::span<const double> errors) {
  if (taus.size() != errors.size()) {
    throw std::invalid_argument("tau and error lists differ in length");
  }
  std::vector<double> out(taus.size(), kNaN);
  for (std::size_t i = 1; i < taus.size(); ++i) {
    out[i] = std::log(errors[i - 1] / errors[i]) / std::log(taus[i - 1] / taus[i]);
  }
  return out;
}

std::vector<double> random_subdivision(double t_final, int count, std::mt19937_64& rng) {
  if (count < 1) throw std::invalid_argument("subinterval count must be >= 1");
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> eps(count);
  for (auto& e : eps) {
    do {
      e = dist(rng);
    } while (!(e > 0.0 && e < 1.0));
  }
  double total = 0.0;
  for (double e : eps) total += e;
  std::vector<double> out;
  out.reserve(count);
  for (double e : eps) out.push_back(t_final * e / total);
  return out;
}

double error_inf(const Field& a, const Field& b) {
  a.require_compatible(b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double error_l2(const Field& a, const Field& b) {
  a.require_compatible(b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
  return std::sqrt(s * a.grid().cell_volume());
}

namespace {

ConvergenceReport study(const RunConfig& base, const std::vector<RunConfig>& runs,
                        const std::vector<double>& taus,
                        const std::vector<long>& counts, const Field& reference) {
  ConvergenceReport rep;
  rep.scheme = base.scheme;
  const GridPtr grid = reference.grid_ptr();
  const ModelSpec spec = resolve_model(base).with_grid(grid->n());
  const Field u0 = initial_condition(spec, grid);
  std::vector<double> errors;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunRecord r = run(runs[i], grid, u0);
    ConvergenceRow row;
    row.tau = taus[i];
    row.subintervals = counts[i];
    if (r.status == RunStatus::Completed) {
      row.error_inf = error_inf(r.final_state, reference);
      row.error_l2 = error_l2(r.final_state, reference);
    } else {
      row.error_inf = row.error_l2 = kNaN;
    }
    errors.push_back(row.error_inf);
    rep.rows.push_back(row);
  }
  const auto rates = convergence_rates(taus, errors);
  for (std::size_t i = 0; i < rates.size(); ++i) rep.rows[i].rate = rates[i];
  return rep;
}

}  // namespace

ConvergenceReport convergence_study(const RunConfig& base, std::span<const double> taus,
                                    const Field& reference) {
  std::vector<RunConfig> runs;
  std::vector<double> ts;
  std::vector<long> counts;
  for (double tau : taus) {
    RunConfig c = base;
    c.tau = tau;
    c.adaptive = false;
    c.steps.clear();
    c.diagnostics_every = 0;
    runs.push_back(c);
    ts.push_back(tau);
    counts.push_back(static_cast<long>(std::ceil(base.t_final / tau - 1e-9)));
  }
  return study(base, runs, ts, counts, reference);
}

ConvergenceReport convergence_study_random(const RunConfig& base,
                                           std::span<const int> counts,
                                           const Field& reference) {
  std::mt19937_64 rng(base.seed);
  std::vector<RunConfig> runs;
  std::vector<double> ts;
  std::vector<long> ns;
  for (int n : counts) {
    RunConfig c = base;
    c.adaptive = false;
    c.steps = random_subdivision(base.t_final, n, rng);
    c.diagnostics_every = 0;
    ts.push_back(*std::max_element(c.steps.begin(), c.steps.end()));
    ns.push_back(n);
    runs.push_back(std::move(c));
  }
  return study(base, runs, ts, ns, reference);
}

Field reference_solution(const RunConfig& base, bool exact, const std::string& scheme,
                         double tau) {
  const ModelSpec spec = resolve_model(base);
  const GridPtr grid = make_model_grid(spec);
  if (exact) return exact_solution(spec, base.t_final, grid);
  RunConfig c = base;
  c.scheme = scheme;
  c.tau = tau;
  c.adaptive = false;
  c.steps.clear();
  c.diagnostics_every = 0;
  RunRecord r = run(c, grid, initial_condition(spec, grid));
  if (r.status != RunStatus::Completed) {
    throw std::runtime_error("reference run did not complete: " + r.message);
  }
  return std::move(r.final_state);
}

// Presets -------------------------------------------------------------------------

std::span<const std::string_view> preset_names() { return kPresetNames; }

Preset preset(std::string_view name) {
  Preset p;
  p.name = std::string(name);
  RunConfig& c = p.config;
  if (name == "toy_accuracy") {
    c.model = "toy";
    c.scheme = "s3_1";
    c.tau = 1.0 / 20;
    c.t_final = 6.0;
    p.schemes = {"s3_1", "s3_2", "s4_1", "s4_2", "s4_3", "s4_4", "s6"};
    p.ladder = {1.0 / 5, 1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80};
    p.reference_scheme = "s6";
    p.reference_tau = 1.0 / 200;
    p.accuracy_t_final = 6.0;
  } else if (name == "ac_compare") {
    c.model = "ac";
    c.scheme = "s4_4";
    c.tau = 1.0 / 40;
    c.t_final = 10.0;
    c.allow_backward = true;
    p.schemes = {"strang_a", "s4_4", "s4_neg"};
  } else if (name == "cac_adaptive") {
    c.model = "cac";
    c.scheme = "s4_3";
    c.adaptive = true;
    c.tau_min = 0.01;
    c.tau_max = 0.1;
    c.alpha = 1e6;
    c.t_final = 60.0;
    p.schemes = {"s3_1", "s4_2", "s4_3"};
    p.random_counts = {10, 20, 40, 80};
    p.reference_scheme = "s4_3";
    p.reference_tau = 1e-4;
    p.accuracy_t_final = 0.5;
  } else if (name == "fkpp") {
    c.model = "fkpp";
    c.scheme = "s4_1";
    c.tau = 0.01;
    c.t_final = 1.0;
    c.n = 400;
    p.schemes = {"s3_2", "s4_1", "s4_4"};
    p.ladder = {1.0 / 25, 1.0 / 50, 1.0 / 100, 1.0 / 200, 1.0 / 400};
    p.reference_scheme = "s4_1";
    p.reference_tau = 1e-3;
    p.accuracy_t_final = 1.0;
  } else if (name == "nls_linear_accuracy") {
    c.model = "nls_linear";
    c.scheme = "s4_2";
    c.tau = 0.01;
    c.t_final = 1.0;
    p.schemes = {"s3_2", "s4_2", "s4_4"};
    p.ladder = {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160};
    p.exact_reference = true;
    p.accuracy_t_final = 1.0;
  } else if (name == "nls_nonlinear") {
    c.model = "nls_nonlinear";
    c.scheme = "s4_2";
    c.tau = 0.01;
    c.t_final = 10.0;
    p.schemes = {"s3_2", "s4_2", "s4_4"};
  } else if (name == "rd_system") {
    c.model = "rd_system";
    c.scheme = "s3_1";
    c.tau = 0.01;
    c.t_final = 1.0;
    p.schemes = {"s3_1"};
  } else if (name == "rd_accuracy") {
    c.model = "rd_system";
    c.scheme = "s3_1";
    c.tau = 1.0 / 50;
    c.t_final = 0.2;
    p.schemes = {"s3_1", "s4_1", "s4_3"};
    p.ladder = {1.0 / 50, 1.0 / 100, 1.0 / 200, 1.0 / 400, 1.0 / 800};
    p.reference_scheme = "s4_1";
    p.reference_tau = 1.0 / 1600;
    p.accuracy_t_final = 0.2;
  } else {
    throw std::invalid_argument("unknown preset: " + std::string(name));
  }
  return p;
}

nlohmann::json to_json(const Preset& p) {
  nlohmann::json j;
  j["name"] = p.name;
  j["config"] = to_json(p.config);
  j["schemes"] = p.schemes;
  j["ladder"] = p.ladder;
  j["random_counts"] = p.random_counts;
  j["exact_reference"] = p.exact_reference;
  j["reference_scheme"] = p.reference_scheme;
  j["reference_tau"] = p.reference_tau;
  j["accuracy_t_final"] = p.accuracy_t_final;
  return j;
}

// Output --------------------------------------------------------------------------

void write_diagnostics_csv(const std::string& path, const RunRecord& r) {
  auto os = open_out(path);
  os << "# generated " << utc_timestamp() << " model=" << r.config.model
     << " scheme=" << r.config.scheme << " status=" << to_string(r.status) << "\n";
  os << "step,t,tau,energy,mass,max_norm\n";
  for (const auto& row : r.rows) {
    os << row.step << ',' << fmt(row.t) << ',' << fmt(row.tau) << ','
       << fmt(row.energy) << ',' << fmt(row.mass) << ',' << fmt(row.max_norm) << '\n';
  }
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"step", row.step},
                    {"t", row.t},
                    {"tau", row.tau},
                    {"energy", json_number(row.energy)},
                    {"mass", json_number(row.mass)},
                    {"max_norm", json_number(row.max_norm)}});
  }
  return {{"config", to_json(r.config)},
          {"status", to_string(r.status)},
          {"message", r.message},
          {"final_time", r.final_time},
          {"steps_taken", r.steps_taken},
          {"diagnostics", rows}};
}

void write_convergence_csv(const std::string& path, const ConvergenceReport& r) {
  auto os = open_out(path);
  os << "# generated " << utc_timestamp() << " scheme=" << r.scheme << "\n";
  os << "tau,error_inf,rate\n";
  for (const auto& row : r.rows) {
    os << fmt(row.tau) << ',' << fmt(row.error_inf) << ','
       << (std::isnan(row.rate) ? std::string() : fmt(row.rate)) << '\n';
  }
}

nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"tau", row.tau},
                    {"subintervals", row.subintervals},
                    {"error_inf", json_number(row.error_inf)},
                    {"error_l2", json_number(row.error_l2)},
                    {"rate", json_number(row.rate)}});
  }
  return {{"scheme", r.scheme}, {"rows", rows}};
}

}  // namespace mpe
