#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpe/grid.hpp"
#include "mpe/models.hpp"
#include "mpe/scheme.hpp"

namespace mpe {

// Run configuration -----------------------------------------------------------

struct RunConfig {
  std::string model = "toy";
  std::map<std::string, double> params;  ///< overrides of model parameters
  std::string nls_potential = "printed";
  std::string scheme = "strang_a";
  std::optional<int> n;                  ///< grid size override
  double tau = 0.01;
  double t_final = 1.0;
  bool adaptive = false;
  double tau_min = 0.01;
  double tau_max = 0.1;
  double alpha = 1e6;
  /// Explicit step sizes; when non-empty they replace tau and adaptive.
  std::vector<double> steps;
  int diagnostics_every = 1;
  int rk_substeps = 4;
  bool allow_backward = false;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format = "csv";

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Keys absent from `j` keep the values already in `base`.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Model parameters after applying the config overrides.
ModelSpec resolve_model(const RunConfig& c);
/// The scheme named in the config: a catalog name or "richardson(1,2,...)".
SplitScheme resolve_scheme(std::string_view name);

// Step control ----------------------------------------------------------------

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
};

class StepController {
 public:
  /// Throws std::invalid_argument unless 0 < tau_min <= tau_max and alpha > 0.
  StepController(double tau_min, double tau_max, double alpha);

  double tau_min() const { return tau_min_; }
  double tau_max() const { return tau_max_; }
  double alpha() const { return alpha_; }

  void record(double t, double energy);
  std::span<const EnergySample> history() const { return history_; }
  /// Step size for the current history.
  double next_tau() const;

 private:
  double tau_min_;
  double tau_max_;
  double alpha_;
  std::vector<EnergySample> history_;  ///< last two samples
};

/// max(tau_min, tau_max / sqrt(1 + alpha e'^2)) clamped to [tau_min, tau_max].
double adaptive_tau(const StepController& c, double e_prime);

/// Backward difference of the last two samples; 0 with fewer than two.
/// Throws std::invalid_argument when the two samples share a time.
double estimate_e_prime(std::span<const EnergySample> history);

// Runs ------------------------------------------------------------------------

struct DiagnosticsRow {
  long step = 0;
  double t = 0.0;
  double tau = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  double max_norm = 0.0;
};

enum class RunStatus { Completed, Diverged, MonitorViolation, Failed };
std::string_view to_string(RunStatus s);

struct RunRecord {
  RunConfig config;
  std::vector<DiagnosticsRow> rows;
  Field final_state;
  double final_time = 0.0;
  long steps_taken = 0;
  RunStatus status = RunStatus::Completed;
  std::string message;
};

/// Time loop u^n = S(tau_n) u^{n-1}. Non-finite states stop the run with
/// status Diverged; the rd_system bound monitor stops it with
/// MonitorViolation. Throws std::invalid_argument for invalid configs.
RunRecord run(const RunConfig& config);
/// Same, starting from a given state on a given grid.
RunRecord run(const RunConfig& config, const GridPtr& grid, Field u0);

// Convergence studies -----------------------------------------------------------

struct ConvergenceRow {
  double tau = 0.0;      ///< uniform step, or the largest random subinterval
  long subintervals = 0;
  double error_inf = 0.0;
  double error_l2 = 0.0;
  double rate = 0.0;     ///< NaN for the first row
};

struct ConvergenceReport {
  std::string scheme;
  std::vector<ConvergenceRow> rows;
};

/// rate_i = log(e_{i-1} / e_i) / log(tau_{i-1} / tau_i); the first entry is NaN.
std::vector<double> convergence_rates(std::span<const double> taus,
                                      std::span<const double> errors);

/// N random subinterval lengths T eps_i / sum eps_j with eps_i in the open
/// interval (0, 1).
std::vector<double> random_subdivision(double t_final, int count,
                                       std::mt19937_64& rng);

double error_inf(const Field& a, const Field& b);
double error_l2(const Field& a, const Field& b);

/// Errors at t_final against `reference` for each uniform tau.
ConvergenceReport convergence_study(const RunConfig& base,
                                    std::span<const double> taus,
                                    const Field& reference);

/// Errors on seeded random time grids with the given subinterval counts.
ConvergenceReport convergence_study_random(const RunConfig& base,
                                           std::span<const int> counts,
                                           const Field& reference);

/// Reference at base.t_final: the exact solution when `exact` is set, else
/// a run of `scheme` with step `tau`.
Field reference_solution(const RunConfig& base, bool exact,
                         const std::string& scheme, double tau);

// Presets -------------------------------------------------------------------------

struct Preset {
  std::string name;
  RunConfig config;
  std::vector<std::string> schemes;   ///< schemes compared in the experiment
  std::vector<double> ladder;         ///< uniform tau ladder (may be empty)
  std::vector<int> random_counts;     ///< random-grid N ladder (may be empty)
  bool exact_reference = false;
  std::string reference_scheme;
  double reference_tau = 0.0;
  double accuracy_t_final = 0.0;      ///< T of the accuracy study
};

std::span<const std::string_view> preset_names();
/// Throws std::invalid_argument for unknown names.
Preset preset(std::string_view name);
nlohmann::json to_json(const Preset& p);

// Output ---------------------------------------------------------------------------

/// Diagnostics CSV with a leading "# ..." line carrying the timestamp.
void write_diagnostics_csv(const std::string& path, const RunRecord& r);
nlohmann::json to_json(const RunRecord& r);
void write_convergence_csv(const std::string& path, const ConvergenceReport& r);
nlohmann::json to_json(const ConvergenceReport& r);

}  // namespace mpe
