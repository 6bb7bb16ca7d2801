#pragma once

#include <gridshield/attack_model.hpp>
#include <gridshield/estimation.hpp>
#include <gridshield/gic.hpp>
#include <gridshield/grid_model.hpp>
#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridshield {

enum class Method { gic, omp, gmgic, eng, bdd, oracle_gic };

std::string_view to_string(Method m);
/// Accepts "oracle-gic" and "oracle_gic". Throws ConfigError otherwise.
Method method_from_string(std::string_view s);

/// One cell of the scenario grid.
struct ScenarioPoint {
  int k_a = 4;
  double attack_norm = 1.2;
  double sigma_s2 = 0.05;
  double sigma_e2 = 0.01;
  /// When set, the load change is rescaled so that ||H_L dtheta||^2 equals it.
  std::optional<double> eta;
};

struct ExperimentSpec {
  std::string case_path;
  std::vector<Method> methods{Method::gic};
  std::vector<int> k_a{4};
  std::vector<double> attack_norm{1.2};
  /// attack_norm entries are per attacked node and get multiplied by K_a.
  bool attack_norm_per_node = false;
  std::vector<double> sigma_s2{0.05};
  std::vector<double> sigma_e2{0.01};
  std::vector<double> eta;  // empty: natural load change
  std::size_t n_trials = 500;
  /// Also run n_trials attack-free trials per point for false-alarm and ROC figures.
  bool null_trials = true;
  std::size_t n_null = 500;  // calibration draws
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int k_c = 6;
  int k_c_global = 6;
  double zeta = 2.0;
  std::optional<std::vector<int>> restricted_buses;
  std::size_t threads = 1;

  /// Cartesian product of the grid lists. Throws ConfigError when any list is empty.
  std::vector<ScenarioPoint> grid() const;
  /// Throws ConfigError on an invalid spec.
  void validate() const;
};

ExperimentSpec spec_from_json(std::string_view text);
std::string spec_to_json(const ExperimentSpec& spec);

/// Null-calibrated thresholds for one noise/load setting.
struct ThresholdPoint {
  double sigma_s2 = 0.0;
  double sigma_e2 = 0.0;
  double gamma_bdd = 0.0;
  double gamma_eng = 0.0;
  double gamma_gic = 0.0;
  double gamma_omp = 0.0;
  double rho = 0.0;
  double gamma_oracle_gic = 0.0;
};

struct Thresholds {
  double alpha = 0.05;
  std::size_t n_null = 0;
  std::uint64_t seed = 0;
  double zeta = 2.0;
  int k_c = 6;
  std::vector<ThresholdPoint> points;

  /// Throws ConfigError when no point matches the setting.
  const ThresholdPoint& at(double sigma_s2, double sigma_e2) const;
};

std::string thresholds_to_json(const Thresholds& t);
Thresholds thresholds_from_json(std::string_view text);

/// Shared, immutable context of an experiment.
struct Workbench {
  GridNetwork net;
  TopologyMatrix topo;
  Eigen::VectorXd theta_base;

  explicit Workbench(GridNetwork network, const std::optional<std::vector<int>>& restricted_buses = std::nullopt);
};

/// One simulated snapshot pair.
struct TrialData {
  Eigen::VectorXd theta_t, theta_t1;
  Eigen::VectorXd z_t, z_t1, dz, dz_L;
  Eigen::VectorXd load_term;  // H_L dtheta
  AttackSpec attack;
  double eta = 0.0;  // realized ||H_L dtheta||^2
};

enum class Stream : std::uint64_t { trial = 1, null_trial = 2, calibration = 3 };

/// Deterministic generator for (seed, trial, stream, component).
Rng trial_rng(std::uint64_t seed, std::uint64_t trial, Stream stream, std::uint64_t component);

/// Draws a trial. `attacked` false gives the null hypothesis.
TrialData simulate_trial(const Workbench& wb, const ScenarioPoint& point, bool attacked, std::uint64_t seed,
                         std::uint64_t trial, Stream stream);

/// Calibrates every method at each distinct (sigma_s2, sigma_e2) of the spec.
/// Throws ConfigError for n_null < 100.
Thresholds calibrate_thresholds(const ExperimentSpec& spec, const Workbench& wb);

/// 2 t_p / (2 t_p + f_n + f_p); 1 when both sets are empty.
double f_score(const Support& truth, const Support& estimate);

/// ||dz||^2 > gamma
bool eng_detector(const Eigen::VectorXd& dz, double gamma);

struct MethodOutcome {
  IdentificationResult result;
  bool verdict = false;
  double statistic = 0.0;
  std::int64_t wall_ns = 0;
};

/// Per-experiment state shared by all trials: the candidate family and the WLS
/// estimator. With isotropic noise the WLS gain does not depend on the variance,
/// so one estimator serves every grid point.
struct MethodContext {
  const Workbench* wb = nullptr;
  CandidateFamily family;
  StateEstimator estimator;
  int k_c = 6;
  int k_c_global = 6;
  double zeta = 2.0;

  MethodContext(const Workbench& workbench, int k_c, int k_c_global, double zeta);
};

/// Runs one method on a trial with the given thresholds; timing covers the
/// identification call only.
MethodOutcome run_method(Method m, const MethodContext& ctx, const TrialData& data, const ScenarioPoint& point,
                         const ThresholdPoint& th);

struct TrialRecord {
  std::size_t point = 0;
  Method method = Method::gic;
  std::uint64_t trial = 0;
  bool attacked = true;
  std::vector<int> true_buses;
  std::vector<int> selected_buses;
  bool verdict = false;
  double statistic = 0.0;
  double f_score = 0.0;
  double mse = 0.0;
  std::int64_t wall_ns = 0;
  double eta = 0.0;
  std::string error;
};

struct Aggregate {
  std::size_t point = 0;
  Method method = Method::gic;
  ScenarioPoint scenario;
  std::size_t n_trials = 0;
  std::size_t n_errors = 0;
  double detection_rate = 0.0;
  double false_alarm_rate = 0.0;  // NaN without null trials
  double pd_at_alpha = 0.0;       // ROC readout at p_fa <= alpha, NaN without null trials
  double mean_f_score = 0.0;
  double f_score_se = 0.0;
  double mean_mse = 0.0;
  double median_runtime_ns = 0.0;
  double mean_eta = 0.0;
};

struct ResultTable {
  ExperimentSpec spec;
  Thresholds thresholds;
  std::vector<ScenarioPoint> points;
  std::vector<TrialRecord> records;
  std::vector<Aggregate> aggregates;
};

/// Runs the full grid. Deterministic for a fixed spec regardless of `threads`.
ResultTable run_experiment(const ExperimentSpec& spec, const Workbench& wb, const Thresholds& thresholds);
ResultTable run_experiment(const ExperimentSpec& spec, const Workbench& wb);

std::vector<Aggregate> aggregate(const ExperimentSpec& spec, const std::vector<ScenarioPoint>& points,
                                 const std::vector<TrialRecord>& records);

enum class OutputFormat { csv, json };
OutputFormat format_from_string(std::string_view s);

/// Column header of the aggregate CSV.
const std::vector<std::string>& aggregate_csv_header();
std::string aggregates_to_csv(const std::vector<Aggregate>& rows);
std::vector<Aggregate> aggregates_from_csv(std::string_view text);
/// Manifest, aggregates and every trial record.
std::string results_to_json(const ResultTable& table);

/// Writes summary.csv and results.json under `dir` (created if missing) and
/// returns the paths written, the one matching `format` first. Throws
/// ConfigError for an empty table before touching the file system.
std::vector<std::string> emit_results(const ResultTable& table, const std::string& dir, OutputFormat format);

/// One value per line, '#' comments and blank lines ignored.
Eigen::VectorXd parse_measurement_csv(std::string_view text);
Eigen::VectorXd load_measurement_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gridshield
