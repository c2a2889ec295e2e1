#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asv/ddpg.hpp"
#include "asv/environment.hpp"
#include "asv/nmpc.hpp"

namespace asv {

/// One trace CSV row. Column order is kTraceColumns.
struct TraceRow {
  double t = 0;
  Vector6<double> q = Vector6<double>::Zero();
  Vector6<double> q_d = Vector6<double>::Zero();
  double psi_s = 0;
  Eigen::Vector4d f = Eigen::Vector4d::Zero();
  double e_p = 0;
  double r_p = 0, r_psi = 0, r_w = 0, r_a = 0, r_e = 0, reward = 0;
  Wrench tau_env = Wrench::Zero();

  static TraceRow from(const StepRecord& rec);
};

extern const std::vector<std::string> kTraceColumns;

std::vector<TraceRow> to_trace(const EpisodeLog& log);
/// Full-precision CSV. NMPC diagnostics, when given, add three trailing columns.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows,
                     const std::vector<NmpcDiagnostics>* diagnostics = nullptr);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

struct MetricsReport {
  std::size_t steps = 0;
  double rmse_e_p = 0;            // m
  double mean_heading_error = 0;  // rad, mean |psi - psi_d|
  double e_ave = 0;               // sqrt(sum_k sum_i |f_i| / N)
};

/// Metrics over rows with t > transient. Throws DomainError when no row qualifies.
MetricsReport compute_metrics(const std::vector<TraceRow>& trace, double transient = 0.0);

struct Aggregate {
  std::size_t count = 0;
  double mean = 0;
  double stddev = 0;  // sample standard deviation
};

Aggregate aggregate(const std::vector<double>& values);

enum class ControllerKind { nmpc, drl };
std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

struct ExperimentSpec {
  ControllerKind controller = ControllerKind::nmpc;
  std::filesystem::path checkpoint;
  std::string label;  // output subdirectory; defaults to the controller name
  NmpcConfig nmpc;
  TrajectorySpec trajectory;
  DisturbanceScenario disturbances = DisturbanceScenario::none();
  ModelParameters model;
  RewardParams reward;
  EpisodeConfig episode;
  int repetitions = 3;
  std::uint64_t seed = 1;
  bool random_initial = false;
  double measurement_noise_cov = 0.0;
  double transient = 0.0;  // s excluded from metrics
  bool verbose = false;
  std::filesystem::path out_dir = "results";

  void validate() const;
  /// Distinct per-repetition seeds derived from `seed`.
  std::vector<std::uint64_t> seeds() const;
  static ExperimentSpec from_config(const KeyValueConfig& cfg);
};

struct RepetitionResult {
  int index = 0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  Termination termination = Termination::running;
  bool failed = false;
  std::string diagnostic;
  std::filesystem::path trace;
};

struct ExperimentReport {
  std::string controller;
  double transient = 0;  // s excluded from the metrics
  std::vector<RepetitionResult> repetitions;
  Aggregate rmse, heading, e_ave;  // over successful repetitions only
  std::vector<std::string> warnings;

  std::string to_json() const;
};

/// Runs every repetition concurrently and writes traces plus metrics.json into
/// out_dir / label.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Same episodes for both controllers: ratios of mean RMSE and mean E_ave (a / b).
struct Comparison {
  ExperimentReport a, b;
  double error_ratio = 0;
  double energy_ratio = 0;
  int a_better = 0;  // repetitions where a's RMSE < b's RMSE, both successful
  int paired = 0;

  std::string to_json(const std::string& name_a, const std::string& name_b) const;
};

Comparison compare(const ExperimentSpec& a, const ExperimentSpec& b);

/// Full-reward versus simple-reward policies on identical seeds and trajectories.
struct AblationReport {
  Comparison result;
  double error_reduction_pct = 0;   // (1 - error_ratio) * 100
  double energy_reduction_pct = 0;
  static constexpr double kReferenceErrorFull = 0.0496;
  static constexpr double kReferenceErrorSimple = 0.0743;
  static constexpr double kReferenceErrorReductionPct = 33.03;
  static constexpr double kReferenceEnergyReductionPct = 37.07;

  std::string to_json() const;
};

AblationReport run_ablation(const ExperimentSpec& full, const ExperimentSpec& simple);

/// Writes trajectory, error and thrust plotting scripts next to the trace CSVs found
/// under dir. Returns the written files; empty (with a warning on stderr) if there are no traces.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir);

/// Reproduction record: config hash, seeds, command and code version.
void write_manifest(const std::filesystem::path& path, const KeyValueConfig& cfg,
                    const std::string& command, const std::vector<std::uint64_t>& seeds);

std::string code_version();

}  // namespace asv
