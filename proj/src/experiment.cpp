#include "asv/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#ifndef ASV_VERSION
#define ASV_VERSION "0.0.0"
#endif
#ifndef ASV_GIT_REVISION
#define ASV_GIT_REVISION "unknown"
#endif

namespace asv {

using nlohmann::json;

const std::vector<std::string> kTraceColumns = {
    "t",   "x",   "y",   "psi",   "u",   "v",     "w",   "x_d", "y_d",    "psi_d",
    "u_d", "v_d", "w_d", "psi_s", "f1",  "f2",    "f3",  "f4",  "e_p",    "r_p",
    "r_psi", "r_w", "r_a", "r_e", "reward", "tau_x", "tau_y", "tau_n"};

TraceRow TraceRow::from(const StepRecord& rec) {
  TraceRow row;
  row.t = rec.t;
  row.q = rec.state.q;
  row.q_d = rec.ref.as_state();
  row.psi_s = rec.psi_s;
  row.f = rec.cmd.f;
  row.e_p = rec.reward.e_p;
  row.r_p = rec.reward.r_p;
  row.r_psi = rec.reward.r_psi;
  row.r_w = rec.reward.r_w;
  row.r_a = rec.reward.r_a;
  row.r_e = rec.reward.r_e;
  row.reward = rec.reward.total;
  row.tau_env = rec.tau_env;
  return row;
}

std::vector<TraceRow> to_trace(const EpisodeLog& log) {
  std::vector<TraceRow> rows;
  rows.reserve(log.steps.size());
  for (const auto& s : log.steps) rows.push_back(TraceRow::from(s));
  return rows;
}

namespace {

std::vector<double> row_values(const TraceRow& r) {
  std::vector<double> v{r.t};
  for (int i = 0; i < 6; ++i) v.push_back(r.q(i));
  for (int i = 0; i < 6; ++i) v.push_back(r.q_d(i));
  v.push_back(r.psi_s);
  for (int i = 0; i < 4; ++i) v.push_back(r.f(i));
  for (double x : {r.e_p, r.r_p, r.r_psi, r.r_w, r.r_a, r.r_e, r.reward}) v.push_back(x);
  for (int i = 0; i < 3; ++i) v.push_back(r.tau_env(i));
  return v;
}

TraceRow row_from_values(const std::vector<double>& v) {
  TraceRow r;
  std::size_t k = 0;
  r.t = v[k++];
  for (int i = 0; i < 6; ++i) r.q(i) = v[k++];
  for (int i = 0; i < 6; ++i) r.q_d(i) = v[k++];
  r.psi_s = v[k++];
  for (int i = 0; i < 4; ++i) r.f(i) = v[k++];
  for (double* x : {&r.e_p, &r.r_p, &r.r_psi, &r.r_w, &r.r_a, &r.r_e, &r.reward}) *x = v[k++];
  for (int i = 0; i < 3; ++i) r.tau_env(i) = v[k++];
  return r;
}

void append_number(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows,
                     const std::vector<NmpcDiagnostics>* diagnostics) {
  if (diagnostics && diagnostics->size() != rows.size())
    throw ContractViolation("diagnostics must align with trace rows");
  std::string out;
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) out += (i ? "," : "") + kTraceColumns[i];
  if (diagnostics) out += ",nmpc_iterations,nmpc_cost,nmpc_gradient_norm";
  out += '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto v = row_values(rows[k]);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      append_number(out, v[i]);
    }
    if (diagnostics) {
      const auto& d = (*diagnostics)[k];
      out += ',' + std::to_string(d.iterations) + ',';
      append_number(out, d.cost);
      out += ',';
      append_number(out, d.gradient_norm);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write trace " + path.string());
  f << out;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty trace file " + path.string());
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<int> index(kTraceColumns.size(), -1);
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == kTraceColumns[i]) index[i] = static_cast<int>(j);
  for (std::size_t i = 0; i < index.size(); ++i)
    if (index[i] < 0) throw std::runtime_error("trace " + path.string() + " lacks column " + kTraceColumns[i]);

  std::vector<TraceRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::strtod(cell.c_str(), nullptr));
    if (cells.size() < header.size()) throw std::runtime_error("short row in " + path.string());
    std::vector<double> v(kTraceColumns.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = cells[static_cast<std::size_t>(index[i])];
    rows.push_back(row_from_values(v));
  }
  return rows;
}

MetricsReport compute_metrics(const std::vector<TraceRow>& trace, double transient) {
  MetricsReport m;
  double se = 0, heading = 0, thrust = 0;
  for (const auto& r : trace) {
    if (!(r.t > transient)) continue;
    ++m.steps;
    se += r.e_p * r.e_p;
    heading += std::abs(angle_diff(r.q(2), r.q_d(2)));
    thrust += r.f.cwiseAbs().sum();
  }
  if (m.steps == 0) throw DomainError("compute_metrics: empty trace");
  const double n = static_cast<double>(m.steps);
  m.rmse_e_p = std::sqrt(se / n);
  m.mean_heading_error = heading / n;
  m.e_ave = std::sqrt(thrust / n);
  return m;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

std::string to_string(ControllerKind kind) { return kind == ControllerKind::nmpc ? "nmpc" : "drl"; }

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "nmpc") return ControllerKind::nmpc;
  if (name == "drl") return ControllerKind::drl;
  throw ConfigError("unknown controller '" + name + "' (expected nmpc or drl)");
}

void ExperimentSpec::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (controller == ControllerKind::drl && !std::filesystem::exists(checkpoint))
    throw ConfigError("checkpoint not found: " + checkpoint.string());
  if (transient < 0) throw ConfigError("evaluate.transient must be >= 0");
  if (measurement_noise_cov < 0) throw ConfigError("evaluate.measurement_noise_cov must be >= 0");
  trajectory.validate();
  nmpc.validate();
}

std::vector<std::uint64_t> ExperimentSpec::seeds() const {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < repetitions; ++k) out.push_back(derive_seed(seed, 100 + static_cast<std::uint64_t>(k)));
  return out;
}

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& cfg) {
  ExperimentSpec s;
  s.controller = controller_kind_from_string(cfg.get_string("evaluate.controller", "nmpc"));
  s.checkpoint = cfg.get_string("evaluate.checkpoint", "");
  s.label = cfg.get_string("evaluate.label", "");
  s.nmpc = NmpcConfig::from_config(cfg);
  s.trajectory = TrajectorySpec::from_config(cfg);
  s.disturbances = DisturbanceScenario::from_config(cfg);
  s.model = model_parameters_from(cfg);
  s.reward = RewardParams::from_config(cfg);
  s.episode = EpisodeConfig::from_config(cfg);
  s.repetitions = static_cast<int>(cfg.get_int("evaluate.reps", s.repetitions));
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long>(s.seed)));
  s.random_initial = cfg.get_string("evaluate.initial", "reference") == "random";
  s.measurement_noise_cov = cfg.get_double("evaluate.measurement_noise_cov", s.measurement_noise_cov);
  s.transient = cfg.get_double("evaluate.transient", s.transient);
  s.verbose = cfg.get_bool("evaluate.verbose", s.verbose);
  s.out_dir = cfg.get_string("out_dir", s.out_dir.string());
  return s;
}

namespace {

json metrics_json(const MetricsReport& m) {
  return {{"steps", m.steps}, {"rmse_e_p", m.rmse_e_p}, {"mean_heading_error", m.mean_heading_error},
          {"e_ave", m.e_ave}};
}

json aggregate_json(const Aggregate& a) { return {{"count", a.count}, {"mean", a.mean}, {"std", a.stddev}}; }

json report_json(const ExperimentReport& r) {
  json reps = json::array();
  for (const auto& rep : r.repetitions) {
    json j = {{"index", rep.index},
              {"seed", rep.seed},
              {"termination", to_string(rep.termination)},
              {"failed", rep.failed},
              {"trace", rep.trace.filename().string()}};
    if (rep.metrics.steps > 0) j["metrics"] = metrics_json(rep.metrics);
    if (!rep.diagnostic.empty()) j["diagnostic"] = rep.diagnostic;
    reps.push_back(j);
  }
  return {{"controller", r.controller},
          {"transient", r.transient},
          {"repetitions", reps},
          {"aggregate", {{"rmse_e_p", aggregate_json(r.rmse)},
                         {"mean_heading_error", aggregate_json(r.heading)},
                         {"e_ave", aggregate_json(r.e_ave)}}},
          {"warnings", r.warnings}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace

std::string ExperimentReport::to_json() const { return report_json(*this).dump(2) + "\n"; }

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::string label = spec.label.empty() ? to_string(spec.controller) : spec.label;
  const std::filesystem::path dir = spec.out_dir / label;
  std::filesystem::create_directories(dir);

  std::optional<nn::Checkpoint> ckpt;
  if (spec.controller == ControllerKind::drl) ckpt = nn::load_checkpoint(spec.checkpoint);

  const auto seeds = spec.seeds();
  ExperimentReport report;
  report.controller = label;
  report.transient = spec.transient;
  report.repetitions.resize(seeds.size());

  auto run_one = [&](std::size_t k) {
    RepetitionResult& rep = report.repetitions[k];
    rep.index = static_cast<int>(k);
    rep.seed = seeds[k];
    rep.trace = dir / ("trace_rep" + std::to_string(k) + ".csv");
    try {
      TrackingEnv env(spec.model, spec.reward, spec.episode, spec.disturbances);
      VesselState initial = TrackingEnv::on_reference(spec.trajectory);
      if (spec.random_initial) {
        Rng rng(derive_seed(rep.seed, 21));
        initial = env.random_initial_state(spec.trajectory, rng);
      }
      EpisodeLog log;
      const std::vector<NmpcDiagnostics>* diag = nullptr;
      std::optional<NmpcController> nmpc;
      if (spec.controller == ControllerKind::nmpc) {
        nmpc.emplace(spec.nmpc, spec.model);
        log = run_closed_loop(env, *nmpc, spec.trajectory, initial, rep.seed, spec.measurement_noise_cov);
        if (spec.verbose) diag = &nmpc->diagnostics();
      } else {
        DrlController drl = DrlController::from_checkpoint(*ckpt, spec.episode.lookahead);
        log = run_closed_loop(env, drl, spec.trajectory, initial, rep.seed, spec.measurement_noise_cov);
      }
      const auto rows = to_trace(log);
      write_trace_csv(rep.trace, rows, diag);
      rep.termination = log.termination;
      rep.diagnostic = log.diagnostic;
      rep.failed = log.termination != Termination::time_limit;
      if (nmpc && nmpc->degraded()) rep.diagnostic += (rep.diagnostic.empty() ? "" : "; ") + std::string("nmpc degraded mode");
      if (!rows.empty() && rows.back().t > spec.transient) rep.metrics = compute_metrics(rows, spec.transient);
    } catch (const std::exception& e) {
      rep.failed = true;
      rep.diagnostic = e.what();
    }
  };

  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < seeds.size(); ++k) workers.emplace_back(run_one, k);
  for (auto& w : workers) w.join();

  std::vector<double> rmse, heading, energy;
  for (const auto& rep : report.repetitions) {
    if (rep.failed) {
      report.warnings.push_back("repetition " + std::to_string(rep.index) + " failed (" +
                                to_string(rep.termination) + (rep.diagnostic.empty() ? "" : ": " + rep.diagnostic) +
                                "); excluded from aggregate");
      continue;
    }
    rmse.push_back(rep.metrics.rmse_e_p);
    heading.push_back(rep.metrics.mean_heading_error);
    energy.push_back(rep.metrics.e_ave);
  }
  report.rmse = aggregate(rmse);
  report.heading = aggregate(heading);
  report.e_ave = aggregate(energy);
  for (const auto& w : report.warnings) std::cerr << "warning: " << label << ": " << w << '\n';
  write_text(dir / "metrics.json", report.to_json());
  return report;
}

namespace {

double safe_ratio(double a, double b) { return b != 0 ? a / b : std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

std::string Comparison::to_json(const std::string& name_a, const std::string& name_b) const {
  json j = {{name_a, report_json(a)},
            {name_b, report_json(b)},
            {"error_ratio", error_ratio},
            {"energy_ratio", energy_ratio},
            {"paired_repetitions", paired},
            {name_a + "_better_count", a_better}};
  return j.dump(2) + "\n";
}

Comparison compare(const ExperimentSpec& a, const ExperimentSpec& b) {
  if (a.seeds() != b.seeds()) throw ConfigError("compared experiments must share seeds");
  Comparison c;
  c.a = run_experiment(a);
  c.b = run_experiment(b);
  c.error_ratio = safe_ratio(c.a.rmse.mean, c.b.rmse.mean);
  c.energy_ratio = safe_ratio(c.a.e_ave.mean, c.b.e_ave.mean);
  for (std::size_t k = 0; k < c.a.repetitions.size(); ++k) {
    const auto& ra = c.a.repetitions[k];
    const auto& rb = c.b.repetitions[k];
    if (ra.failed || rb.failed) continue;
    ++c.paired;
    if (ra.metrics.rmse_e_p < rb.metrics.rmse_e_p) ++c.a_better;
  }
  return c;
}

std::string AblationReport::to_json() const {
  json j = json::parse(result.to_json("full_reward", "simple_reward"));
  j["error_reduction_pct"] = error_reduction_pct;
  j["energy_reduction_pct"] = energy_reduction_pct;
  j["reference"] = {{"error_full_m", kReferenceErrorFull},
                    {"error_simple_m", kReferenceErrorSimple},
                    {"error_reduction_pct", kReferenceErrorReductionPct},
                    {"energy_reduction_pct", kReferenceEnergyReductionPct}};
  return j.dump(2) + "\n";
}

AblationReport run_ablation(const ExperimentSpec& full, const ExperimentSpec& simple) {
  if (full.controller != ControllerKind::drl || simple.controller != ControllerKind::drl)
    throw ConfigError("ablation compares two policy checkpoints");
  AblationReport r;
  r.result = compare(full, simple);
  r.error_reduction_pct = (1.0 - r.result.error_ratio) * 100.0;
  r.energy_reduction_pct = (1.0 - r.result.energy_ratio) * 100.0;
  return r;
}

namespace {

constexpr const char* kPlotPrelude = R"(import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def traces():
    for path in sorted(HERE.glob("**/trace_*.csv")):
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        yield path.relative_to(HERE), {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}

)";

constexpr const char* kPlotTrajectory = R"(
fig, ax = plt.subplots(figsize=(8, 5))
reference_drawn = False
for name, c in traces():
    if not c:
        continue
    if not reference_drawn:
        ax.plot(c["x_d"], c["y_d"], "k--", label="reference")
        reference_drawn = True
    ax.plot(c["x"], c["y"], label=str(name.with_suffix("")))
ax.set_xlabel("x [m]")
ax.set_ylabel("y [m]")
ax.set_aspect("equal", adjustable="datalim")
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "trajectory.png", dpi=150)
)";

constexpr const char* kPlotError = R"(
fig, ax = plt.subplots(figsize=(8, 4))
for name, c in traces():
    if c:
        ax.plot(c["t"], c["e_p"], label=str(name.with_suffix("")))
ax.set_xlabel("t [s]")
ax.set_ylabel("position error [m]")
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "error.png", dpi=150)
)";

constexpr const char* kPlotThrust = R"(
runs = [(n, c) for n, c in traces() if c]
if runs:
    fig, axes = plt.subplots(4, 1, sharex=True, figsize=(8, 8))
    for name, c in runs:
        for i, ax in enumerate(axes):
            ax.plot(c["t"], c[f"f{i + 1}"], label=str(name.with_suffix("")))
    for i, ax in enumerate(axes):
        ax.set_ylabel(f"f{i + 1} [N]")
    axes[-1].set_xlabel("t [s]")
    axes[0].legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(HERE / "thrust.png", dpi=150)
)";

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir) {
  bool any = false;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.rfind("trace_", 0) == 0 && e.path().extension() == ".csv") {
        any = true;
        break;
      }
    }
  }
  if (!any) {
    std::cerr << "warning: no trace CSVs under " << dir.string() << "; no plot scripts written\n";
    return {};
  }
  std::vector<std::filesystem::path> written;
  for (const auto& [name, body] : {std::pair{"plot_trajectory.py", kPlotTrajectory},
                                   std::pair{"plot_error.py", kPlotError},
                                   std::pair{"plot_thrust.py", kPlotThrust}}) {
    const auto path = dir / name;
    write_text(path, std::string(kPlotPrelude) + body);
    written.push_back(path);
  }
  return written;
}

std::string code_version() { return std::string(ASV_VERSION) + "+" + ASV_GIT_REVISION; }

void write_manifest(const std::filesystem::path& path, const KeyValueConfig& cfg, const std::string& command,
                    const std::vector<std::uint64_t>& seeds) {
  json j = {{"command", command},
            {"code_version", code_version()},
            {"config_hash", hex64(cfg.hash())},
            {"config", cfg.entries()},
            {"seeds", seeds}};
  write_text(path, j.dump(2) + "\n");
}

}  // namespace asv
