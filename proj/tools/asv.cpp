#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asv/ddpg.hpp"
#include "asv/experiment.hpp"

namespace fs = std::filesystem;
using namespace asv;

namespace {

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  long seed = -1;
  std::string out_dir;
  int reps = 0;
};

KeyValueConfig load_config(const Globals& g) {
  KeyValueConfig cfg;
  if (!g.config_path.empty()) cfg = KeyValueConfig::load(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed >= 0) cfg.set("seed", std::to_string(g.seed));
  if (!g.out_dir.empty()) cfg.set("out_dir", g.out_dir);
  if (g.reps > 0) cfg.set("evaluate.reps", std::to_string(g.reps));
  return cfg;
}

fs::path out_dir(const KeyValueConfig& cfg) {
  fs::path dir = cfg.get_string("out_dir", "results");
  fs::create_directories(dir);
  return dir;
}

std::uint64_t seed_of(const KeyValueConfig& cfg) { return static_cast<std::uint64_t>(cfg.get_int("seed", 1)); }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void print_report(const ExperimentReport& r) {
  std::printf("%-14s reps ok %zu/%zu  rmse %.4f +- %.4f m  E_ave %.4f  heading %.4f rad\n", r.controller.c_str(),
              r.rmse.count, r.repetitions.size(), r.rmse.mean, r.rmse.stddev, r.e_ave.mean, r.heading.mean);
}

int cmd_train(const Globals& g, int episodes, bool simple, int progress_every) {
  KeyValueConfig cfg = load_config(g);
  if (episodes >= 0) cfg.set("train.episodes", std::to_string(episodes));
  if (simple) cfg.set("reward.simple", "true");
  const TrainingConfig tc = TrainingConfig::from_config(cfg);
  const fs::path dir = out_dir(cfg);
  const std::uint64_t seed = seed_of(cfg);
  write_manifest(dir / "manifest.json", cfg, "train", {seed});

  TrainingHooks hooks;
  hooks.checkpoint_path = dir / "policy.ckpt";
  std::ofstream curve(dir / "learning_curve.csv", std::ios::trunc);
  curve << "episode,steps,return,mean_e_p,terminated_by\n";
  hooks.on_episode = [&](const EpisodeSummary& s, double ma) {
    char line[160];
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%s\n", s.episode, s.steps, s.total_return, s.mean_e_p,
                  to_string(s.terminated_by).c_str());
    curve << line << std::flush;
    if (progress_every > 0 && (s.episode + 1) % progress_every == 0)
      std::printf("episode %5d  return %9.2f  moving avg %9.2f  steps %3d  %s\n", s.episode + 1, s.total_return, ma,
                  s.steps, to_string(s.terminated_by).c_str());
  };
  const TrainingResult result = train(tc, seed, hooks);
  nn::save_checkpoint(dir / "last.ckpt", result.last);
  write_learning_curve(dir / "learning_curve.csv", result.curve);

  nlohmann::json summary = {{"episodes", result.curve.size()},
                            {"updates", result.updates},
                            {"best_episode", result.best_episode},
                            {"best_moving_average", result.best_moving_average},
                            {"stop_reason", result.stop_reason}};
  if (!result.diagnostic.empty()) summary["diagnostic"] = result.diagnostic;
  write_file(dir / "training.json", summary.dump(2) + "\n");
  std::printf("trained %zu episodes (%s); best moving average %.2f at episode %d; checkpoint %s\n",
              result.curve.size(), result.stop_reason.c_str(), result.best_moving_average, result.best_episode,
              (dir / "policy.ckpt").string().c_str());
  if (result.stop_reason == "divergence") {
    std::fprintf(stderr, "training diverged: %s\n", result.diagnostic.c_str());
    return 2;
  }
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& controller, const std::string& checkpoint) {
  KeyValueConfig cfg = load_config(g);
  if (!checkpoint.empty()) cfg.set("evaluate.checkpoint", checkpoint);
  const std::string which = controller.empty() ? cfg.get_string("evaluate.controller", "nmpc") : controller;
  const fs::path dir = out_dir(cfg);

  if (which == "both") {
    cfg.set("evaluate.controller", "drl");
    ExperimentSpec drl = ExperimentSpec::from_config(cfg);
    cfg.set("evaluate.controller", "nmpc");
    ExperimentSpec nmpc = ExperimentSpec::from_config(cfg);
    drl.out_dir = nmpc.out_dir = dir;
    write_manifest(dir / "manifest.json", cfg, "evaluate both", drl.seeds());
    const Comparison c = compare(drl, nmpc);
    write_file(dir / "comparison.json", c.to_json("drl", "nmpc"));
    print_report(c.a);
    print_report(c.b);
    std::printf("drl better in %d of %d paired repetitions; error ratio %.3f, energy ratio %.3f\n", c.a_better,
                c.paired, c.error_ratio, c.energy_ratio);
  } else {
    cfg.set("evaluate.controller", which);
    ExperimentSpec spec = ExperimentSpec::from_config(cfg);
    spec.out_dir = dir;
    write_manifest(dir / "manifest.json", cfg, "evaluate " + which, spec.seeds());
    print_report(run_experiment(spec));
  }
  emit_plots(dir);
  return 0;
}

int cmd_ablate(const Globals& g, const std::string& full, const std::string& simple) {
  KeyValueConfig cfg = load_config(g);
  const fs::path dir = out_dir(cfg);
  cfg.set("evaluate.controller", "drl");
  cfg.set("evaluate.checkpoint", full.empty() ? cfg.get_string("ablate.full", "") : full);
  cfg.set("evaluate.label", "full_reward");
  ExperimentSpec a = ExperimentSpec::from_config(cfg);
  cfg.set("evaluate.checkpoint", simple.empty() ? cfg.get_string("ablate.simple", "") : simple);
  cfg.set("evaluate.label", "simple_reward");
  ExperimentSpec b = ExperimentSpec::from_config(cfg);
  a.out_dir = b.out_dir = dir;
  write_manifest(dir / "manifest.json", cfg, "ablate", a.seeds());
  const AblationReport r = run_ablation(a, b);
  write_file(dir / "ablation.json", r.to_json());
  print_report(r.result.a);
  print_report(r.result.b);
  std::printf("error reduction %.2f%% (reference %.2f%%), energy reduction %.2f%% (reference %.2f%%)\n",
              r.error_reduction_pct, AblationReport::kReferenceErrorReductionPct, r.energy_reduction_pct,
              AblationReport::kReferenceEnergyReductionPct);
  emit_plots(dir);
  return 0;
}

/// Replays thrust rows (f1..f4 per control period) open loop; a constant thrust if no file is given.
class ScriptedController : public Controller {
 public:
  explicit ScriptedController(std::vector<Eigen::Vector4d> rows) : rows_(std::move(rows)) {}
  std::string name() const override { return "scripted"; }
  void reset(const TrackingEnv&) override { k_ = 0; }
  ThrustCommand command(const TrackingEnv&, const VesselState&) override {
    const Eigen::Vector4d f = rows_[std::min(k_, rows_.size() - 1)];
    ++k_;
    return ThrustCommand(f);
  }

 private:
  std::vector<Eigen::Vector4d> rows_;
  std::size_t k_ = 0;
};

std::vector<Eigen::Vector4d> read_actions(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open action file " + path.string());
  std::vector<Eigen::Vector4d> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'f') continue;
    std::stringstream ss(line);
    Eigen::Vector4d v;
    std::string cell;
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("action rows need four values: " + line);
      v(i) = std::stod(cell);
    }
    rows.push_back(v);
  }
  if (rows.empty()) throw ConfigError("action file " + path.string() + " has no rows");
  return rows;
}

int cmd_simulate(const Globals& g, const std::string& actions, const std::vector<double>& thrust) {
  KeyValueConfig cfg = load_config(g);
  ExperimentSpec spec = ExperimentSpec::from_config(cfg);
  const fs::path dir = out_dir(cfg);
  std::vector<Eigen::Vector4d> rows;
  if (!actions.empty()) {
    rows = read_actions(actions);
  } else {
    if (thrust.size() != 4) throw ConfigError("--thrust expects four values");
    rows.push_back(Eigen::Vector4d(thrust[0], thrust[1], thrust[2], thrust[3]));
  }
  const std::uint64_t seed = spec.seeds().front();
  write_manifest(dir / "manifest.json", cfg, "simulate", {seed});
  TrackingEnv env(spec.model, spec.reward, spec.episode, spec.disturbances);
  ScriptedController ctl(rows);
  const EpisodeLog log = run_closed_loop(env, ctl, spec.trajectory, TrackingEnv::on_reference(spec.trajectory), seed);
  const auto trace = to_trace(log);
  write_trace_csv(dir / "trace_simulate.csv", trace);
  std::printf("simulated %zu steps, ended by %s\n", trace.size(), to_string(log.termination).c_str());
  if (!log.diagnostic.empty()) std::fprintf(stderr, "%s\n", log.diagnostic.c_str());
  return log.termination == Termination::model_explosion ? 2 : 0;
}

int cmd_metrics(const std::vector<std::string>& traces, double transient) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& t : traces) {
    const MetricsReport m = compute_metrics(read_trace_csv(t), transient);
    out[t] = {{"steps", m.steps}, {"rmse_e_p", m.rmse_e_p}, {"mean_heading_error", m.mean_heading_error},
              {"e_ave", m.e_ave}};
  }
  std::cout << std::setprecision(17) << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surface vessel tracking: DDPG training, NMPC baseline and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "override a config entry, key=value");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--reps", g.reps, "evaluation repetitions");

  auto* train = app.add_subcommand("train", "train a DDPG policy");
  int episodes = -1, progress = 50;
  bool simple = false;
  train->add_option("--episodes", episodes, "episode budget");
  train->add_flag("--simple-reward", simple, "position and heading terms only");
  train->add_option("--progress", progress, "print every N episodes (0 = quiet)");

  auto* evaluate = app.add_subcommand("evaluate", "closed-loop evaluation with traces and metrics");
  std::string controller, checkpoint;
  evaluate->add_option("--controller", controller, "nmpc, drl or both")
      ->check(CLI::IsMember({"nmpc", "drl", "both"}));
  evaluate->add_option("--checkpoint", checkpoint, "policy checkpoint");

  auto* ablate = app.add_subcommand("ablate", "full-reward versus simple-reward policy");
  std::string full_ckpt, simple_ckpt;
  ablate->add_option("--full", full_ckpt, "full-reward checkpoint");
  ablate->add_option("--simple", simple_ckpt, "simple-reward checkpoint");

  auto* simulate = app.add_subcommand("simulate", "open-loop scripted thrust");
  std::string actions;
  std::vector<double> thrust{0, 0, 0, 0};
  simulate->add_option("--actions", actions, "CSV of f1,f2,f3,f4 rows, one per control period")
      ->check(CLI::ExistingFile);
  simulate->add_option("--thrust", thrust, "constant f1 f2 f3 f4")->expected(4);

  auto* metrics = app.add_subcommand("metrics", "recompute metrics from trace CSVs");
  std::vector<std::string> traces;
  double transient = 0;
  metrics->add_option("traces", traces, "trace CSV files")->required()->check(CLI::ExistingFile);
  metrics->add_option("--transient", transient, "seconds excluded from the start");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) return cmd_train(g, episodes, simple, progress);
    if (*evaluate) return cmd_evaluate(g, controller, checkpoint);
    if (*ablate) return cmd_ablate(g, full_ckpt, simple_ckpt);
    if (*simulate) return cmd_simulate(g, actions, thrust);
    if (*metrics) return cmd_metrics(traces, transient);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
