// Reports what a disturbance scenario does to the NMPC baseline: peak wave force,
// peak current speed and the extra control effort relative to calm water.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asv/experiment.hpp"

using namespace asv;

namespace {

struct Stats {
  double e_ave = 0;
  double rmse = 0;
};

Stats closed_loop(const ExperimentSpec& spec, const DisturbanceScenario& scenario, std::uint64_t seed) {
  TrackingEnv env(spec.model, spec.reward, spec.episode, scenario);
  NmpcController ctl(spec.nmpc, spec.model);
  const EpisodeLog log = run_closed_loop(env, ctl, spec.trajectory, TrackingEnv::on_reference(spec.trajectory), seed);
  const MetricsReport m = compute_metrics(to_trace(log), spec.transient);
  return {m.e_ave, m.rmse_e_p};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disturbance calibration against the NMPC baseline"};
  std::string config_path;
  std::vector<std::string> overrides;
  int runs = 5;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override a config entry, key=value");
  app.add_option("--runs", runs, "seeds per scenario")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    KeyValueConfig cfg;
    if (!config_path.empty()) cfg = KeyValueConfig::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.set("evaluate.controller", "nmpc");
    const ExperimentSpec spec = ExperimentSpec::from_config(cfg);

    // Open-loop statistics of the processes along the reference.
    double peak_wave = 0, peak_current = 0;
    for (int r = 0; r < runs; ++r) {
      DisturbanceState state(spec.disturbances, derive_seed(spec.seed, 500 + static_cast<std::uint64_t>(r)));
      const VesselState on_ref = TrackingEnv::on_reference(spec.trajectory);
      for (int k = 0; k < spec.episode.max_steps(); ++k) {
        const DisturbanceSample s = state.step(spec.model, on_ref, spec.episode.dt);
        peak_wave = std::max(peak_wave, s.wave.head<2>().norm());
        peak_current = std::max(peak_current, s.current_velocity.head<2>().norm());
      }
    }

    std::vector<double> calm, rough, rmse_calm, rmse_rough;
    for (const auto seed : spec.seeds()) {
      const Stats a = closed_loop(spec, DisturbanceScenario::none(), seed);
      const Stats b = closed_loop(spec, spec.disturbances, seed);
      calm.push_back(a.e_ave);
      rough.push_back(b.e_ave);
      rmse_calm.push_back(a.rmse);
      rmse_rough.push_back(b.rmse);
    }
    const double e0 = aggregate(calm).mean, e1 = aggregate(rough).mean;
    std::printf("peak wave force %.3f N, peak current %.3f m/s\n", peak_wave, peak_current);
    std::printf("nmpc E_ave calm %.4f, disturbed %.4f: %+.1f%% (mean |f| %+.1f%%)\n", e0, e1, 100.0 * (e1 / e0 - 1.0),
                100.0 * (e1 * e1 / (e0 * e0) - 1.0));
    std::printf("nmpc rmse calm %.4f m, disturbed %.4f m\n", aggregate(rmse_calm).mean, aggregate(rmse_rough).mean);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
