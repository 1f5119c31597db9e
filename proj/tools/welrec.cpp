#include "welrec/experiment.hpp"
#include "welrec/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace welrec;

namespace {

std::vector<int> canonical_ks(std::vector<int> ks) {
  if (ks.empty()) return {1, 5, 10};
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

EnvConfig resolve_env(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty() && !preset.empty())
    throw std::runtime_error("pass either --config or --preset, not both");
  if (!config_path.empty()) return load_env_config(config_path);
  if (!preset.empty()) return preset_env(preset);
  throw std::runtime_error("need --config or --preset");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Welfare-optimized recommendation workbench"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Generate a world and its session log");
  std::string sim_config, sim_preset, sim_out;
  std::uint64_t sim_seed = 1;
  sim->add_option("--config", sim_config, "Environment config JSON");
  sim->add_option("--preset", sim_preset, "Preset name: medium1, medium2 or hard");
  sim->add_option("--seed", sim_seed, "Run seed");
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->callback([&] {
    const EnvConfig env = resolve_env(sim_config, sim_preset);
    const LatentWorld world = world_for_seed(env, sim_seed);
    const std::vector<SessionEvent> events = events_for_seed(world, sim_seed);
    fs::create_directories(sim_out);
    const fs::path dir(sim_out);
    save_world(world, (dir / "world.json").string());
    save_events(events, (dir / "events.csv").string());
    std::cout << "wrote " << (dir / "world.json").string() << " ("
              << world.config.nb_users << " users, " << world.config.nb_prods
              << " items)\n"
              << "wrote " << (dir / "events.csv").string() << " (" << events.size()
              << " sessions)\n";
  });

  auto* tr = app.add_subcommand("train", "Fit one model family on an event log");
  std::string tr_world, tr_events, tr_family = "rum-mf", tr_config, tr_out;
  std::uint64_t tr_seed = 1;
  tr->add_option("--world", tr_world, "World JSON")->required();
  tr->add_option("--events", tr_events, "Event log CSV")->required();
  tr->add_option("--family", tr_family, "rum-mf, mf-sm or mf-pclick");
  tr->add_option("--config", tr_config, "Training config JSON");
  tr->add_option("--seed", tr_seed, "Run seed");
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr->callback([&] {
    const LatentWorld world = load_world(tr_world);
    const std::vector<SessionEvent> events = load_events(tr_events);
    TrainConfig cfg = tr_config.empty() ? TrainConfig{} : load_train_config(tr_config);
    cfg = train_for_seed(cfg, tr_seed);
    const Family family = family_from_string(tr_family);
    const FitResult fit_result =
        fit(events, world.prices, family, world.config.nb_users, world.config.nb_prods,
            world.config.dimension, cfg);
    fs::create_directories(tr_out);
    const fs::path dir(tr_out);
    const std::string name = to_string(family);
    save_checkpoint(fit_result.params, (dir / ("checkpoint_" + name + ".json")).string());
    save_loss_trace(fit_result.trace, (dir / ("loss_" + name + ".csv")).string());
    std::cout << "wrote " << (dir / ("checkpoint_" + name + ".json")).string()
              << " (final mean nll "
              << format_double(fit_result.trace.back().mean_nll) << ")\n";
  });

  auto* ev = app.add_subcommand("evaluate", "Score checkpoints against a world");
  std::string ev_world, ev_events, ev_out;
  std::vector<std::string> ev_ckpts;
  std::vector<int> ev_ks;
  bool ev_dump = false;
  ev->add_option("--world", ev_world, "World JSON")->required();
  ev->add_option("--checkpoint", ev_ckpts, "Checkpoint JSON (repeatable)");
  ev->add_option("--events", ev_events, "Event log CSV, enables the bestof baseline");
  ev->add_option("--k", ev_ks, "Slate sizes")->delimiter(',');
  ev->add_option("--out", ev_out, "Output directory")->required();
  ev->add_flag("--dump-slates", ev_dump, "Also write every ranked slate");
  ev->callback([&] {
    const LatentWorld world = load_world(ev_world);
    const std::vector<int> ks = canonical_ks(ev_ks);
    const int k_max = ks.back();
    const int n_users = world.config.nb_users;
    const std::vector<VpsObjective> objectives = {VpsObjective::kWelfare,
                                                  VpsObjective::kUtility,
                                                  VpsObjective::kRevenue,
                                                  VpsObjective::kVolume};
    std::vector<MetricReport> reports;
    std::vector<SlateSpec> dumped;
    const auto eval_slates = [&](std::vector<SlateSpec> slates) {
      for (int k : ks) reports.push_back(compute_metrics(world, slates, k));
      if (ev_dump) dumped.insert(dumped.end(), slates.begin(), slates.end());
    };

    for (VpsObjective objective : {VpsObjective::kWelfare, VpsObjective::kUtility}) {
      std::vector<SlateSpec> slates;
      for (UserId user = 0; user < n_users; ++user)
        slates.push_back(oracle_slate(world, user, k_max, objective));
      eval_slates(std::move(slates));
    }
    if (!ev_events.empty()) {
      const std::vector<SessionEvent> events = load_events(ev_events);
      const Vector counts = sales_counts(events, world.config.nb_prods);
      std::vector<SlateSpec> slates;
      for (UserId user = 0; user < n_users; ++user)
        slates.push_back(bestof_slate(counts, user, k_max));
      eval_slates(std::move(slates));
    }
    for (const std::string& path : ev_ckpts) {
      const ModelParams params = load_checkpoint(path);
      if (params.n_users() != n_users || params.n_items() != world.config.nb_prods)
        throw std::runtime_error("checkpoint " + path + " does not match the world");
      for (VpsObjective objective : objectives) {
        if (!supports(params.family, objective)) {
          std::cerr << "warning: skipping unsupported pair " << to_string(params.family)
                    << " x " << to_string(objective) << "\n";
          continue;
        }
        std::vector<SlateSpec> slates;
        for (UserId user = 0; user < n_users; ++user)
          slates.push_back(model_slate(params, user, world.prices, objective, k_max));
        eval_slates(std::move(slates));
      }
    }
    fs::create_directories(ev_out);
    const fs::path dir(ev_out);
    save_metrics(reports, (dir / "metrics.csv").string());
    if (ev_dump) save_slates(dumped, (dir / "slates.csv").string());
    std::cout << "wrote " << (dir / "metrics.csv").string() << " (" << reports.size()
              << " rows)\n";
  });

  auto* ex = app.add_subcommand("experiment", "End-to-end multi-seed pipeline");
  std::string ex_config, ex_out;
  std::vector<std::string> ex_presets;
  std::vector<int> ex_ks;
  std::uint64_t ex_seed = 1;
  int ex_nseeds = 3;
  ex->add_option("--config", ex_config, "Experiment config JSON");
  auto* opt_preset =
      ex->add_option("--preset", ex_presets, "Preset environments")->delimiter(',');
  auto* opt_seed = ex->add_option("--seed", ex_seed, "Base seed");
  auto* opt_seeds = ex->add_option("--seeds", ex_nseeds, "Number of runs");
  auto* opt_k = ex->add_option("--k", ex_ks, "Slate sizes")->delimiter(',');
  auto* opt_out = ex->add_option("--out", ex_out, "Output directory");
  ex->callback([&] {
    ExperimentConfig cfg =
        ex_config.empty() ? default_experiment() : load_experiment_config(ex_config);
    if (*opt_preset) {
      cfg.envs.clear();
      for (const std::string& name : ex_presets) cfg.envs.push_back({name, preset_env(name)});
    }
    if (*opt_seed) cfg.base_seed = ex_seed;
    if (*opt_seeds) cfg.n_seeds = ex_nseeds;
    if (*opt_k) cfg.ks = canonical_ks(ex_ks);
    if (*opt_out) cfg.output_dir = ex_out;
    if (cfg.output_dir.empty())
      throw std::runtime_error("experiment: need --out or output_dir in the config");
    run_experiment(cfg);
    std::cout << "wrote " << (fs::path(cfg.output_dir) / "report.md").string() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
