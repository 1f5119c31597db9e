#pragma once

#include "welrec/metrics.hpp"
#include "welrec/sim.hpp"
#include "welrec/slate.hpp"
#include "welrec/train.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace welrec {

/// Seed streams hanging off a run seed, so `simulate`, `train` and
/// `experiment` agree on what world and event log a seed denotes.
inline constexpr std::uint64_t kStreamSessions = 1;
inline constexpr std::uint64_t kStreamTrain = 2;

/// World drawn from the run seed itself.
LatentWorld world_for_seed(EnvConfig env, std::uint64_t run_seed);
/// Event log drawn from stream kStreamSessions of the run seed.
std::vector<SessionEvent> events_for_seed(const LatentWorld& world, std::uint64_t run_seed);
/// Training config with its seed moved to stream kStreamTrain of the run seed.
TrainConfig train_for_seed(TrainConfig base, std::uint64_t run_seed);

/// One environment to run, under a filesystem-safe name.
struct EnvTask {
  std::string name;
  EnvConfig config;
};

struct ExperimentConfig {
  std::vector<EnvTask> envs;          ///< default: the three presets
  TrainConfig train;
  std::vector<Method> methods;        ///< default: all six
  std::vector<VpsObjective> objectives;  ///< default: all four
  std::vector<int> ks = {1, 5, 10};
  int n_seeds = 3;
  std::uint64_t base_seed = 1;        ///< run seeds are base_seed + run index
  std::string output_dir;             ///< empty: return results, write nothing

  void validate() const;
};

/// Config with every default filled in.
ExperimentConfig default_experiment();

/// JSON loaders. Environment configs take either a flat field object with an
/// optional "preset" base, or a bare preset name; the experiment config embeds
/// them under "envs" together with "train", "methods", "objectives", "ks",
/// "n_seeds", "base_seed" and "output_dir", all optional. Unknown keys are
/// rejected.
EnvConfig load_env_config(const std::string& path);
TrainConfig load_train_config(const std::string& path);
ExperimentConfig load_experiment_config(const std::string& path);

/// Raw per-seed rows plus the traces of the models fitted for them.
struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<MetricReport> reports;
  std::vector<std::pair<Family, std::vector<EpochLoss>>> traces;
};

struct EnvResult {
  std::string env_name;
  std::vector<SeedResult> per_seed;
  std::vector<MetricReport> aggregated;  ///< mean and std over seeds
};

struct ExperimentResult {
  std::vector<EnvResult> envs;
};

/// Full pipeline per environment and seed: world, sessions, fits, slates,
/// metrics; aggregates over seeds. Unsupported (method, objective) pairs are
/// skipped with one stderr warning per environment. With a non-empty
/// output_dir also writes per-environment CSVs, loss traces and a top-level
/// report.md.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// The markdown report body emitted by run_experiment.
std::string render_report(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace welrec
