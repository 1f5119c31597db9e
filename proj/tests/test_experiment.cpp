#include <doctest.h>

#include "welrec/experiment.hpp"
#include "welrec/rng.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace welrec;

namespace {

std::filesystem::path temp_dir() {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "welrec_experiment_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_json(const std::string& name, const std::string& text) {
  const std::filesystem::path path = temp_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path.string();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

EnvConfig tiny_env() {
  EnvConfig env;
  env.nb_users = 20;
  env.nb_prods = 8;
  env.nb_sessions = 4;
  env.nb_items_session = 3;
  env.dimension = 2;
  return env;
}

}  // namespace

TEST_CASE("the per-run seed streams line the subcommands up") {
  EnvConfig env = tiny_env();

  const LatentWorld world = world_for_seed(env, 123);
  CHECK(world.config.seed == 123);
  env.seed = 123;
  const LatentWorld direct = generate_world(env);
  CHECK(world.user_vecs == direct.user_vecs);
  CHECK(world.item_vecs == direct.item_vecs);
  CHECK(world.prices == direct.prices);

  const std::vector<SessionEvent> events = events_for_seed(world, 123);
  const std::vector<SessionEvent> expect =
      simulate_sessions(world, derive_seed(123, kStreamSessions));
  REQUIRE(events.size() == expect.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(events[i].user == expect[i].user);
    CHECK(events[i].exposed == expect[i].exposed);
    CHECK(events[i].choice == expect[i].choice);
  }

  TrainConfig base;
  base.epochs = 9;
  base.learning_rate = 0.05;
  const TrainConfig derived = train_for_seed(base, 123);
  CHECK(derived.seed == derive_seed(123, kStreamTrain));
  CHECK(derived.epochs == 9);
  CHECK(derived.learning_rate == 0.05);
}

TEST_CASE("environment configs load from presets, overrides and flat objects") {
  const EnvConfig bare = load_env_config(write_json("env_bare.json", "\"medium1\""));
  const EnvConfig medium1 = preset_env("medium1");
  CHECK(bare.nb_users == medium1.nb_users);
  CHECK(bare.nb_prods == medium1.nb_prods);
  CHECK(bare.nb_sessions == medium1.nb_sessions);
  CHECK(bare.nb_items_session == medium1.nb_items_session);
  CHECK(bare.dimension == medium1.dimension);

  const EnvConfig overridden = load_env_config(write_json(
      "env_override.json", "{\"preset\":\"medium2\",\"nb_users\":50,\"seed\":9}"));
  const EnvConfig medium2 = preset_env("medium2");
  CHECK(overridden.nb_users == 50);
  CHECK(overridden.seed == 9);
  CHECK(overridden.nb_sessions == medium2.nb_sessions);
  CHECK(overridden.nb_items_session == medium2.nb_items_session);

  const EnvConfig flat = load_env_config(write_json(
      "env_flat.json", "{\"nb_users\":12,\"nb_prods\":6,\"dimension\":2}"));
  CHECK(flat.nb_users == 12);
  CHECK(flat.nb_prods == 6);
  CHECK(flat.dimension == 2);
  CHECK(flat.latent_variance == EnvConfig{}.latent_variance);

  CHECK_THROWS(load_env_config(write_json("env_bad1.json", "\"medium9\"")));
  CHECK_THROWS(load_env_config(write_json("env_bad2.json", "{\"preset\":\"medium9\"}")));
  CHECK_THROWS(load_env_config(write_json("env_bad3.json", "{\"nb_users\":0}")));
  CHECK_THROWS(load_env_config(write_json("env_bad4.json", "{\"nb_userz\":5}")));
}

TEST_CASE("training configs load with defaults for absent fields") {
  const TrainConfig cfg = load_train_config(
      write_json("train.json", "{\"epochs\":5,\"learning_rate\":0.1}"));
  CHECK(cfg.epochs == 5);
  CHECK(cfg.learning_rate == 0.1);
  CHECK(cfg.beta1 == TrainConfig{}.beta1);
  CHECK(cfg.batch == TrainConfig{}.batch);
  CHECK_THROWS(load_train_config(write_json("train_bad.json", "{\"batch\":0}")));
  CHECK_THROWS(load_train_config(write_json("train_typo.json", "{\"epoch\":5}")));
}

TEST_CASE("the default experiment covers all presets, methods and objectives") {
  const ExperimentConfig cfg = default_experiment();
  REQUIRE(cfg.envs.size() == 3);
  CHECK(cfg.envs[0].name == "medium1");
  CHECK(cfg.envs[1].name == "medium2");
  CHECK(cfg.envs[2].name == "hard");
  CHECK(cfg.methods.size() == 6);
  CHECK(cfg.objectives.size() == 4);
  CHECK(cfg.ks == std::vector<int>{1, 5, 10});
  CHECK(cfg.n_seeds == 3);
  CHECK(cfg.base_seed == 1);
  CHECK(cfg.output_dir.empty());
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("experiment configs load from JSON") {
  const std::string path = write_json("experiment.json", R"({
    "envs": ["medium1", {"name": "tiny", "nb_users": 10, "nb_prods": 5, "dimension": 2}],
    "train": {"epochs": 3},
    "methods": ["rum-mf", "oracle-welfare"],
    "objectives": ["welfare", "sales"],
    "ks": [1, 5],
    "n_seeds": 2,
    "base_seed": 11,
    "output_dir": "out"
  })");
  const ExperimentConfig cfg = load_experiment_config(path);
  REQUIRE(cfg.envs.size() == 2);
  CHECK(cfg.envs[0].name == "medium1");
  CHECK(cfg.envs[1].name == "tiny");
  CHECK(cfg.envs[1].config.nb_users == 10);
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.methods == std::vector<Method>{Method::kRumMf, Method::kOracleWelfare});
  CHECK(cfg.objectives ==
        std::vector<VpsObjective>{VpsObjective::kWelfare, VpsObjective::kVolume});
  CHECK(cfg.ks == std::vector<int>{1, 5});
  CHECK(cfg.n_seeds == 2);
  CHECK(cfg.base_seed == 11);
  CHECK(cfg.output_dir == "out");

  CHECK_THROWS(load_experiment_config(
      write_json("experiment_bad.json", "{\"methods\":[\"psychic\"]}")));
}

TEST_CASE("experiment validation rejects malformed configs") {
  ExperimentConfig cfg = default_experiment();
  cfg.envs.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_experiment();
  cfg.envs[1].name = "medium1";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_experiment();
  cfg.envs[0].name = "a/b";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_experiment();
  cfg.methods.push_back(cfg.methods.front());
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_experiment();
  cfg.ks = {5, 1};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = default_experiment();
  cfg.n_seeds = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("a small experiment runs deterministically end to end") {
  ExperimentConfig cfg = default_experiment();
  cfg.envs = {{"tinyenv", tiny_env()}};
  cfg.train.epochs = 8;
  cfg.train.batch = 32;
  cfg.ks = {1, 3};
  cfg.n_seeds = 2;
  cfg.base_seed = 5;

  const std::filesystem::path out1 = temp_dir() / "run1";
  const std::filesystem::path out2 = temp_dir() / "run2";
  std::filesystem::remove_all(out1);
  std::filesystem::remove_all(out2);

  cfg.output_dir = out1.string();
  const ExperimentResult r1 = run_experiment(cfg);
  cfg.output_dir = out2.string();
  const ExperimentResult r2 = run_experiment(cfg);

  REQUIRE(r1.envs.size() == 1);
  const EnvResult& env = r1.envs[0];
  CHECK(env.env_name == "tinyenv");
  REQUIRE(env.per_seed.size() == 2);
  CHECK(env.per_seed[0].seed == 5);
  CHECK(env.per_seed[1].seed == 6);

  // Supported (method, objective) pairs: 1 oracle-welfare, 1 oracle-utility,
  // 1 bestof, 4 rum-mf, 4 mf-sm, 2 mf-pclick; times two slate sizes.
  for (const SeedResult& seed_result : env.per_seed) {
    CHECK(seed_result.reports.size() == 26);
    REQUIRE(seed_result.traces.size() == 3);
    for (const auto& [family, trace] : seed_result.traces) {
      (void)family;
      CHECK(trace.size() == 8);
    }
    for (const MetricReport& r : seed_result.reports) {
      CHECK(r.n_runs == 1);
      CHECK(std::abs(r.welfare - (r.utility + r.revenue)) <= 1e-9);
    }
  }
  REQUIRE(env.aggregated.size() == 26);
  for (const MetricReport& r : env.aggregated) {
    CHECK(r.n_runs == 2);
    CHECK(std::abs(r.welfare - (r.utility + r.revenue)) <= 1e-9);
  }

  // Bitwise repeatability in memory.
  for (std::size_t s = 0; s < env.per_seed.size(); ++s) {
    const SeedResult& a = env.per_seed[s];
    const SeedResult& b = r2.envs[0].per_seed[s];
    REQUIRE(a.reports.size() == b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
      CHECK(a.reports[i].welfare == b.reports[i].welfare);
      CHECK(a.reports[i].precision == b.reports[i].precision);
    }
  }

  // Byte-identical artifacts.
  for (const char* name :
       {"tinyenv/metrics.csv", "tinyenv/metrics_per_seed.csv", "tinyenv/loss_rum-mf_seed5.csv",
        "tinyenv/loss_mf-sm_seed6.csv", "tinyenv/loss_mf-pclick_seed5.csv", "report.md"}) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(out1 / name));
    CHECK(slurp(out1 / name) == slurp(out2 / name));
  }

  const std::string report = slurp(out1 / "report.md");
  CHECK(report.find("tinyenv") != std::string::npos);
  CHECK(report.find("rum-mf") != std::string::npos);
  CHECK(report == render_report(cfg, r2));
}
