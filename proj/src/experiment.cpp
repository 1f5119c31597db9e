#include "welrec/experiment.hpp"

#include "welrec/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <initializer_list>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace welrec {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

template <typename T>
void maybe(const json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

// A typo in a config key must not silently fall back to a default.
void reject_unknown_keys(const json& doc, std::initializer_list<const char*> allowed,
                         const char* what) {
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }))
      throw std::runtime_error(std::string(what) + ": unknown key \"" + key + "\"");
  }
}

EnvConfig env_from_json(const json& doc) {
  if (doc.is_string()) return preset_env(doc.get<std::string>());
  if (!doc.is_object())
    throw std::runtime_error("environment config must be an object or a preset name");
  reject_unknown_keys(doc,
                      {"preset", "name", "nb_users", "nb_prods", "nb_sessions",
                       "nb_items_session", "dimension", "latent_variance", "price_noise_lo",
                       "price_noise_hi", "kappa_true", "seed"},
                      "environment config");
  EnvConfig env;
  if (doc.contains("preset")) env = preset_env(doc.at("preset").get<std::string>());
  maybe(doc, "nb_users", env.nb_users);
  maybe(doc, "nb_prods", env.nb_prods);
  maybe(doc, "nb_sessions", env.nb_sessions);
  maybe(doc, "nb_items_session", env.nb_items_session);
  maybe(doc, "dimension", env.dimension);
  maybe(doc, "latent_variance", env.latent_variance);
  maybe(doc, "price_noise_lo", env.price_noise_lo);
  maybe(doc, "price_noise_hi", env.price_noise_hi);
  maybe(doc, "kappa_true", env.kappa_true);
  maybe(doc, "seed", env.seed);
  env.validate();
  return env;
}

std::string env_name_from_json(const json& doc) {
  if (doc.is_string()) return doc.get<std::string>();
  if (doc.contains("name")) return doc.at("name").get<std::string>();
  if (doc.contains("preset")) return doc.at("preset").get<std::string>();
  return "custom";
}

TrainConfig train_from_json(const json& doc) {
  reject_unknown_keys(doc,
                      {"learning_rate", "beta1", "beta2", "eps_adam", "l2_weight", "epochs",
                       "batch", "seed"},
                      "training config");
  TrainConfig cfg;
  maybe(doc, "learning_rate", cfg.learning_rate);
  maybe(doc, "beta1", cfg.beta1);
  maybe(doc, "beta2", cfg.beta2);
  maybe(doc, "eps_adam", cfg.eps_adam);
  maybe(doc, "l2_weight", cfg.l2_weight);
  maybe(doc, "epochs", cfg.epochs);
  maybe(doc, "batch", cfg.batch);
  maybe(doc, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

bool is_learned(Method method) {
  return method == Method::kRumMf || method == Method::kMfSm || method == Method::kMfPclick;
}

Family family_of(Method method) {
  switch (method) {
    case Method::kRumMf: return Family::kRumMf;
    case Method::kMfSm: return Family::kMfSm;
    case Method::kMfPclick: return Family::kMfPclick;
    default: throw std::logic_error("family_of: not a learned method");
  }
}

std::string fmt2(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

template <typename Seq, typename Fn>
std::string join(const Seq& seq, Fn&& fn) {
  std::string out;
  for (const auto& element : seq) {
    if (!out.empty()) out += ", ";
    out += fn(element);
  }
  return out;
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  const fs::path root(config.output_dir);
  for (const EnvResult& env : result.envs) {
    const fs::path dir = root / env.env_name;
    fs::create_directories(dir);
    save_metrics(env.aggregated, (dir / "metrics.csv").string());
    std::vector<MetricReport> rows;
    std::vector<std::uint64_t> seeds;
    for (const SeedResult& s : env.per_seed)
      for (const MetricReport& r : s.reports) {
        rows.push_back(r);
        seeds.push_back(s.seed);
      }
    save_metrics(rows, (dir / "metrics_per_seed.csv").string(), &seeds);
    for (const SeedResult& s : env.per_seed)
      for (const auto& [family, trace] : s.traces)
        save_loss_trace(trace, (dir / ("loss_" + to_string(family) + "_seed" +
                                       std::to_string(s.seed) + ".csv"))
                                   .string());
  }
  fs::create_directories(root);
  std::ofstream out(root / "report.md", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report.md");
  out << render_report(config, result);
}

}  // namespace

LatentWorld world_for_seed(EnvConfig env, std::uint64_t run_seed) {
  env.seed = run_seed;
  return generate_world(env);
}

std::vector<SessionEvent> events_for_seed(const LatentWorld& world, std::uint64_t run_seed) {
  return simulate_sessions(world, derive_seed(run_seed, kStreamSessions));
}

TrainConfig train_for_seed(TrainConfig base, std::uint64_t run_seed) {
  base.seed = derive_seed(run_seed, kStreamTrain);
  return base;
}

void ExperimentConfig::validate() const {
  if (envs.empty()) throw std::invalid_argument("experiment: no environments");
  std::set<std::string> names;
  for (const EnvTask& env : envs) {
    if (env.name.empty()) throw std::invalid_argument("experiment: empty environment name");
    for (char c : env.name)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
        throw std::invalid_argument("experiment: environment name not filesystem-safe: " +
                                    env.name);
    if (!names.insert(env.name).second)
      throw std::invalid_argument("experiment: duplicate environment name " + env.name);
    env.config.validate();
  }
  train.validate();
  if (methods.empty()) throw std::invalid_argument("experiment: no methods");
  if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size())
    throw std::invalid_argument("experiment: duplicate method");
  if (objectives.empty()) throw std::invalid_argument("experiment: no objectives");
  if (std::set<VpsObjective>(objectives.begin(), objectives.end()).size() != objectives.size())
    throw std::invalid_argument("experiment: duplicate objective");
  if (ks.empty()) throw std::invalid_argument("experiment: no slate sizes");
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] < 1 || (i > 0 && ks[i] <= ks[i - 1]))
      throw std::invalid_argument("experiment: slate sizes must be increasing and >= 1");
  if (n_seeds < 1) throw std::invalid_argument("experiment: n_seeds must be >= 1");
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  for (const char* name : {"medium1", "medium2", "hard"})
    cfg.envs.push_back({name, preset_env(name)});
  cfg.methods = {Method::kOracleWelfare, Method::kOracleUtility, Method::kBestOf,
                 Method::kRumMf,         Method::kMfSm,          Method::kMfPclick};
  cfg.objectives = {VpsObjective::kWelfare, VpsObjective::kUtility, VpsObjective::kRevenue,
                    VpsObjective::kVolume};
  return cfg;
}

EnvConfig load_env_config(const std::string& path) { return env_from_json(parse_file(path)); }

TrainConfig load_train_config(const std::string& path) {
  return train_from_json(parse_file(path));
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const json doc = parse_file(path);
  reject_unknown_keys(doc,
                      {"envs", "train", "methods", "objectives", "ks", "n_seeds", "base_seed",
                       "output_dir"},
                      "experiment config");
  ExperimentConfig cfg = default_experiment();
  if (doc.contains("envs")) {
    cfg.envs.clear();
    for (const json& e : doc.at("envs"))
      cfg.envs.push_back({env_name_from_json(e), env_from_json(e)});
  }
  if (doc.contains("train")) cfg.train = train_from_json(doc.at("train"));
  if (doc.contains("methods")) {
    cfg.methods.clear();
    for (const json& m : doc.at("methods"))
      cfg.methods.push_back(method_from_string(m.get<std::string>()));
  }
  if (doc.contains("objectives")) {
    cfg.objectives.clear();
    for (const json& o : doc.at("objectives"))
      cfg.objectives.push_back(objective_from_string(o.get<std::string>()));
  }
  maybe(doc, "ks", cfg.ks);
  maybe(doc, "n_seeds", cfg.n_seeds);
  maybe(doc, "base_seed", cfg.base_seed);
  maybe(doc, "output_dir", cfg.output_dir);
  cfg.validate();
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int k_max = config.ks.back();

  ExperimentResult result;
  for (const EnvTask& env : config.envs) {
    EnvResult env_result;
    env_result.env_name = env.name;

    for (int run = 0; run < config.n_seeds; ++run) {
      const std::uint64_t run_seed = config.base_seed + static_cast<std::uint64_t>(run);
      const LatentWorld world = world_for_seed(env.config, run_seed);
      const std::vector<SessionEvent> events = events_for_seed(world, run_seed);
      const TrainConfig train_cfg = train_for_seed(config.train, run_seed);

      SeedResult seed_result;
      seed_result.seed = run_seed;

      std::map<Family, ModelParams> fitted;
      for (Method method : config.methods) {
        if (!is_learned(method)) continue;
        const Family family = family_of(method);
        if (fitted.count(family) != 0) continue;
        const bool wanted =
            std::any_of(config.objectives.begin(), config.objectives.end(),
                        [&](VpsObjective o) { return supports(method, o); });
        if (!wanted) continue;
        FitResult fit_result = fit(events, world.prices, family, env.config.nb_users,
                                   env.config.nb_prods, env.config.dimension, train_cfg);
        seed_result.traces.emplace_back(family, std::move(fit_result.trace));
        fitted.emplace(family, std::move(fit_result.params));
      }

      Vector counts;
      if (std::find(config.methods.begin(), config.methods.end(), Method::kBestOf) !=
          config.methods.end())
        counts = sales_counts(events, env.config.nb_prods);

      for (Method method : config.methods) {
        for (VpsObjective objective : config.objectives) {
          if (!supports(method, objective)) {
            if (run == 0)
              std::cerr << "warning: " << env.name << ": skipping unsupported pair "
                        << to_string(method) << " x " << to_string(objective) << "\n";
            continue;
          }
          std::vector<SlateSpec> slates;
          slates.reserve(env.config.nb_users);
          for (UserId user = 0; user < env.config.nb_users; ++user) {
            switch (method) {
              case Method::kOracleUtility:
              case Method::kOracleWelfare:
                slates.push_back(oracle_slate(world, user, k_max, objective));
                break;
              case Method::kBestOf:
                slates.push_back(bestof_slate(counts, user, k_max));
                break;
              default:
                slates.push_back(model_slate(fitted.at(family_of(method)), user,
                                             world.prices, objective, k_max));
            }
          }
          for (int k : config.ks)
            seed_result.reports.push_back(compute_metrics(world, slates, k));
        }
      }
      env_result.per_seed.push_back(std::move(seed_result));
    }

    const std::size_t n_rows = env_result.per_seed.front().reports.size();
    for (std::size_t row = 0; row < n_rows; ++row) {
      std::vector<MetricReport> runs;
      runs.reserve(env_result.per_seed.size());
      for (const SeedResult& s : env_result.per_seed) runs.push_back(s.reports[row]);
      env_result.aggregated.push_back(aggregate_reports(runs));
    }
    result.envs.push_back(std::move(env_result));
  }

  if (!config.output_dir.empty()) write_outputs(config, result);
  return result;
}

std::string render_report(const ExperimentConfig& config, const ExperimentResult& result) {
  const int k_ref = std::find(config.ks.begin(), config.ks.end(), 1) != config.ks.end()
                        ? 1
                        : config.ks.front();
  const auto find_row = [](const std::vector<MetricReport>& rows, Method method,
                           VpsObjective objective, int k) -> const MetricReport* {
    for (const MetricReport& r : rows)
      if (r.method == method && r.objective == objective && r.k == k) return &r;
    return nullptr;
  };
  // Best supported objective per method, by welfare.
  const auto best_welfare = [&](const std::vector<MetricReport>& rows, Method method,
                                int k) -> const MetricReport* {
    const MetricReport* best = nullptr;
    for (VpsObjective objective : config.objectives) {
      const MetricReport* row = find_row(rows, method, objective, k);
      if (row != nullptr && (best == nullptr || row->welfare > best->welfare)) best = row;
    }
    return best;
  };
  const auto has_rows = [&](Method method) {
    return std::any_of(config.objectives.begin(), config.objectives.end(),
                       [&](VpsObjective o) { return supports(method, o); });
  };

  std::ostringstream md;
  md << "# Welfare-optimized recommendation experiment\n\n";
  md << "- environments: "
     << join(config.envs, [](const EnvTask& e) { return e.name; }) << "\n";
  md << "- runs: " << config.n_seeds << " (seeds " << config.base_seed << " to "
     << config.base_seed + static_cast<std::uint64_t>(config.n_seeds - 1) << ")\n";
  md << "- slate sizes: " << join(config.ks, [](int k) { return std::to_string(k); })
     << "\n";
  md << "- training: lr=" << format_double(config.train.learning_rate)
     << ", epochs=" << config.train.epochs << ", batch=" << config.train.batch
     << ", l2=" << format_double(config.train.l2_weight) << "\n";
  md << "- dispersion: sample standard deviation over runs\n\n";

  md << "## Welfare@" << k_ref << " by environment and run\n\n";
  md << "| method |";
  for (const EnvResult& env : result.envs)
    for (std::size_t s = 0; s < env.per_seed.size(); ++s)
      md << ' ' << env.env_name << " run" << s + 1 << " |";
  md << "\n|---|";
  for (const EnvResult& env : result.envs)
    for (std::size_t s = 0; s < env.per_seed.size(); ++s) md << "---:|";
  md << "\n";
  for (Method method : config.methods) {
    if (!has_rows(method)) continue;
    md << "| " << to_string(method) << " |";
    for (const EnvResult& env : result.envs)
      for (const SeedResult& s : env.per_seed) {
        const MetricReport* row = best_welfare(s.reports, method, k_ref);
        md << ' ' << (row != nullptr ? fmt2(row->welfare) : "n/a") << " |";
      }
    md << "\n";
  }
  md << "\nEach cell is the method's best supported objective in that run.\n\n";

  for (const EnvResult& env : result.envs) {
    md << "## " << env.env_name << "\n\n";

    md << "### Method and objective at k=" << k_ref << "\n\n";
    md << "| method | objective | Welfare@" << k_ref << " | Utility@" << k_ref
       << " | Revenue@" << k_ref << " | Sales@" << k_ref << " | Precision@" << k_ref
       << " |\n";
    md << "|---|---|---:|---:|---:|---:|---:|\n";
    for (const MetricReport& row : env.aggregated) {
      if (row.k != k_ref) continue;
      const auto cell = [&](double mean, double std) {
        return row.n_runs > 1 ? fmt2(mean) + " ± " + fmt2(std) : fmt2(mean);
      };
      md << "| " << to_string(row.method) << " | " << to_string(row.objective) << " | "
         << cell(row.welfare, row.std_welfare) << " | "
         << cell(row.utility, row.std_utility) << " | "
         << cell(row.revenue, row.std_revenue) << " | " << cell(row.sales, row.std_sales)
         << " | " << cell(row.precision, row.std_precision) << " |\n";
    }
    md << "\n";

    md << "### Welfare by slate size (best objective per method)\n\n";
    md << "| method |";
    for (int k : config.ks) md << " Welfare@" << k << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < config.ks.size(); ++i) md << "---:|";
    md << "\n";
    for (Method method : config.methods) {
      if (!has_rows(method)) continue;
      md << "| " << to_string(method) << " |";
      for (int k : config.ks) {
        const MetricReport* row = best_welfare(env.aggregated, method, k);
        md << ' ' << (row != nullptr ? fmt2(row->welfare) : "n/a") << " |";
      }
      md << "\n";
    }
    md << "\n";
  }
  return md.str();
}

}  // namespace welrec
