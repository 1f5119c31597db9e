#include "welrec/sim.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace welrec {

void EnvConfig::validate() const {
  if (nb_users <= 0) throw std::invalid_argument("EnvConfig: nb_users must be > 0");
  if (nb_prods <= 0) throw std::invalid_argument("EnvConfig: nb_prods must be > 0");
  if (nb_sessions < 0) throw std::invalid_argument("EnvConfig: nb_sessions must be >= 0");
  if (nb_items_session < 0 || nb_items_session > nb_prods) {
    throw std::invalid_argument("EnvConfig: nb_items_session must be in [0, nb_prods]");
  }
  if (dimension < 1) throw std::invalid_argument("EnvConfig: dimension must be >= 1");
  if (latent_variance < 0.0) throw std::invalid_argument("EnvConfig: latent_variance must be >= 0");
  if (price_noise_lo > price_noise_hi) {
    throw std::invalid_argument("EnvConfig: price_noise_lo must be <= price_noise_hi");
  }
  if (!(kappa_true > 0.0)) throw std::invalid_argument("EnvConfig: kappa_true must be > 0");
}

EnvConfig preset_env(const std::string& name) {
  EnvConfig cfg;
  if (name == "medium1") {
    cfg.nb_sessions = 3;
    cfg.nb_items_session = 10;
    cfg.nb_users = 1000;
    cfg.nb_prods = 100;
  } else if (name == "medium2") {
    cfg.nb_sessions = 15;
    cfg.nb_items_session = 2;
    cfg.nb_users = 1000;
    cfg.nb_prods = 100;
  } else if (name == "hard") {
    cfg.nb_sessions = 3;
    cfg.nb_items_session = 10;
    cfg.nb_users = 1000;
    cfg.nb_prods = 1000;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  cfg.dimension = 10;
  cfg.latent_variance = 3.0;
  cfg.price_noise_lo = 0.0;
  cfg.price_noise_hi = 5.0;
  return cfg;
}

bool is_preset_name(const std::string& name) {
  return name == "medium1" || name == "medium2" || name == "hard";
}

double revenue_maximizing_price(const Eigen::Ref<const Vector>& wtps) {
  std::vector<double> w(wtps.data(), wtps.data() + wtps.size());
  std::sort(w.begin(), w.end(), std::greater<double>());
  double best_price = 0.0;
  double best_revenue = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) break;  // only positive WTPs are candidates
    if (i + 1 < w.size() && w[i + 1] == w[i]) continue;  // demand counted at the last duplicate
    const double revenue = w[i] * static_cast<double>(i + 1);
    // scanning from high to low price, so on a tied revenue the lower price wins
    if (revenue >= best_revenue) {
      best_revenue = revenue;
      best_price = w[i];
    }
  }
  return best_price;
}

void set_prices(LatentWorld& world, Rng& rng) {
  const int n = world.n_items();
  world.prices.resize(n);
  for (ItemId j = 0; j < n; ++j) {
    const double base = revenue_maximizing_price(world.wtp_column(j));
    const double noise = rng.uniform(world.config.price_noise_lo, world.config.price_noise_hi);
    // base is >= 0; clamp keeps prices non-negative under negative noise bounds
    world.prices[j] = std::max(0.0, base + noise);
  }
}

LatentWorld generate_world(const EnvConfig& config) {
  config.validate();
  Rng rng(config.seed);

  const int d = config.dimension;
  const double sd = std::sqrt(config.latent_variance);

  // Vectors are centered at the origin. A shared nonzero population mean
  // would add the same offset mean_u . mean_i to every WTP in the world,
  // letting a single global price ranking approach the oracle and drowning
  // the per-user structure the models are supposed to recover.
  LatentWorld world;
  world.config = config;
  world.kappa_true = config.kappa_true;
  world.user_vecs.resize(config.nb_users, d);
  world.item_vecs.resize(config.nb_prods, d);
  for (int i = 0; i < config.nb_users; ++i) {
    for (int c = 0; c < d; ++c) world.user_vecs(i, c) = rng.normal(0.0, sd);
  }
  for (int j = 0; j < config.nb_prods; ++j) {
    for (int c = 0; c < d; ++c) world.item_vecs(j, c) = rng.normal(0.0, sd);
  }
  set_prices(world, rng);
  return world;
}

double true_utility(const LatentWorld& world, UserId user, ItemId item) {
  if (user < 0 || user >= world.n_users()) {
    throw std::out_of_range("true_utility: unknown user id " + std::to_string(user));
  }
  if (item == kNoBuy) return 0.0;
  if (item < 0 || item >= world.n_items()) {
    throw std::out_of_range("true_utility: unknown item id " + std::to_string(item));
  }
  return world.wtp(user, item) - world.prices[item];
}

ItemId simulate_choice(const LatentWorld& world, UserId user,
                       const std::vector<ItemId>& exposed, Rng& rng) {
  ItemId best = kNoBuy;
  double best_score = -std::numeric_limits<double>::infinity();
  for (ItemId item : exposed) {
    const double score = true_utility(world, user, item) + world.kappa_true * rng.gumbel();
    if (score > best_score) {
      best_score = score;
      best = item;
    }
  }
  const double nobuy_score = world.kappa_true * rng.gumbel();
  if (nobuy_score > best_score) best = kNoBuy;
  return best;
}

std::vector<SessionEvent> simulate_sessions(const LatentWorld& world, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SessionEvent> events;
  events.reserve(static_cast<std::size_t>(world.config.nb_users) *
                 static_cast<std::size_t>(world.config.nb_sessions));
  for (UserId user = 0; user < world.config.nb_users; ++user) {
    for (int t = 0; t < world.config.nb_sessions; ++t) {
      SessionEvent ev;
      ev.user = user;
      ev.session_index = t;
      ev.exposed = rng.sample_without_replacement(world.config.nb_prods,
                                                  world.config.nb_items_session);
      ev.choice = simulate_choice(world, user, ev.exposed, rng);
      events.push_back(std::move(ev));
    }
  }
  return events;
}

}  // namespace welrec
