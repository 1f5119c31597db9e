#pragma once

#include "welrec/rng.hpp"
#include "welrec/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace welrec {

/// Synthetic market configuration.
struct EnvConfig {
  int nb_users = 1000;
  int nb_prods = 100;
  int nb_sessions = 15;       ///< shopping sessions per user
  int nb_items_session = 2;   ///< catalog sample shown per session
  int dimension = 10;         ///< latent dimension of user/item vectors
  double latent_variance = 3.0;
  double price_noise_lo = 0.0;  ///< uniform price noise bounds, currency units
  double price_noise_hi = 5.0;
  double kappa_true = 1.0;  ///< Gumbel noise scale of the simulated shopper, > 0
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on a violated constraint.
  void validate() const;
};

/// Named environments: "medium1", "medium2", "hard".
EnvConfig preset_env(const std::string& name);
bool is_preset_name(const std::string& name);

/// Ground truth hidden from the models: latent vectors, prices, noise scale.
/// The willingness-to-pay of user i for item j is user_vecs.row(i) . item_vecs.row(j).
struct LatentWorld {
  EnvConfig config;
  Matrix user_vecs;  ///< nb_users x d
  Matrix item_vecs;  ///< nb_prods x d
  Vector prices;     ///< nb_prods, all >= 0
  double kappa_true = 1.0;

  int n_users() const { return static_cast<int>(user_vecs.rows()); }
  int n_items() const { return static_cast<int>(item_vecs.rows()); }

  double wtp(UserId user, ItemId item) const {
    return user_vecs.row(user).dot(item_vecs.row(item));
  }

  /// WTP of every user for one item.
  Vector wtp_column(ItemId item) const {
    return user_vecs * item_vecs.row(item).transpose();
  }
};

/// One shopping session: what the user saw and what they did.
struct SessionEvent {
  UserId user = 0;
  int session_index = 0;
  std::vector<ItemId> exposed;  ///< distinct item ids, ascending
  ItemId choice = kNoBuy;       ///< an element of exposed, or kNoBuy
};

/// Draws one origin-centered latent vector per user and item, then sets
/// prices. Deterministic given config.seed.
LatentWorld generate_world(const EnvConfig& config);

/// Monopolist price against a noise-free WTP population: the positive WTP
/// value p maximizing p * |{w in wtps : w >= p}|, ties broken toward the
/// lower price; 0 if no WTP is positive.
double revenue_maximizing_price(const Eigen::Ref<const Vector>& wtps);

/// Prices every item at its revenue-maximizing base price plus uniform noise.
/// Requires user_vecs/item_vecs already drawn.
void set_prices(LatentWorld& world, Rng& rng);

/// Noise-free utility wtp - price; kNoBuy returns exactly 0.
/// Throws std::out_of_range on an unknown id.
double true_utility(const LatentWorld& world, UserId user, ItemId item);

/// One noisy decision: argmax over exposed and kNoBuy of utility plus
/// kappa_true-scaled Gumbel noise (the outside option is perturbed too).
ItemId simulate_choice(const LatentWorld& world, UserId user,
                       const std::vector<ItemId>& exposed, Rng& rng);

/// Full event log: for every user and session, a uniform without-replacement
/// sample of the catalog and the resulting noisy choice. Deterministic given
/// the seed.
std::vector<SessionEvent> simulate_sessions(const LatentWorld& world, std::uint64_t seed);

}  // namespace welrec
