#pragma once

#include "welrec/model.hpp"
#include "welrec/sim.hpp"
#include "welrec/types.hpp"

#include <string>
#include <vector>

namespace welrec {

/// What one sale is worth when ranking by expected value per sale.
enum class VpsObjective {
  kVolume,   ///< every sale counts 1 ("sales")
  kUtility,  ///< buyer surplus of the sale
  kRevenue,  ///< item price
  kWelfare   ///< buyer surplus + revenue = willingness-to-pay
};

enum class Method { kOracleUtility, kOracleWelfare, kBestOf, kRumMf, kMfSm, kMfPclick };

std::string to_string(VpsObjective objective);
VpsObjective objective_from_string(const std::string& name);
std::string to_string(Method method);
Method method_from_string(const std::string& name);
Method method_for(Family family);

/// mf-pclick recovers no utility or WTP: only volume and revenue apply.
bool supports(Family family, VpsObjective objective);
/// Oracle methods carry their own objective; bestof is pure popularity (volume).
bool supports(Method method, VpsObjective objective);

/// A ranked top-k recommendation list for one user.
struct SlateSpec {
  UserId user = 0;
  int k = 0;
  std::vector<ItemId> items;   ///< ranked, distinct, |items| = min(k, catalog)
  std::vector<double> scores;  ///< ranking score per item (eVPS or count)
  Method method = Method::kRumMf;
  VpsObjective objective = VpsObjective::kVolume;
};

/// Expected value per sale: the model's buy-vs-leave probability
/// sigmoid(score) times the value of the sale under the objective.
/// Throws on an unsupported (family, objective) pair.
double evps(const ModelParams& params, UserId user, ItemId item, double price,
            VpsObjective objective);

/// Item ids ranked by score descending, ties by ascending id, truncated to k.
std::vector<ItemId> greedy_order(const Eigen::Ref<const Vector>& scores, int k);

/// Slate for a learned model: greedy top-k of the per-item eVPS.
SlateSpec model_slate(const ModelParams& params, UserId user,
                      const Eigen::Ref<const Vector>& prices, VpsObjective objective, int k);

/// Per-item sale counts in an event log (no-buy never counted).
Vector sales_counts(const std::vector<SessionEvent>& events, int nb_prods);

/// The k most-sold items in the training log; identical for every user.
SlateSpec bestof_slate(const Eigen::Ref<const Vector>& counts, UserId user, int k);
SlateSpec bestof_slate(const std::vector<SessionEvent>& events, int nb_prods, UserId user, int k);

/// Ground-truth slate: items ranked by raw true value under the objective
/// (true utility, or true WTP for kWelfare), ties by ascending id. The
/// welfare oracle may lead with an item the user refuses to buy.
/// Objective must be kUtility or kWelfare.
SlateSpec oracle_slate(const LatentWorld& world, UserId user, int k, VpsObjective objective);

}  // namespace welrec
