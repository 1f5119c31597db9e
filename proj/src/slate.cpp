#include "welrec/slate.hpp"

#include "welrec/numeric.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace welrec {

std::string to_string(VpsObjective objective) {
  switch (objective) {
    case VpsObjective::kVolume: return "sales";
    case VpsObjective::kUtility: return "utility";
    case VpsObjective::kRevenue: return "revenue";
    case VpsObjective::kWelfare: return "welfare";
  }
  throw std::logic_error("bad VpsObjective");
}

VpsObjective objective_from_string(const std::string& name) {
  if (name == "sales" || name == "volume") return VpsObjective::kVolume;
  if (name == "utility") return VpsObjective::kUtility;
  if (name == "revenue") return VpsObjective::kRevenue;
  if (name == "welfare") return VpsObjective::kWelfare;
  throw std::invalid_argument("unknown objective: " + name);
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kOracleUtility: return "oracle-utility";
    case Method::kOracleWelfare: return "oracle-welfare";
    case Method::kBestOf: return "bestof";
    case Method::kRumMf: return "rum-mf";
    case Method::kMfSm: return "mf-sm";
    case Method::kMfPclick: return "mf-pclick";
  }
  throw std::logic_error("bad Method");
}

Method method_from_string(const std::string& name) {
  if (name == "oracle-utility") return Method::kOracleUtility;
  if (name == "oracle-welfare") return Method::kOracleWelfare;
  if (name == "bestof") return Method::kBestOf;
  if (name == "rum-mf") return Method::kRumMf;
  if (name == "mf-sm") return Method::kMfSm;
  if (name == "mf-pclick") return Method::kMfPclick;
  throw std::invalid_argument("unknown method: " + name);
}

Method method_for(Family family) {
  switch (family) {
    case Family::kRumMf: return Method::kRumMf;
    case Family::kMfSm: return Method::kMfSm;
    case Family::kMfPclick: return Method::kMfPclick;
  }
  throw std::logic_error("bad Family");
}

bool supports(Family family, VpsObjective objective) {
  if (family == Family::kMfPclick) {
    return objective == VpsObjective::kVolume || objective == VpsObjective::kRevenue;
  }
  return true;
}

bool supports(Method method, VpsObjective objective) {
  switch (method) {
    case Method::kOracleUtility: return objective == VpsObjective::kUtility;
    case Method::kOracleWelfare: return objective == VpsObjective::kWelfare;
    case Method::kBestOf: return objective == VpsObjective::kVolume;
    case Method::kRumMf: return true;
    case Method::kMfSm: return true;
    case Method::kMfPclick:
      return objective == VpsObjective::kVolume || objective == VpsObjective::kRevenue;
  }
  throw std::logic_error("bad Method");
}

double evps(const ModelParams& params, UserId user, ItemId item, double price,
            VpsObjective objective) {
  if (!supports(params.family, objective)) {
    throw std::invalid_argument("evps: objective " + to_string(objective) +
                                " is unsupported for " + to_string(params.family));
  }
  const double buy_prob = sigmoid(params.score(user, item, price));
  switch (objective) {
    case VpsObjective::kVolume: return buy_prob;
    case VpsObjective::kUtility: return buy_prob * predicted_utility(params, user, item, price);
    case VpsObjective::kRevenue: return buy_prob * price;
    case VpsObjective::kWelfare: return buy_prob * predict_wtp(params, user, item, price);
  }
  throw std::logic_error("bad VpsObjective");
}

std::vector<ItemId> greedy_order(const Eigen::Ref<const Vector>& scores, int k) {
  if (k < 1) throw std::invalid_argument("greedy_order: k must be >= 1");
  std::vector<ItemId> ids(static_cast<std::size_t>(scores.size()));
  std::iota(ids.begin(), ids.end(), 0);
  std::sort(ids.begin(), ids.end(), [&scores](ItemId a, ItemId b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  ids.resize(std::min<std::size_t>(static_cast<std::size_t>(k), ids.size()));
  return ids;
}

namespace {

SlateSpec make_slate(const Eigen::Ref<const Vector>& scores, UserId user, int k,
                     Method method, VpsObjective objective) {
  SlateSpec slate;
  slate.user = user;
  slate.k = k;
  slate.method = method;
  slate.objective = objective;
  slate.items = greedy_order(scores, k);
  slate.scores.reserve(slate.items.size());
  for (const ItemId item : slate.items) slate.scores.push_back(scores[item]);
  return slate;
}

}  // namespace

SlateSpec model_slate(const ModelParams& params, UserId user,
                      const Eigen::Ref<const Vector>& prices, VpsObjective objective, int k) {
  Vector scores(params.n_items());
  for (ItemId j = 0; j < params.n_items(); ++j) {
    scores[j] = evps(params, user, j, prices[j], objective);
  }
  return make_slate(scores, user, k, method_for(params.family), objective);
}

Vector sales_counts(const std::vector<SessionEvent>& events, int nb_prods) {
  Vector counts = Vector::Zero(nb_prods);
  for (const SessionEvent& ev : events) {
    if (ev.choice != kNoBuy) counts[ev.choice] += 1.0;
  }
  return counts;
}

SlateSpec bestof_slate(const Eigen::Ref<const Vector>& counts, UserId user, int k) {
  return make_slate(counts, user, k, Method::kBestOf, VpsObjective::kVolume);
}

SlateSpec bestof_slate(const std::vector<SessionEvent>& events, int nb_prods, UserId user,
                       int k) {
  if (events.empty()) throw std::invalid_argument("bestof_slate: empty event log");
  return bestof_slate(sales_counts(events, nb_prods), user, k);
}

SlateSpec oracle_slate(const LatentWorld& world, UserId user, int k, VpsObjective objective) {
  if (objective != VpsObjective::kUtility && objective != VpsObjective::kWelfare) {
    throw std::invalid_argument("oracle_slate: objective must be utility or welfare");
  }
  // Raw true value, not gated on whether the item would sell; the welfare
  // oracle may rank an overpriced item first and lose the sale.
  const int n = world.n_items();
  Vector scores(n);
  for (ItemId j = 0; j < n; ++j)
    scores[j] =
        objective == VpsObjective::kUtility ? true_utility(world, user, j) : world.wtp(user, j);
  const Method method = objective == VpsObjective::kUtility ? Method::kOracleUtility
                                                            : Method::kOracleWelfare;
  return make_slate(scores, user, k, method, objective);
}

}  // namespace welrec
