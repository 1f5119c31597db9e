#pragma once

#include "welrec/sim.hpp"
#include "welrec/slate.hpp"
#include "welrec/types.hpp"

#include <vector>

namespace welrec {

/// What the noise-free user picks out of a slate plus the no-buy option.
struct ChoiceOutcome {
  ItemId item = kNoBuy;
  double utility = 0.0;
  double price = 0.0;
};

/// argmax of true utility over the slate items and kNoBuy; ties go to no-buy
/// first, then to the ascending item id.
ChoiceOutcome eval_choice(const LatentWorld& world, UserId user,
                          const std::vector<ItemId>& slate_items);

/// The five @k metrics for one (method, objective, k), averaged over users,
/// optionally aggregated over runs.
struct MetricReport {
  Method method = Method::kRumMf;
  VpsObjective objective = VpsObjective::kVolume;
  int k = 0;
  double welfare = 0.0;
  double utility = 0.0;
  double revenue = 0.0;
  double sales = 0.0;
  double precision = 0.0;
  double n_nobuy_users = 0.0;  ///< users whose best catalog utility is <= 0
  int n_runs = 1;
  double std_welfare = 0.0;
  double std_utility = 0.0;
  double std_revenue = 0.0;
  double std_sales = 0.0;
  double std_precision = 0.0;
};

/// Scores one slate per user against ground truth at slate size k. Slates may
/// carry longer rankings; the top-k prefix is evaluated. Throws if a user has
/// no slate or a slate is shorter than min(k, catalog).
MetricReport compute_metrics(const LatentWorld& world, const std::vector<SlateSpec>& slates,
                             int k);

/// Mean and sample standard deviation over runs of the same (method,
/// objective, k).
MetricReport aggregate_reports(const std::vector<MetricReport>& runs);

}  // namespace welrec
