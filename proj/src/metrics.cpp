#include "welrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace welrec {

ChoiceOutcome eval_choice(const LatentWorld& world, UserId user,
                          const std::vector<ItemId>& slate_items) {
  std::vector<ItemId> ordered = slate_items;
  std::sort(ordered.begin(), ordered.end());
  ChoiceOutcome best;  // no-buy wins ties at utility 0
  for (ItemId item : ordered) {
    const double u = true_utility(world, user, item);
    if (u > best.utility) {
      best.item = item;
      best.utility = u;
      best.price = world.prices[item];
    }
  }
  return best;
}

namespace {

// argmax of true utility over the whole catalog, ties to the lowest id.
ItemId best_catalog_item(const LatentWorld& world, UserId user, double* best_utility) {
  const Vector wtps = world.user_vecs.row(user) * world.item_vecs.transpose();
  ItemId best = 0;
  double best_u = wtps[0] - world.prices[0];
  for (ItemId j = 1; j < world.config.nb_prods; ++j) {
    const double u = wtps[j] - world.prices[j];
    if (u > best_u) {
      best = j;
      best_u = u;
    }
  }
  *best_utility = best_u;
  return best;
}

}  // namespace

MetricReport compute_metrics(const LatentWorld& world, const std::vector<SlateSpec>& slates,
                             int k) {
  if (k < 1) throw std::invalid_argument("compute_metrics: k must be >= 1");
  if (slates.empty()) throw std::invalid_argument("compute_metrics: no slates");

  const int n_users = world.config.nb_users;
  std::vector<const SlateSpec*> by_user(n_users, nullptr);
  for (const SlateSpec& slate : slates) {
    if (slate.user < 0 || slate.user >= n_users)
      throw std::out_of_range("compute_metrics: slate user out of range");
    if (by_user[slate.user] != nullptr)
      throw std::invalid_argument("compute_metrics: duplicate slate for user " +
                                  std::to_string(slate.user));
    by_user[slate.user] = &slate;
  }
  const std::size_t need =
      static_cast<std::size_t>(std::min(k, world.config.nb_prods));
  for (UserId u = 0; u < n_users; ++u) {
    if (by_user[u] == nullptr)
      throw std::invalid_argument("compute_metrics: missing slate for user " +
                                  std::to_string(u));
    if (by_user[u]->items.size() < need)
      throw std::invalid_argument("compute_metrics: slate shorter than k for user " +
                                  std::to_string(u));
  }

  MetricReport report;
  report.method = slates.front().method;
  report.objective = slates.front().objective;
  report.k = k;

  double utility_sum = 0.0;
  double revenue_sum = 0.0;
  double welfare_sum = 0.0;
  double sales_sum = 0.0;
  double hit_sum = 0.0;
  int nobuy_users = 0;

  for (UserId u = 0; u < n_users; ++u) {
    const std::vector<ItemId>& full = by_user[u]->items;
    const std::vector<ItemId> prefix(full.begin(),
                                     full.begin() + std::min(need, full.size()));
    const ChoiceOutcome outcome = eval_choice(world, u, prefix);
    utility_sum += outcome.utility;
    revenue_sum += outcome.price;
    welfare_sum += outcome.utility + outcome.price;
    if (outcome.item != kNoBuy) sales_sum += 1.0;

    double best_u = 0.0;
    const ItemId best_item = best_catalog_item(world, u, &best_u);
    if (best_u > 0.0) {
      const bool hit =
          std::find(prefix.begin(), prefix.end(), best_item) != prefix.end();
      if (hit) hit_sum += 1.0;
    } else {
      ++nobuy_users;
      if (outcome.item == kNoBuy) hit_sum += 1.0;
    }
  }

  const double inv = 1.0 / static_cast<double>(n_users);
  report.utility = utility_sum * inv;
  report.revenue = revenue_sum * inv;
  report.welfare = report.utility + report.revenue;
  report.sales = sales_sum * inv;
  report.precision = hit_sum * inv;
  report.n_nobuy_users = static_cast<double>(nobuy_users);
  report.n_runs = 1;
  return report;
}

MetricReport aggregate_reports(const std::vector<MetricReport>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_reports: no runs");
  for (const MetricReport& r : runs) {
    if (r.method != runs.front().method || r.objective != runs.front().objective ||
        r.k != runs.front().k)
      throw std::invalid_argument("aggregate_reports: mixed (method, objective, k)");
  }

  const auto mean_of = [&](double MetricReport::*field) {
    double sum = 0.0;
    for (const MetricReport& r : runs) sum += r.*field;
    return sum / static_cast<double>(runs.size());
  };
  const auto std_of = [&](double MetricReport::*field, double mean) {
    if (runs.size() < 2) return 0.0;
    double ss = 0.0;
    for (const MetricReport& r : runs) {
      const double d = r.*field - mean;
      ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(runs.size() - 1));
  };

  MetricReport out = runs.front();
  out.welfare = mean_of(&MetricReport::welfare);
  out.utility = mean_of(&MetricReport::utility);
  out.revenue = mean_of(&MetricReport::revenue);
  out.sales = mean_of(&MetricReport::sales);
  out.precision = mean_of(&MetricReport::precision);
  out.n_nobuy_users = mean_of(&MetricReport::n_nobuy_users);
  out.n_runs = static_cast<int>(runs.size());
  out.std_welfare = std_of(&MetricReport::welfare, out.welfare);
  out.std_utility = std_of(&MetricReport::utility, out.utility);
  out.std_revenue = std_of(&MetricReport::revenue, out.revenue);
  out.std_sales = std_of(&MetricReport::sales, out.sales);
  out.std_precision = std_of(&MetricReport::precision, out.precision);
  return out;
}

}  // namespace welrec
