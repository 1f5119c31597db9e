#include <doctest.h>

#include "welrec/metrics.hpp"
#include "welrec/rng.hpp"
#include "welrec/slate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace welrec;

namespace {

LatentWorld line_world(const std::vector<double>& wtps, const std::vector<double>& prices) {
  LatentWorld world;
  world.config.nb_users = 1;
  world.config.nb_prods = static_cast<int>(wtps.size());
  world.config.dimension = 1;
  world.user_vecs = Matrix::Ones(1, 1);
  world.item_vecs = Matrix(wtps.size(), 1);
  for (std::size_t j = 0; j < wtps.size(); ++j) world.item_vecs(j, 0) = wtps[j];
  world.prices = Eigen::Map<const Vector>(prices.data(), prices.size());
  return world;
}

// Two users, three items: utilities {2, -1.5, -2} and {5, -2.5, 0}.
LatentWorld hand_world() {
  LatentWorld world;
  world.config.nb_users = 2;
  world.config.nb_prods = 3;
  world.config.dimension = 1;
  world.user_vecs = Matrix(2, 1);
  world.user_vecs << 1.0, 2.0;
  world.item_vecs = Matrix(3, 1);
  world.item_vecs << 3.0, -1.0, 2.0;
  world.prices = Vector(3);
  world.prices << 1.0, 0.5, 4.0;
  return world;
}

SlateSpec make_slate(UserId user, std::vector<ItemId> items) {
  SlateSpec slate;
  slate.user = user;
  slate.k = static_cast<int>(items.size());
  slate.items = std::move(items);
  slate.scores.assign(slate.items.size(), 0.0);
  slate.method = Method::kRumMf;
  slate.objective = VpsObjective::kWelfare;
  return slate;
}

// Straight-line re-derivation of every metric, no shared code with the library.
MetricReport brute_metrics(const LatentWorld& world, const std::vector<SlateSpec>& slates,
                           int k) {
  const int n = world.config.nb_users;
  double utility = 0.0, revenue = 0.0, sales = 0.0, hits = 0.0, nobuy = 0.0;
  for (const SlateSpec& slate : slates) {
    const UserId u = slate.user;
    const std::size_t need = static_cast<std::size_t>(std::min(k, world.config.nb_prods));
    ItemId picked = kNoBuy;
    double picked_u = 0.0;
    for (std::size_t r = 0; r < std::min(need, slate.items.size()); ++r) {
      const ItemId j = slate.items[r];
      const double uj = world.wtp(u, j) - world.prices[j];
      if (uj > picked_u || (uj == picked_u && picked != kNoBuy && j < picked)) {
        picked = j;
        picked_u = uj;
      }
    }
    if (picked != kNoBuy) {
      utility += picked_u;
      revenue += world.prices[picked];
      sales += 1.0;
    }
    ItemId star = 0;
    double star_u = world.wtp(u, 0) - world.prices[0];
    for (ItemId j = 1; j < world.config.nb_prods; ++j) {
      const double uj = world.wtp(u, j) - world.prices[j];
      if (uj > star_u) {
        star = j;
        star_u = uj;
      }
    }
    if (star_u > 0.0) {
      bool found = false;
      for (std::size_t r = 0; r < std::min(need, slate.items.size()); ++r)
        if (slate.items[r] == star) found = true;
      if (found) hits += 1.0;
    } else {
      nobuy += 1.0;
      if (picked == kNoBuy) hits += 1.0;
    }
  }
  MetricReport expect;
  expect.k = k;
  expect.utility = utility / n;
  expect.revenue = revenue / n;
  expect.welfare = expect.utility + expect.revenue;
  expect.sales = sales / n;
  expect.precision = hits / n;
  expect.n_nobuy_users = nobuy;
  return expect;
}

void check_close(const MetricReport& got, const MetricReport& expect) {
  CHECK(got.welfare == doctest::Approx(expect.welfare).epsilon(1e-13));
  CHECK(got.utility == doctest::Approx(expect.utility).epsilon(1e-13));
  CHECK(got.revenue == doctest::Approx(expect.revenue).epsilon(1e-13));
  CHECK(got.sales == doctest::Approx(expect.sales).epsilon(1e-13));
  CHECK(got.precision == doctest::Approx(expect.precision).epsilon(1e-13));
  CHECK(got.n_nobuy_users == doctest::Approx(expect.n_nobuy_users).epsilon(1e-13));
}

}  // namespace

TEST_CASE("the deterministic shopper picks the best positive-utility item") {
  const LatentWorld world = hand_world();

  ChoiceOutcome outcome = eval_choice(world, 0, {0, 1, 2});
  CHECK(outcome.item == 0);
  CHECK(outcome.utility == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(outcome.price == doctest::Approx(1.0).epsilon(1e-14));

  // Utilities {3, 1}: the larger utility wins even at the higher price.
  const LatentWorld duo = line_world({10.0, 3.0}, {7.0, 2.0});
  outcome = eval_choice(duo, 0, {0, 1});
  CHECK(outcome.item == 0);
  CHECK(outcome.utility == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(outcome.price == doctest::Approx(7.0).epsilon(1e-14));

  // All options negative: walk away with exactly (0, 0).
  outcome = eval_choice(world, 0, {1, 2});
  CHECK(outcome.item == kNoBuy);
  CHECK(outcome.utility == 0.0);
  CHECK(outcome.price == 0.0);

  // Empty slate and an exact-zero utility both mean no purchase.
  CHECK(eval_choice(world, 0, {}).item == kNoBuy);
  const LatentWorld zero = line_world({4.0}, {4.0});
  CHECK(eval_choice(zero, 0, {0}).item == kNoBuy);

  // Equal utilities: the lower id wins regardless of slate order.
  const LatentWorld twins = line_world({5.0, 5.0}, {2.0, 2.0});
  CHECK(eval_choice(twins, 0, {1, 0}).item == 0);

  CHECK_THROWS_AS(eval_choice(world, 0, {99}), std::out_of_range);
}

TEST_CASE("metrics on a two-user world match hand arithmetic") {
  const LatentWorld world = hand_world();
  const std::vector<SlateSpec> slates = {make_slate(0, {2, 0, 1}), make_slate(1, {0, 2, 1})};

  // k=1: user 0 sees only the losing item 2 and walks; user 1 buys item 0.
  MetricReport r1 = compute_metrics(world, slates, 1);
  CHECK(r1.method == Method::kRumMf);
  CHECK(r1.objective == VpsObjective::kWelfare);
  CHECK(r1.k == 1);
  CHECK(r1.n_runs == 1);
  CHECK(r1.welfare == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r1.utility == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(r1.revenue == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r1.sales == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r1.precision == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r1.n_nobuy_users == 0.0);
  CHECK(r1.std_welfare == 0.0);

  // k=2: item 0 enters both prefixes, both users buy it.
  MetricReport r2 = compute_metrics(world, slates, 2);
  CHECK(r2.welfare == doctest::Approx(4.5).epsilon(1e-14));
  CHECK(r2.utility == doctest::Approx(3.5).epsilon(1e-14));
  CHECK(r2.revenue == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.sales == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.precision == doctest::Approx(1.0).epsilon(1e-14));

  // k=3 adds only a negative-utility item; nothing moves.
  MetricReport r3 = compute_metrics(world, slates, 3);
  check_close(r3, r2);

  // A k past the catalog evaluates the full slate.
  MetricReport r9 = compute_metrics(world, slates, 9);
  check_close(r9, r2);
}

TEST_CASE("metrics agree with brute-force enumeration on random worlds") {
  EnvConfig config;
  config.nb_users = 15;
  config.nb_prods = 8;
  config.dimension = 2;
  config.seed = 99;
  const LatentWorld world = generate_world(config);

  Rng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SlateSpec> slates;
    for (UserId u = 0; u < config.nb_users; ++u) {
      std::vector<ItemId> items = rng.sample_without_replacement(8, 8);
      rng.shuffle(items);
      slates.push_back(make_slate(u, items));
    }
    for (int k : {1, 2, 3, 5, 8}) {
      const MetricReport got = compute_metrics(world, slates, k);
      check_close(got, brute_metrics(world, slates, k));
      CHECK(got.welfare == got.utility + got.revenue);
    }
  }
}

TEST_CASE("with all prices zero, welfare reduces to utility") {
  EnvConfig config;
  config.nb_users = 10;
  config.nb_prods = 6;
  config.dimension = 2;
  config.seed = 7;
  LatentWorld world = generate_world(config);
  world.prices.setZero();

  std::vector<SlateSpec> slates;
  for (UserId u = 0; u < config.nb_users; ++u)
    slates.push_back(make_slate(u, {0, 1, 2, 3, 4, 5}));
  const MetricReport report = compute_metrics(world, slates, 3);
  CHECK(report.revenue == 0.0);
  CHECK(report.welfare == report.utility);
}

TEST_CASE("utility, sales and precision cannot drop as the slate grows") {
  EnvConfig config;
  config.nb_users = 25;
  config.nb_prods = 10;
  config.dimension = 3;
  config.seed = 31;
  const LatentWorld world = generate_world(config);

  Rng rng(8);
  std::vector<SlateSpec> slates;
  for (UserId u = 0; u < config.nb_users; ++u) {
    std::vector<ItemId> items = rng.sample_without_replacement(10, 10);
    rng.shuffle(items);
    slates.push_back(make_slate(u, items));
  }
  MetricReport prev = compute_metrics(world, slates, 1);
  for (int k = 2; k <= 10; ++k) {
    const MetricReport cur = compute_metrics(world, slates, k);
    CHECK(cur.utility >= prev.utility - 1e-12);
    CHECK(cur.sales >= prev.sales - 1e-12);
    CHECK(cur.precision >= prev.precision - 1e-12);
    prev = cur;
  }
}

TEST_CASE("no slate beats the utility oracle on realized utility") {
  EnvConfig config;
  config.nb_users = 30;
  config.nb_prods = 12;
  config.dimension = 3;
  config.seed = 53;
  const LatentWorld world = generate_world(config);

  Rng rng(19);
  ModelParams params = make_params(Family::kRumMf, config.nb_users, config.nb_prods, 3);
  for (int r = 0; r < params.X.rows(); ++r)
    for (int c = 0; c < 3; ++c) params.X(r, c) = rng.normal(0.0, 1.0);
  for (int r = 0; r < params.Y.rows(); ++r)
    for (int c = 0; c < 3; ++c) params.Y(r, c) = rng.normal(0.0, 1.0);

  for (int k : {1, 3, 12}) {
    std::vector<SlateSpec> oracle, welfare_oracle, model;
    for (UserId u = 0; u < config.nb_users; ++u) {
      oracle.push_back(oracle_slate(world, u, k, VpsObjective::kUtility));
      welfare_oracle.push_back(oracle_slate(world, u, k, VpsObjective::kWelfare));
      model.push_back(model_slate(params, u, world.prices, VpsObjective::kVolume, k));
    }
    const double bound = compute_metrics(world, oracle, k).utility;
    CHECK(compute_metrics(world, welfare_oracle, k).utility <= bound + 1e-12);
    CHECK(compute_metrics(world, model, k).utility <= bound + 1e-12);
  }
}

TEST_CASE("metric evaluation rejects malformed slate sets") {
  const LatentWorld world = hand_world();
  const std::vector<SlateSpec> good = {make_slate(0, {0, 1, 2}), make_slate(1, {0, 1, 2})};
  CHECK_THROWS_AS(compute_metrics(world, good, 0), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics(world, {}, 1), std::invalid_argument);
  // user 1 missing
  CHECK_THROWS_AS(compute_metrics(world, {make_slate(0, {0, 1, 2})}, 1), std::invalid_argument);
  // user 0 twice
  CHECK_THROWS_AS(
      compute_metrics(world, {make_slate(0, {0}), make_slate(0, {1}), make_slate(1, {0})}, 1),
      std::invalid_argument);
  // slate shorter than min(k, catalog)
  CHECK_THROWS_AS(compute_metrics(world, {make_slate(0, {0}), make_slate(1, {0, 1})}, 2),
                  std::invalid_argument);
  // unknown user id
  CHECK_THROWS_AS(compute_metrics(world, {make_slate(0, {0}), make_slate(5, {0})}, 1),
                  std::out_of_range);
}

TEST_CASE("aggregation means and sample deviations across runs") {
  MetricReport a;
  a.method = Method::kMfSm;
  a.objective = VpsObjective::kRevenue;
  a.k = 5;
  a.welfare = 3.0;
  a.utility = 1.0;
  a.revenue = 2.0;
  a.sales = 0.5;
  a.precision = 0.25;
  a.n_nobuy_users = 2.0;
  MetricReport b = a;
  b.welfare = 5.0;
  b.utility = 2.0;
  b.revenue = 3.0;
  b.sales = 1.0;
  b.precision = 0.75;
  b.n_nobuy_users = 4.0;

  const MetricReport agg = aggregate_reports({a, b});
  CHECK(agg.method == Method::kMfSm);
  CHECK(agg.objective == VpsObjective::kRevenue);
  CHECK(agg.k == 5);
  CHECK(agg.n_runs == 2);
  CHECK(agg.welfare == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(agg.utility == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(agg.revenue == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(agg.sales == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(agg.precision == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(agg.n_nobuy_users == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(agg.std_welfare == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(agg.std_utility == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(agg.std_revenue == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(agg.std_sales == doctest::Approx(std::sqrt(0.125)).epsilon(1e-14));
  CHECK(agg.std_precision == doctest::Approx(std::sqrt(0.125)).epsilon(1e-14));

  const MetricReport solo = aggregate_reports({a});
  CHECK(solo.n_runs == 1);
  CHECK(solo.welfare == 3.0);
  CHECK(solo.std_welfare == 0.0);

  MetricReport other_k = b;
  other_k.k = 1;
  CHECK_THROWS_AS(aggregate_reports({a, other_k}), std::invalid_argument);
  MetricReport other_method = b;
  other_method.method = Method::kRumMf;
  CHECK_THROWS_AS(aggregate_reports({a, other_method}), std::invalid_argument);
  MetricReport other_objective = b;
  other_objective.objective = VpsObjective::kVolume;
  CHECK_THROWS_AS(aggregate_reports({a, other_objective}), std::invalid_argument);
  CHECK_THROWS_AS(aggregate_reports({}), std::invalid_argument);
}
