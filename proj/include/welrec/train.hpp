#pragma once

#include "welrec/model.hpp"
#include "welrec/sim.hpp"
#include "welrec/types.hpp"

#include <cstdint>
#include <vector>

namespace welrec {

struct TrainConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double l2_weight = 1e-3;  ///< lambda of the L2 penalty on touched embedding rows
  // Epoch and batch defaults are tuned for the medium presets: long enough
  // that rum-mf's WTP estimates separate from the price-only ranking mf-sm
  // degenerates to, short enough that sigma(score) stays off its saturated
  // tails, where every eVPS objective collapses into value-only ranking.
  int epochs = 40;
  int batch = 512;  ///< events per gradient step
  std::uint64_t seed = 1;

  void validate() const;
};

/// Sparse gradient: touched rows of X and Y, touched entries of rho.
struct SparseGrad {
  std::vector<std::pair<UserId, Vector>> x_rows;
  std::vector<std::pair<ItemId, Vector>> y_rows;
  std::vector<std::pair<UserId, double>> rho_entries;
};

/// Adam moment accumulators, one pair per parameter block, one shared step
/// count. Moments advance only on touched rows (sparse Adam).
struct AdamState {
  Matrix m_x, v_x;
  Matrix m_y, v_y;
  Vector m_rho, v_rho;
  long t = 0;

  static AdamState zeros_like(const ModelParams& params);
};

/// Negative log-likelihood of one event under the given family (data term
/// only, no regularizer). Categorical families score the exposed set plus
/// no-buy; kMfPclick sums independent Bernoulli losses over exposed items.
/// Throws if the event's choice is not in its decision set.
double event_loss(const ModelParams& params, const SessionEvent& event,
                  const Eigen::Ref<const Vector>& prices);

/// Sum of squared norms of the embedding rows the event touches (the user's
/// X row and the exposed items' Y rows); rho is unregularized.
double event_l2_penalty(const ModelParams& params, const SessionEvent& event);

/// Analytic gradient of event_loss + l2_weight * event_l2_penalty over the
/// touched rows.
SparseGrad event_grad(const ModelParams& params, const SessionEvent& event,
                      const Eigen::Ref<const Vector>& prices, double l2_weight);

/// Bias-corrected Adam update of the touched rows only. Throws on a
/// non-finite gradient.
void adam_step(ModelParams& params, const SparseGrad& grad, AdamState& state,
               const TrainConfig& cfg);

struct EpochLoss {
  double mean_nll = 0.0;
  double reg_term = 0.0;  ///< mean l2_weight * event_l2_penalty
};

struct FitResult {
  ModelParams params;
  std::vector<EpochLoss> trace;  ///< one entry per epoch
};

/// Minibatch Adam over shuffled epochs. Embeddings start i.i.d. N(0, 0.01),
/// rho starts at 0; batch gradients are means of event gradients. Warns on
/// stderr if the epoch mean loss rises by more than 5%.
/// Deterministic given (events, cfg). Throws on an empty event log.
FitResult fit(const std::vector<SessionEvent>& events,
              const Eigen::Ref<const Vector>& prices, Family family,
              int nb_users, int nb_prods, int dim, const TrainConfig& cfg);

}  // namespace welrec
