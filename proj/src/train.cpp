#include "welrec/train.hpp"

#include "welrec/numeric.hpp"
#include "welrec/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace welrec {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw std::invalid_argument("TrainConfig: beta1 must be in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::invalid_argument("TrainConfig: beta2 must be in (0,1)");
  if (!(eps_adam > 0.0)) throw std::invalid_argument("TrainConfig: eps_adam must be > 0");
  if (l2_weight < 0.0) throw std::invalid_argument("TrainConfig: l2_weight must be >= 0");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
}

AdamState AdamState::zeros_like(const ModelParams& p) {
  AdamState s;
  s.m_x = Matrix::Zero(p.X.rows(), p.X.cols());
  s.v_x = Matrix::Zero(p.X.rows(), p.X.cols());
  s.m_y = Matrix::Zero(p.Y.rows(), p.Y.cols());
  s.v_y = Matrix::Zero(p.Y.rows(), p.Y.cols());
  s.m_rho = Vector::Zero(p.rho.size());
  s.v_rho = Vector::Zero(p.rho.size());
  return s;
}

namespace {

// Scores over exposed + no-buy (appended last).
Vector decision_scores(const ModelParams& params, const SessionEvent& event,
                       const Eigen::Ref<const Vector>& prices) {
  const auto n = static_cast<Eigen::Index>(event.exposed.size());
  Vector scores(n + 1);
  for (Eigen::Index a = 0; a < n; ++a) {
    const ItemId item = event.exposed[static_cast<std::size_t>(a)];
    scores[a] = params.score(event.user, item, prices[item]);
  }
  scores[n] = 0.0;
  return scores;
}

Eigen::Index choice_position(const SessionEvent& event) {
  if (event.choice == kNoBuy) return static_cast<Eigen::Index>(event.exposed.size());
  const auto it = std::find(event.exposed.begin(), event.exposed.end(), event.choice);
  if (it == event.exposed.end()) {
    throw std::invalid_argument("event choice " + std::to_string(event.choice) +
                                " is not in the decision set");
  }
  return static_cast<Eigen::Index>(it - event.exposed.begin());
}

}  // namespace

double event_loss(const ModelParams& params, const SessionEvent& event,
                  const Eigen::Ref<const Vector>& prices) {
  if (params.family == Family::kMfPclick) {
    const auto pos = choice_position(event);  // validates the choice
    (void)pos;
    double loss = 0.0;
    for (const ItemId item : event.exposed) {
      const double z = params.X.row(event.user).dot(params.Y.row(item));
      const double y = (item == event.choice) ? 1.0 : 0.0;
      loss += softplus(z) - y * z;  // -[y log q + (1-y) log(1-q)], q = sigmoid(z)
    }
    return loss;
  }
  const Vector scores = decision_scores(params, event, prices);
  return log_sum_exp(scores) - scores[choice_position(event)];
}

double event_l2_penalty(const ModelParams& params, const SessionEvent& event) {
  if (event.exposed.empty()) return 0.0;
  double penalty = params.X.row(event.user).squaredNorm();
  for (const ItemId item : event.exposed) {
    penalty += params.Y.row(item).squaredNorm();
  }
  // rho is penalized too: near-deterministic logs leave the score scale
  // unidentified, and the likelihood alone can drift kappa arbitrarily far
  // from the unit noise scale the scores are measured against. Anchoring
  // rho at 0 pins that scale, which predict_wtp depends on.
  if (params.family == Family::kRumMf) penalty += params.rho[event.user] * params.rho[event.user];
  return penalty;
}

SparseGrad event_grad(const ModelParams& params, const SessionEvent& event,
                      const Eigen::Ref<const Vector>& prices, double l2_weight) {
  SparseGrad grad;
  if (event.exposed.empty()) {
    choice_position(event);  // still validates the choice
    return grad;
  }
  const UserId user = event.user;
  const int d = params.dim();
  Vector gx = Vector::Zero(d);

  if (params.family == Family::kMfPclick) {
    choice_position(event);
    for (const ItemId item : event.exposed) {
      const double z = params.X.row(user).dot(params.Y.row(item));
      const double y = (item == event.choice) ? 1.0 : 0.0;
      const double coeff = sigmoid(z) - y;
      gx += coeff * params.Y.row(item).transpose();
      grad.y_rows.emplace_back(item, Vector(coeff * params.X.row(user).transpose() +
                                            2.0 * l2_weight * params.Y.row(item).transpose()));
    }
  } else {
    const Vector probs = softmax(decision_scores(params, event, prices));
    const Eigen::Index chosen = choice_position(event);
    double grho = 0.0;
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(event.exposed.size()); ++a) {
      const ItemId item = event.exposed[static_cast<std::size_t>(a)];
      const double coeff = probs[a] - (a == chosen ? 1.0 : 0.0);
      gx += coeff * params.Y.row(item).transpose();
      grad.y_rows.emplace_back(item, Vector(coeff * params.X.row(user).transpose() +
                                            2.0 * l2_weight * params.Y.row(item).transpose()));
      if (params.family == Family::kRumMf) {
        grho += coeff * (-params.kappa(user) * prices[item]);
      }
    }
    // the no-buy alternative has no parameters: its coefficient drops out
    if (params.family == Family::kRumMf) {
      grad.rho_entries.emplace_back(user, grho + 2.0 * l2_weight * params.rho[user]);
    }
  }
  gx += 2.0 * l2_weight * params.X.row(user).transpose();
  grad.x_rows.emplace_back(user, std::move(gx));
  return grad;
}

namespace {

void adam_update_row(Matrix& theta, Matrix& m, Matrix& v, int row, const Vector& g,
                     long t, const TrainConfig& cfg) {
  if (!g.allFinite()) {
    throw std::runtime_error("adam_step: non-finite gradient (row " + std::to_string(row) +
                             ", step " + std::to_string(t) + ")");
  }
  const Eigen::ArrayXd ga = g.array();
  const Eigen::ArrayXd mr = cfg.beta1 * m.row(row).transpose().array() + (1.0 - cfg.beta1) * ga;
  const Eigen::ArrayXd vr =
      cfg.beta2 * v.row(row).transpose().array() + (1.0 - cfg.beta2) * ga.square();
  m.row(row) = mr.matrix().transpose();
  v.row(row) = vr.matrix().transpose();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  theta.row(row) -=
      (cfg.learning_rate * (mr / c1) / ((vr / c2).sqrt() + cfg.eps_adam)).matrix().transpose();
}

void adam_update_scalar(double& theta, double& m, double& v, double g, long t,
                        const TrainConfig& cfg) {
  if (!std::isfinite(g)) {
    throw std::runtime_error("adam_step: non-finite gradient (step " + std::to_string(t) + ")");
  }
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  theta -= cfg.learning_rate * (m / c1) / (std::sqrt(v / c2) + cfg.eps_adam);
}

}  // namespace

void adam_step(ModelParams& params, const SparseGrad& grad, AdamState& state,
               const TrainConfig& cfg) {
  state.t += 1;
  for (const auto& [row, g] : grad.x_rows) {
    adam_update_row(params.X, state.m_x, state.v_x, row, g, state.t, cfg);
  }
  for (const auto& [row, g] : grad.y_rows) {
    adam_update_row(params.Y, state.m_y, state.v_y, row, g, state.t, cfg);
  }
  for (const auto& [row, g] : grad.rho_entries) {
    adam_update_scalar(params.rho[row], state.m_rho[row], state.v_rho[row], g, state.t, cfg);
  }
}

namespace {

// Merges event gradients in event order, flushes rows in ascending id order;
// both orders are fixed, so accumulation is deterministic.
struct GradAccumulator {
  std::map<UserId, Vector> x;
  std::map<ItemId, Vector> y;
  std::map<UserId, double> rho;

  void add(const SparseGrad& g) {
    for (const auto& [row, vec] : g.x_rows) {
      auto [it, fresh] = x.try_emplace(row, vec);
      if (!fresh) it->second += vec;
    }
    for (const auto& [row, vec] : g.y_rows) {
      auto [it, fresh] = y.try_emplace(row, vec);
      if (!fresh) it->second += vec;
    }
    for (const auto& [row, val] : g.rho_entries) {
      rho[row] += val;
    }
  }

  SparseGrad mean(double inv_count) const {
    SparseGrad out;
    out.x_rows.reserve(x.size());
    out.y_rows.reserve(y.size());
    out.rho_entries.reserve(rho.size());
    for (const auto& [row, vec] : x) out.x_rows.emplace_back(row, Vector(vec * inv_count));
    for (const auto& [row, vec] : y) out.y_rows.emplace_back(row, Vector(vec * inv_count));
    for (const auto& [row, val] : rho) out.rho_entries.emplace_back(row, val * inv_count);
    return out;
  }
};

}  // namespace

FitResult fit(const std::vector<SessionEvent>& events,
              const Eigen::Ref<const Vector>& prices, Family family,
              int nb_users, int nb_prods, int dim, const TrainConfig& cfg) {
  cfg.validate();
  if (events.empty()) throw std::invalid_argument("fit: empty event log");

  ModelParams params = make_params(family, nb_users, nb_prods, dim);
  Rng init_rng(derive_seed(cfg.seed, 0));
  for (int i = 0; i < nb_users; ++i) {
    for (int c = 0; c < dim; ++c) params.X(i, c) = init_rng.normal(0.0, 0.1);
  }
  for (int j = 0; j < nb_prods; ++j) {
    for (int c = 0; c < dim; ++c) params.Y(j, c) = init_rng.normal(0.0, 0.1);
  }

  AdamState state = AdamState::zeros_like(params);
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  FitResult result;
  result.trace.reserve(static_cast<std::size_t>(cfg.epochs));
  const double n_events = static_cast<double>(events.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double nll_sum = 0.0;
    double reg_sum = 0.0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      const std::size_t batch_end = std::min(pos + static_cast<std::size_t>(cfg.batch), order.size());
      GradAccumulator acc;
      for (std::size_t b = pos; b < batch_end; ++b) {
        const SessionEvent& ev = events[order[b]];
        nll_sum += event_loss(params, ev, prices);
        reg_sum += cfg.l2_weight * event_l2_penalty(params, ev);
        acc.add(event_grad(params, ev, prices, cfg.l2_weight));
      }
      adam_step(params, acc.mean(1.0 / static_cast<double>(batch_end - pos)), state, cfg);
      pos = batch_end;
    }
    EpochLoss el{nll_sum / n_events, reg_sum / n_events};
    if (!result.trace.empty() && el.mean_nll > result.trace.back().mean_nll * 1.05) {
      std::fprintf(stderr, "warning: fit(%s) epoch %d mean loss rose %.6f -> %.6f\n",
                   to_string(family).c_str(), epoch, result.trace.back().mean_nll, el.mean_nll);
    }
    result.trace.push_back(el);
  }
  if (!params.X.allFinite() || !params.Y.allFinite() || !params.rho.allFinite()) {
    throw std::runtime_error("fit: non-finite parameters after training");
  }
  result.params = std::move(params);
  return result;
}

}  // namespace welrec
