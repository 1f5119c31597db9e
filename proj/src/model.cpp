#include "welrec/model.hpp"

#include "welrec/numeric.hpp"

#include <algorithm>
#include <stdexcept>

namespace welrec {

std::string to_string(Family family) {
  switch (family) {
    case Family::kRumMf: return "rum-mf";
    case Family::kMfSm: return "mf-sm";
    case Family::kMfPclick: return "mf-pclick";
  }
  throw std::logic_error("bad Family");
}

Family family_from_string(const std::string& name) {
  if (name == "rum-mf") return Family::kRumMf;
  if (name == "mf-sm") return Family::kMfSm;
  if (name == "mf-pclick") return Family::kMfPclick;
  throw std::invalid_argument("unknown model family: " + name);
}

double ModelParams::score(UserId user, ItemId item, double price) const {
  if (item == kNoBuy) return 0.0;
  const double dot = X.row(user).dot(Y.row(item));
  if (family == Family::kRumMf) return dot - kappa(user) * price;
  return dot;
}

ModelParams make_params(Family family, int nb_users, int nb_prods, int dim) {
  ModelParams p;
  p.family = family;
  p.X = Matrix::Zero(nb_users, dim);
  p.Y = Matrix::Zero(nb_prods, dim);
  p.rho = Vector::Zero(nb_users);
  return p;
}

Vector choice_probs(const ModelParams& params, UserId user,
                    const std::vector<ItemId>& decision_set,
                    const Eigen::Ref<const Vector>& prices) {
  if (params.family == Family::kMfPclick) {
    throw std::invalid_argument("choice_probs: mf-pclick has no categorical likelihood");
  }
  if (std::find(decision_set.begin(), decision_set.end(), kNoBuy) == decision_set.end()) {
    throw std::invalid_argument("choice_probs: decision set must contain the no-buy option");
  }
  Vector scores(static_cast<Eigen::Index>(decision_set.size()));
  for (std::size_t a = 0; a < decision_set.size(); ++a) {
    const ItemId item = decision_set[a];
    scores[static_cast<Eigen::Index>(a)] =
        params.score(user, item, item == kNoBuy ? 0.0 : prices[item]);
  }
  return softmax(scores);
}

double pclick_prob(const ModelParams& params, UserId user, ItemId item) {
  if (params.family != Family::kMfPclick) {
    throw std::invalid_argument("pclick_prob: only defined for mf-pclick");
  }
  return sigmoid(params.X.row(user).dot(params.Y.row(item)));
}

double predict_wtp(const ModelParams& params, UserId user, ItemId item, double price) {
  const double dot = params.X.row(user).dot(params.Y.row(item));
  switch (params.family) {
    case Family::kRumMf:
      return dot / std::max(params.kappa(user), kKappaFloor);
    case Family::kMfSm:
      return dot + price;
    case Family::kMfPclick:
      throw std::invalid_argument("predict_wtp: mf-pclick does not recover willingness-to-pay");
  }
  throw std::logic_error("bad Family");
}

double predicted_utility(const ModelParams& params, UserId user, ItemId item, double price) {
  return predict_wtp(params, user, item, price) - price;
}

}  // namespace welrec
