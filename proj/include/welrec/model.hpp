#pragma once

#include "welrec/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace welrec {

/// The three learned model families.
enum class Family {
  kRumMf,    ///< categorical choice over exp(X.Y - kappa_u * price), no-buy score 0
  kMfSm,     ///< price-blind categorical choice over exp(X.Y), no-buy score 0
  kMfPclick  ///< independent Bernoulli conversion per item, sigmoid(X.Y)
};

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Floor applied to learnt price sensitivities when reporting WTP.
inline constexpr double kKappaFloor = 0.1;

/// Learned parameters of one model family.
struct ModelParams {
  Family family = Family::kRumMf;
  Matrix X;    ///< user embeddings, nb_users x d
  Matrix Y;    ///< item embeddings, nb_prods x d
  Vector rho;  ///< per-user log price sensitivity; kappa_u = exp(rho_u) > 0

  int n_users() const { return static_cast<int>(X.rows()); }
  int n_items() const { return static_cast<int>(Y.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }

  double kappa(UserId user) const { return std::exp(rho[user]); }

  /// Model score of an alternative; kNoBuy scores exactly 0.
  /// kRumMf: X.Y - kappa_u * price; kMfSm and kMfPclick: X.Y.
  double score(UserId user, ItemId item, double price) const;
};

/// Fresh parameters: embeddings all zero, rho all zero (kappa = 1).
ModelParams make_params(Family family, int nb_users, int nb_prods, int dim);

/// Choice probabilities over a decision set of item ids plus kNoBuy, aligned
/// with the input order. The decision set must contain kNoBuy; kMfPclick has
/// no categorical likelihood and is rejected.
Vector choice_probs(const ModelParams& params, UserId user,
                    const std::vector<ItemId>& decision_set,
                    const Eigen::Ref<const Vector>& prices);

/// Independent conversion probability sigmoid(X.Y); kMfPclick only.
double pclick_prob(const ModelParams& params, UserId user, ItemId item);

/// Willingness-to-pay estimate. kRumMf: X.Y / max(kappa_u, 0.1);
/// kMfSm: X.Y + price. kMfPclick does not recover WTP and is rejected.
double predict_wtp(const ModelParams& params, UserId user, ItemId item, double price);

/// predict_wtp minus price.
double predicted_utility(const ModelParams& params, UserId user, ItemId item, double price);

}  // namespace welrec
