#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace welrec {

// Row-major to match per-row access (user/item embeddings) and the on-disk
// row-major array layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using UserId = int;
using ItemId = int;

/// The outside option: leave without buying. Utility 0 by definition.
inline constexpr ItemId kNoBuy = -1;

}  // namespace welrec
