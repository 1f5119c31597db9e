#pragma once

#include "welrec/metrics.hpp"
#include "welrec/model.hpp"
#include "welrec/sim.hpp"
#include "welrec/slate.hpp"
#include "welrec/train.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace welrec {

/// Shortest exact decimal form of a double ("%.17g" trimmed by round-trip).
std::string format_double(double value);

/// World snapshot: {config, user_vecs, item_vecs, prices, kappa_true} with
/// row-major flat arrays.
void save_world(const LatentWorld& world, const std::string& path);
LatentWorld load_world(const std::string& path);

/// Event log CSV, header `user,session,exposed,choice`; `exposed` is a
/// `;`-separated id list and `choice` is an id or the literal NOBUY.
void save_events(const std::vector<SessionEvent>& events, const std::string& path);
std::vector<SessionEvent> load_events(const std::string& path);

/// Checkpoint: {family, d, X, Y, rho} with row-major flat arrays.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

/// Loss trace CSV, header `epoch,mean_nll,reg_term`, epochs numbered from 1.
void save_loss_trace(const std::vector<EpochLoss>& trace, const std::string& path);

/// Slate dump CSV, header `user,method,objective,k,rank,item,evps`,
/// ranks numbered from 1.
void save_slates(const std::vector<SlateSpec>& slates, const std::string& path);

/// Metric table CSV. A row per report; `seeds` adds a leading `seed` column
/// and must then be parallel to `reports`.
void save_metrics(const std::vector<MetricReport>& reports, const std::string& path,
                  const std::vector<std::uint64_t>* seeds = nullptr);

}  // namespace welrec
