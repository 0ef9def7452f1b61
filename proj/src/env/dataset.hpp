#pragma once

#include <string>

#include "core/mat.hpp"

namespace deterra::env {

/// Offline transition tuples (s, a, r, c_agg, c_per_user, s'). Binary layout:
/// a fixed header {magic, version, state_dim, action_dim, num_ue, count,
/// env_hash} of little-endian u64, followed by count fixed-width records of
/// little-endian float64.
struct TransitionDataset {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::size_t num_ue = 0;
  std::uint64_t env_hash = 0;

  Mat states;
  Mat actions;
  Vec rewards;
  Vec costs;
  Mat cost_per_user;
  Mat next_states;

  std::size_t count() const { return states.rows(); }
};

void save_dataset(const TransitionDataset& ds, const std::string& path);
TransitionDataset load_dataset(const std::string& path);

/// CSV export with header s_0..s_{S-1},a_0..a_{A-1},reward,cost,sp_0..sp_{S-1}.
void save_dataset_csv(const TransitionDataset& ds, const std::string& path);

}  // namespace deterra::env
