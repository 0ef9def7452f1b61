#pragma once

#include "core/mat.hpp"

namespace deterra::rl {

/// Episode-aligned on-policy storage for one PPO update batch.
struct RolloutBuffer {
  Mat states_scaled;  // capacity x state_dim
  Mat pre_tanh;       // capacity x action_dim
  Vec log_probs;
  Vec rewards;        // already scaled for learning
  Vec costs;
  Vec reward_values;  // V_r(s_t)
  Vec cost_values;    // V_c(s_t)
  std::vector<int> dones;

  std::size_t size = 0;

  RolloutBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);
  std::size_t capacity() const { return dones.size(); }
  bool full() const { return size == capacity(); }
  void clear() { size = 0; }
  void push(const Vec& state_scaled, const Vec& pre_tanh_action, double log_prob, double reward,
            double cost, double v_r, double v_c, bool done);
};

struct GaeResult {
  Vec reward_adv;
  Vec cost_adv;
  Vec reward_returns;  // targets for the reward value head
  Vec cost_returns;
};

/// Backward GAE recursion per stream:
///   delta_t = r_t + gamma V(s_{t+1}) (1-done) - V(s_t)
///   A_t = delta_t + gamma lam (1-done) A_{t+1}
/// Episode ends bootstrap with zero. Advantages come back raw; the update
/// normalizes after the multiplier combination.
GaeResult gae(const RolloutBuffer& buf, double gamma, double lam);

}  // namespace deterra::rl
