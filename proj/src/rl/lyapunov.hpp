#pragma once

#include "nn/regressor.hpp"
#include "mathcore/rng.hpp"

namespace deterra::rl {

struct LyapunovConfig {
  std::size_t candidates = 200;
  double penalty_weight = 10.0;   // V_w
  double cost_threshold = 0.005;  // d
  double reward_scale = 1e-6;     // puts predicted reward on a per-Mbit scale
};

/// Drift-plus-penalty action selection: draw uniform candidates, score each
/// as -r_hat + V_w * Z * (c_hat - d), pick the argmin (ties keep the lowest
/// index).
Vec lyapunov_action(const Vec& state_raw, const nn::Regressor& reward_model,
                    const nn::Regressor& cost_model, double virtual_queue,
                    std::size_t action_dim, const LyapunovConfig& cfg, math::SeededRng& rng);

/// Virtual-queue update after observing the real per-slot cost:
/// Z' = max(Z + c - d, 0).
double lyapunov_queue_update(double virtual_queue, double observed_cost, double threshold);

}  // namespace deterra::rl
