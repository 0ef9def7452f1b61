#pragma once

#include "rl/buffer.hpp"
#include "rl/policy.hpp"

namespace deterra::rl {

struct PpoConfig {
  double gamma = 0.9;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;       // varsigma
  std::size_t update_epochs = 10;
  std::size_t minibatch = 0;     // 0 -> full batch
  std::size_t episodes_per_update = 4;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  double dual_lr = 0.1;          // alpha_lambda
  double initial_dual = 30.0;    // lambda_0
  double cost_threshold = 0.005; // d
  double entropy_coef = 0.0;
  double reward_scale = 1.0;     // applied to rewards entering the learner
  double max_grad_norm = 10.0;
};

/// Non-negative Lagrange multiplier.
struct DualState {
  double lambda = 0.0;
};

/// Projected ascent: lambda <- max(lambda + alpha (V_c - d), 0).
DualState dual_update(DualState dual, double measured_cost_mean, const PpoConfig& cfg);

struct PpoDiagnostics {
  double policy_loss = 0.0;
  double value_loss_reward = 0.0;
  double value_loss_cost = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

struct PpoOptimizer {
  nn::AdamState policy_adam;
  nn::AdamState value_r_adam;
  nn::AdamState value_c_adam;
  PpoOptimizer(const Policy& p, const ValueNet& vr, const ValueNet& vc)
      : policy_adam(p.params.size()),
        value_r_adam(vr.params.size()),
        value_c_adam(vc.params.size()) {}
};

/// Clipped-surrogate update on the multiplier-combined advantage
/// A = A_r - lambda A_c (normalized after combination), plus MSE regression
/// of both value heads onto their return targets. Throws on non-finite loss.
void ppo_update(Policy& policy, ValueNet& value_r, ValueNet& value_c, PpoOptimizer& opt,
                const RolloutBuffer& buf, const DualState& dual, const PpoConfig& cfg,
                math::SeededRng& rng, PpoDiagnostics* diag = nullptr);

}  // namespace deterra::rl
