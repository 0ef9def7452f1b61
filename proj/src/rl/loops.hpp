#pragma once

#include <functional>

#include "core/cmdp.hpp"
#include "rl/ppo.hpp"

namespace deterra::rl {

struct TrainPoint {
  std::size_t episode = 0;
  double reward_mean = 0.0;  // mean per-slot reward, raw units
  double cost_mean = 0.0;    // mean per-slot aggregated cost
  double lambda = 0.0;
};

struct TrainResult {
  std::vector<TrainPoint> curve;
  DualState dual;
};

struct TrainLoopOptions {
  std::size_t episodes = 100;
  PpoConfig ppo;
  std::uint64_t seed = 0;
  bool zero_cost_stream = false;  // feeds zero cost to the learner (tests)
  std::size_t checkpoint_interval = 0;
  std::function<void(std::size_t, const Policy&, const TrainResult&)> checkpoint_cb;
};

/// Alternates rollout collection, clipped-surrogate updates, and projected
/// dual ascent (once per batch, on the batch-mean single-slot cost). The
/// policy/value nets are updated in place so a pretrained policy warm-starts
/// fine-tuning. Deterministic given the seed.
TrainResult train_loop(Cmdp& cmdp, Policy& policy, ValueNet& value_r, ValueNet& value_c,
                       const TrainLoopOptions& opt);

struct EvalStats {
  double ee_mean = 0.0;   // bits per joule (falls back to mean reward when
  double ee_std = 0.0;    // the environment reports no energy)
  double viol_mean = 0.0; // episode delay-violation rate
  double viol_std = 0.0;
};

/// Monte Carlo policy evaluation; stochastic actions by default, tanh(mean)
/// when deterministic_actions is set.
EvalStats evaluate_policy(Cmdp& cmdp, const Policy& policy, std::size_t episodes,
                          math::SeededRng& rng, bool deterministic_actions = false);

/// Fits the policy's state scaler from a short uniform-action warmup so the
/// torso sees inputs in [-1, 1]; deterministic given the seed.
void fit_state_scaler(Cmdp& cmdp, Policy& policy, std::size_t warmup_steps,
                      std::uint64_t seed);

}  // namespace deterra::rl
