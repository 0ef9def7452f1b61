#pragma once

#include "nn/mlp.hpp"
#include "nn/scaler.hpp"

namespace deterra::rl {

/// Diagonal-Gaussian policy with tanh squashing: an MLP torso feeds a linear
/// action-mean head; the log-std vector is state-independent and clamped to
/// [-5, 1]. Outputs live strictly inside (-1, 1).
struct PolicySpec {
  std::vector<std::size_t> torso_widths{64, 64};
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double init_log_std = -0.5;

  nn::MlpSpec mlp_spec() const;  // state -> action mean (linear output)
};

struct Policy {
  PolicySpec spec;
  nn::ParamVector params;   // torso+head weights, then "log_std" segment
  nn::Scaler state_scaler;  // raw state -> network input

  std::size_t log_std_segment() const { return params.num_segments() - 1; }
};

Policy policy_init(const PolicySpec& spec, math::SeededRng& rng);

struct ActSample {
  Vec raw_action;   // tanh-squashed, in (-1,1)^dim
  Vec pre_tanh;     // the Gaussian draw before squashing
  double log_prob;  // includes the tanh change-of-variables term
};

/// Samples an action for a raw (unscaled) state; deterministic mode returns
/// tanh(mean).
ActSample policy_act(const Policy& policy, const Vec& state_raw, math::SeededRng& rng,
                     bool deterministic = false);

/// Log-prob of stored pre-tanh actions under the current parameters, batched;
/// also returns per-sample entropy of the unsquashed Gaussian.
void policy_log_prob(const Policy& policy, const Mat& states_scaled, const Mat& pre_tanh,
                     Vec* log_probs, Vec* entropies, nn::MlpCache* cache, Mat* means_out);

double clamp_log_std(double v);

/// Value estimator: one MLP per stream (reward value and cost value are kept
/// in separate networks so a zero multiplier leaves the policy path bitwise
/// untouched by the cost machinery).
struct ValueNet {
  nn::MlpSpec spec;
  nn::ParamVector params;
};

ValueNet value_init(std::size_t state_dim, const std::vector<std::size_t>& widths,
                    math::SeededRng& rng);
double value_eval(const ValueNet& v, const Vec& state_scaled);
Vec value_eval_batch(const ValueNet& v, const Mat& states_scaled);

/// Uniform random behavior policy on (-1,1)^dim.
Vec behavior_policy_uniform(std::size_t action_dim, math::SeededRng& rng);

void save_policy(const Policy& policy, const std::string& path, std::uint64_t env_hash);
Policy load_policy(const std::string& path, std::uint64_t* env_hash_out);

}  // namespace deterra::rl
