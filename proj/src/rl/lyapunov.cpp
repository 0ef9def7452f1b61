#include "rl/lyapunov.hpp"

#include <limits>

#include "rl/policy.hpp"

namespace deterra::rl {

Vec lyapunov_action(const Vec& state_raw, const nn::Regressor& reward_model,
                    const nn::Regressor& cost_model, double virtual_queue,
                    std::size_t action_dim, const LyapunovConfig& cfg, math::SeededRng& rng) {
  Mat xs(cfg.candidates, state_raw.size() + action_dim);
  std::vector<Vec> candidates(cfg.candidates);
  for (std::size_t c = 0; c < cfg.candidates; ++c) {
    candidates[c] = behavior_policy_uniform(action_dim, rng);
    Vec row = state_raw;
    row.insert(row.end(), candidates[c].begin(), candidates[c].end());
    xs.set_row(c, row);
  }
  const Vec r_hat = reward_model.predict_batch(xs);
  const Vec c_hat = cost_model.predict_batch(xs);
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cfg.candidates; ++c) {
    const double score = -r_hat[c] * cfg.reward_scale +
                         cfg.penalty_weight * virtual_queue *
                             (c_hat[c] - cfg.cost_threshold);
    if (score < best_score) {
      best_score = score;
      best = c;
    }
  }
  return candidates[best];
}

double lyapunov_queue_update(double virtual_queue, double observed_cost, double threshold) {
  return std::max(virtual_queue + observed_cost - threshold, 0.0);
}

}  // namespace deterra::rl
