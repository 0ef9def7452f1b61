#include "rl/buffer.hpp"

#include <stdexcept>

namespace deterra::rl {

RolloutBuffer::RolloutBuffer(std::size_t capacity, std::size_t state_dim,
                             std::size_t action_dim)
    : states_scaled(capacity, state_dim),
      pre_tanh(capacity, action_dim),
      log_probs(capacity, 0.0),
      rewards(capacity, 0.0),
      costs(capacity, 0.0),
      reward_values(capacity, 0.0),
      cost_values(capacity, 0.0),
      dones(capacity, 0) {}

void RolloutBuffer::push(const Vec& state_scaled, const Vec& pre_tanh_action, double log_prob,
                         double reward, double cost, double v_r, double v_c, bool done) {
  if (full()) throw std::runtime_error("RolloutBuffer: push past capacity");
  states_scaled.set_row(size, state_scaled);
  pre_tanh.set_row(size, pre_tanh_action);
  log_probs[size] = log_prob;
  rewards[size] = reward;
  costs[size] = cost;
  reward_values[size] = v_r;
  cost_values[size] = v_c;
  dones[size] = done ? 1 : 0;
  ++size;
}

GaeResult gae(const RolloutBuffer& buf, double gamma, double lam) {
  const std::size_t n = buf.size;
  GaeResult out;
  out.reward_adv.assign(n, 0.0);
  out.cost_adv.assign(n, 0.0);
  out.reward_returns.assign(n, 0.0);
  out.cost_returns.assign(n, 0.0);

  double adv_r = 0.0, adv_c = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = buf.dones[t] ? 0.0 : 1.0;
    const double next_vr = (t + 1 < n) ? buf.reward_values[t + 1] : 0.0;
    const double next_vc = (t + 1 < n) ? buf.cost_values[t + 1] : 0.0;
    const double delta_r =
        buf.rewards[t] + gamma * next_vr * not_done - buf.reward_values[t];
    const double delta_c = buf.costs[t] + gamma * next_vc * not_done - buf.cost_values[t];
    adv_r = delta_r + gamma * lam * not_done * adv_r;
    adv_c = delta_c + gamma * lam * not_done * adv_c;
    out.reward_adv[t] = adv_r;
    out.cost_adv[t] = adv_c;
    out.reward_returns[t] = adv_r + buf.reward_values[t];
    out.cost_returns[t] = adv_c + buf.cost_values[t];
  }
  return out;
}

}  // namespace deterra::rl
