#include "rl/loops.hpp"

#include <cmath>

namespace deterra::rl {

TrainResult train_loop(Cmdp& cmdp, Policy& policy, ValueNet& value_r, ValueNet& value_c,
                       const TrainLoopOptions& opt) {
  const std::size_t ep_len = cmdp.episode_length();
  const PpoConfig& cfg = opt.ppo;
  RolloutBuffer buf(cfg.episodes_per_update * ep_len, cmdp.state_dim(), cmdp.action_dim());
  PpoOptimizer optim(policy, value_r, value_c);
  DualState dual{cfg.initial_dual};

  math::SeededRng env_rng(opt.seed, 11);
  math::SeededRng act_rng(opt.seed, 12);
  math::SeededRng upd_rng(opt.seed, 13);

  TrainResult result;
  double batch_cost_acc = 0.0;
  std::size_t batch_cost_count = 0;

  for (std::size_t ep = 0; ep < opt.episodes; ++ep) {
    CmdpState state = cmdp.reset(env_rng);
    double ep_reward = 0.0, ep_cost = 0.0;
    for (std::size_t t = 0; t < ep_len; ++t) {
      const Vec state_vec = state.to_vector();
      const Vec scaled = policy.state_scaler.apply(state_vec);
      const ActSample act = policy_act(policy, state_vec, act_rng);
      const double v_r = value_eval(value_r, scaled);
      const double v_c = value_eval(value_c, scaled);
      const StepOutcome out = cmdp.step(RawAction::from_vector(act.raw_action), env_rng);
      const double learn_cost = opt.zero_cost_stream ? 0.0 : out.cost_agg;
      buf.push(scaled, act.pre_tanh, act.log_prob, out.reward * cfg.reward_scale, learn_cost,
               v_r, v_c, t + 1 == ep_len);
      ep_reward += out.reward;
      ep_cost += out.cost_agg;
      batch_cost_acc += learn_cost;
      ++batch_cost_count;
      state = out.next_state;

      if (buf.full()) {
        ppo_update(policy, value_r, value_c, optim, buf, dual, cfg, upd_rng);
        dual = dual_update(dual, batch_cost_acc / static_cast<double>(batch_cost_count), cfg);
        buf.clear();
        batch_cost_acc = 0.0;
        batch_cost_count = 0;
      }
    }
    result.curve.push_back(TrainPoint{ep, ep_reward / static_cast<double>(ep_len),
                                      ep_cost / static_cast<double>(ep_len), dual.lambda});
    if (opt.checkpoint_interval > 0 && (ep + 1) % opt.checkpoint_interval == 0 &&
        opt.checkpoint_cb)
      opt.checkpoint_cb(ep + 1, policy, result);
  }
  result.dual = dual;
  return result;
}

EvalStats evaluate_policy(Cmdp& cmdp, const Policy& policy, std::size_t episodes,
                          math::SeededRng& rng, bool deterministic_actions) {
  const std::size_t ep_len = cmdp.episode_length();
  Vec ee(episodes), viol(episodes);
  math::SeededRng act_rng = rng.split(1);
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    CmdpState state = cmdp.reset(rng);
    double bits = 0.0, energy = 0.0, reward_acc = 0.0, cost_acc = 0.0;
    long bad = 0, events = 0;
    for (std::size_t t = 0; t < ep_len; ++t) {
      const ActSample act =
          policy_act(policy, state.to_vector(), act_rng, deterministic_actions);
      const StepOutcome out = cmdp.step(RawAction::from_vector(act.raw_action), rng);
      for (double b : out.bits_served) bits += b;
      energy += out.energy_joules;
      reward_acc += out.reward;
      cost_acc += out.cost_agg;
      for (std::size_t u = 0; u < out.vio.size(); ++u) {
        bad += out.vio[u] + out.drop[u];
        events += out.vio[u] + out.drop[u] + out.tx[u];
      }
      state = out.next_state;
    }
    ee[ep] = energy > 0.0 ? bits / energy : reward_acc / static_cast<double>(ep_len);
    viol[ep] = events > 0 ? static_cast<double>(bad) / static_cast<double>(events)
                          : cost_acc / static_cast<double>(ep_len);
  }
  EvalStats stats;
  double m1 = 0.0, m2 = 0.0;
  for (double v : ee) m1 += v;
  for (double v : viol) m2 += v;
  stats.ee_mean = m1 / static_cast<double>(episodes);
  stats.viol_mean = m2 / static_cast<double>(episodes);
  double v1 = 0.0, v2 = 0.0;
  for (double v : ee) v1 += (v - stats.ee_mean) * (v - stats.ee_mean);
  for (double v : viol) v2 += (v - stats.viol_mean) * (v - stats.viol_mean);
  stats.ee_std = episodes > 1 ? std::sqrt(v1 / static_cast<double>(episodes - 1)) : 0.0;
  stats.viol_std = episodes > 1 ? std::sqrt(v2 / static_cast<double>(episodes - 1)) : 0.0;
  return stats;
}

void fit_state_scaler(Cmdp& cmdp, Policy& policy, std::size_t warmup_steps,
                      std::uint64_t seed) {
  math::SeededRng env_rng(seed, 21);
  math::SeededRng act_rng(seed, 22);
  const std::size_t ep_len = cmdp.episode_length();
  Mat observed(warmup_steps, cmdp.state_dim());
  CmdpState state = cmdp.reset(env_rng);
  std::size_t t_in_ep = 0;
  for (std::size_t i = 0; i < warmup_steps; ++i) {
    observed.set_row(i, state.to_vector());
    const Vec a = behavior_policy_uniform(cmdp.action_dim(), act_rng);
    const StepOutcome out = cmdp.step(RawAction::from_vector(a), env_rng);
    state = out.next_state;
    if (++t_in_ep == ep_len) {
      state = cmdp.reset(env_rng);
      t_in_ep = 0;
    }
  }
  policy.state_scaler = nn::fit_scaler(observed);
}

}  // namespace deterra::rl
