#include "rl/ppo.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace deterra::rl {

DualState dual_update(DualState dual, double measured_cost_mean, const PpoConfig& cfg) {
  dual.lambda =
      std::max(dual.lambda + cfg.dual_lr * (measured_cost_mean - cfg.cost_threshold), 0.0);
  return dual;
}

void ppo_update(Policy& policy, ValueNet& value_r, ValueNet& value_c, PpoOptimizer& opt,
                const RolloutBuffer& buf, const DualState& dual, const PpoConfig& cfg,
                math::SeededRng& rng, PpoDiagnostics* diag) {
  const std::size_t n = buf.size;
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");
  const GaeResult adv = gae(buf, cfg.gamma, cfg.gae_lambda);

  // combined advantage, normalized after the lambda coupling
  Vec combined(n);
  for (std::size_t t = 0; t < n; ++t)
    combined[t] = adv.reward_adv[t] - dual.lambda * adv.cost_adv[t];
  double mean = 0.0;
  for (double a : combined) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : combined) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / static_cast<double>(n)) + 1e-8;
  for (auto& a : combined) a = (a - mean) / stddev;

  const std::size_t mb = cfg.minibatch == 0 ? n : std::min(cfg.minibatch, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const nn::MlpSpec pol_spec = policy.spec.mlp_spec();
  const std::size_t act_dim = policy.spec.action_dim;
  const std::size_t ls_seg = policy.log_std_segment();

  double last_policy_loss = 0.0, last_entropy = 0.0, clip_count = 0.0, clip_total = 0.0;
  double last_vr_loss = 0.0, last_vc_loss = 0.0;

  for (std::size_t epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t count = std::min(mb, n - start);
      Mat xs(count, buf.states_scaled.cols());
      Mat us(count, act_dim);
      Vec adv_mb(count), logp_old(count), ret_r(count), ret_c(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = order[start + i];
        xs.set_row(i, buf.states_scaled.row_vec(k));
        us.set_row(i, buf.pre_tanh.row_vec(k));
        adv_mb[i] = combined[k];
        logp_old[i] = buf.log_probs[k];
        ret_r[i] = adv.reward_returns[k];
        ret_c[i] = adv.cost_returns[k];
      }

      // --- policy ---
      nn::MlpCache cache;
      Vec logp_new, entropy;
      Mat means;
      policy_log_prob(policy, xs, us, &logp_new, &entropy, &cache, &means);
      const double* log_std = policy.params.seg(ls_seg);

      Mat dmean(count, act_dim, 0.0);
      nn::ParamVector grad = policy.params.zeros_like();
      double* g_log_std = grad.seg(ls_seg);
      double policy_loss = 0.0, ent_acc = 0.0;
      const double inv_count = 1.0 / static_cast<double>(count);
      for (std::size_t i = 0; i < count; ++i) {
        const double ratio = std::exp(logp_new[i] - logp_old[i]);
        const double surr1 = ratio * adv_mb[i];
        const double clipped =
            std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
        const double surr2 = clipped * adv_mb[i];
        const bool use_unclipped = surr1 <= surr2;
        policy_loss -= std::min(surr1, surr2) * inv_count;
        ent_acc += entropy[i] * inv_count;
        clip_total += 1.0;
        if (!use_unclipped) clip_count += 1.0;
        const double coeff = use_unclipped ? ratio * adv_mb[i] : 0.0;
        for (std::size_t a = 0; a < act_dim; ++a) {
          const double ls = clamp_log_std(log_std[a]);
          const double sigma = std::exp(ls);
          const double z = (us(i, a) - means(i, a)) / sigma;
          // d logp / d mean = z / sigma ; d logp / d log_std = z^2 - 1
          dmean(i, a) = -coeff * (z / sigma) * inv_count;
          g_log_std[a] += -coeff * (z * z - 1.0) * inv_count;
          g_log_std[a] += -cfg.entropy_coef * inv_count;  // dH/dls = 1
        }
      }
      policy_loss -= cfg.entropy_coef * ent_acc;
      if (!std::isfinite(policy_loss))
        throw std::runtime_error("ppo_update: non-finite policy loss");
      nn::mlp_backward(pol_spec, policy.params, cache, dmean, grad);
      if (cfg.max_grad_norm > 0.0) nn::clip_grad_norm(grad.values, cfg.max_grad_norm);
      opt.policy_adam.step(policy.params.values, grad.values, cfg.policy_lr, 0.9, 0.999, 1e-8);
      // keep the log-std segment inside its clamp by projection
      double* ls_vals = policy.params.seg(ls_seg);
      for (std::size_t a = 0; a < act_dim; ++a) ls_vals[a] = clamp_log_std(ls_vals[a]);
      last_policy_loss = policy_loss;
      last_entropy = ent_acc;

      // --- value heads (separate networks, separate optimizers) ---
      auto fit_value = [&](ValueNet& net, nn::AdamState& adam, const Vec& target) {
        nn::MlpCache vcache;
        const Mat v = nn::mlp_forward(net.spec, net.params, xs, &vcache);
        Mat dv(count, 1);
        double loss = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
          const double r = v(i, 0) - target[i];
          loss += 0.5 * r * r * inv_count;
          dv(i, 0) = r * inv_count;
        }
        if (!std::isfinite(loss)) throw std::runtime_error("ppo_update: non-finite value loss");
        nn::ParamVector vgrad = net.params.zeros_like();
        nn::mlp_backward(net.spec, net.params, vcache, dv, vgrad);
        if (cfg.max_grad_norm > 0.0) nn::clip_grad_norm(vgrad.values, cfg.max_grad_norm);
        adam.step(net.params.values, vgrad.values, cfg.value_lr, 0.9, 0.999, 1e-8);
        return loss;
      };
      last_vr_loss = fit_value(value_r, opt.value_r_adam, ret_r);
      last_vc_loss = fit_value(value_c, opt.value_c_adam, ret_c);
    }
  }

  if (diag) {
    diag->policy_loss = last_policy_loss;
    diag->value_loss_reward = last_vr_loss;
    diag->value_loss_cost = last_vc_loss;
    diag->entropy = last_entropy;
    diag->clip_fraction = clip_total > 0.0 ? clip_count / clip_total : 0.0;
  }
}

}  // namespace deterra::rl
