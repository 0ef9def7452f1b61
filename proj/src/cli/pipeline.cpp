#include "cli/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "core/bytes.hpp"
#include "genmodel/vae_chmdn.hpp"
#include "mathcore/special.hpp"

namespace deterra::cli {

namespace fs = std::filesystem;
using nlohmann::json;

env::TransitionDataset collect_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  env::Environment envr(cfg.env);
  const std::size_t ep_len = envr.episode_length();
  const std::size_t count = cfg.dataset_size;

  env::TransitionDataset ds;
  ds.state_dim = envr.state_dim();
  ds.action_dim = envr.action_dim();
  ds.num_ue = static_cast<std::size_t>(cfg.env.num_ues);
  ds.env_hash = cfg.env.hash();
  ds.states = Mat(count, ds.state_dim);
  ds.actions = Mat(count, ds.action_dim);
  ds.rewards.resize(count);
  ds.costs.resize(count);
  ds.cost_per_user = Mat(count, ds.num_ue);
  ds.next_states = Mat(count, ds.state_dim);

  math::SeededRng env_rng(seed, 1);
  math::SeededRng act_rng(seed, 2);
  std::size_t written = 0;
  while (written < count) {
    CmdpState state = envr.reset(env_rng);
    for (std::size_t t = 0; t < ep_len && written < count; ++t) {
      const Vec action = rl::behavior_policy_uniform(envr.action_dim(), act_rng);
      const StepOutcome out = envr.step(RawAction::from_vector(action), env_rng);
      ds.states.set_row(written, state.to_vector());
      ds.actions.set_row(written, action);
      ds.rewards[written] = out.reward;
      ds.costs[written] = out.cost_agg;
      ds.cost_per_user.set_row(written, out.cost_per_user);
      ds.next_states.set_row(written, out.next_state.to_vector());
      state = out.next_state;
      ++written;
    }
  }
  return ds;
}

gen::VirtualCmdp fit_bundle(const ExperimentConfig& cfg, const env::TransitionDataset& ds,
                            gen::FidelityReport* report) {
  gen::VirtualFitConfig fit = cfg.virt;
  fit.episode_len = static_cast<std::size_t>(cfg.env.slots_per_episode);
  return gen::fit_virtual_cmdp(ds, cfg.env, fit, report);
}

rl::Policy make_policy(const ExperimentConfig& cfg, Cmdp& cmdp, std::uint64_t seed) {
  rl::PolicySpec spec;
  spec.state_dim = cmdp.state_dim();
  spec.action_dim = cmdp.action_dim();
  spec.torso_widths = cfg.policy_torso;
  math::SeededRng init_rng(seed, 31);
  rl::Policy policy = rl::policy_init(spec, init_rng);
  rl::fit_state_scaler(cmdp, policy, cfg.scaler_warmup_steps, seed);
  return policy;
}

rl::TrainResult train_on(const ExperimentConfig& cfg, Cmdp& cmdp, rl::Policy& policy,
                         std::size_t episodes, std::uint64_t seed,
                         std::size_t checkpoint_interval, const std::string& checkpoint_dir) {
  math::SeededRng vrng(seed, 41);
  rl::ValueNet value_r = rl::value_init(cmdp.state_dim(), cfg.value_widths, vrng);
  rl::ValueNet value_c = rl::value_init(cmdp.state_dim(), cfg.value_widths, vrng);
  rl::TrainLoopOptions opt;
  opt.episodes = episodes;
  opt.ppo = cfg.ppo;
  opt.seed = seed;
  opt.checkpoint_interval = checkpoint_interval;
  if (checkpoint_interval > 0 && !checkpoint_dir.empty()) {
    const std::uint64_t env_hash = cfg.env.hash();
    opt.checkpoint_cb = [checkpoint_dir, env_hash](std::size_t ep, const rl::Policy& p,
                                                   const rl::TrainResult&) {
      rl::save_policy(p, checkpoint_dir + "/policy_ep" + std::to_string(ep) + ".json",
                      env_hash);
    };
  }
  return rl::train_loop(cmdp, policy, value_r, value_c, opt);
}

HalfmoonsResult run_halfmoons(const ExperimentConfig& cfg, std::uint64_t seed) {
  math::SeededRng data_rng(seed, 51);
  const Mat all = gen::make_half_moons(cfg.halfmoons_samples, cfg.halfmoons_noise, data_rng);
  const std::size_t half = all.rows() / 2;
  HalfmoonsResult res;
  res.train_set = Mat(half, 2);
  res.test_set = Mat(all.rows() - half, 2);
  for (std::size_t i = 0; i < half; ++i) res.train_set.set_row(i, all.row_vec(i));
  for (std::size_t i = half; i < all.rows(); ++i)
    res.test_set.set_row(i - half, all.row_vec(i));

  gen::VaeChmdnSpec spec;
  spec.input_dim = 2;
  spec.latent_dim = 2;
  spec.components = cfg.halfmoons_components;
  spec.encoder_hidden = {32};
  spec.decoder_hidden = {32};
  gen::VaeTrainConfig tcfg;
  tcfg.lr = cfg.halfmoons_lr;
  tcfg.epochs = cfg.halfmoons_epochs;
  tcfg.batch = 64;
  tcfg.seed = seed;
  const gen::VaeChmdn vae = gen::vae_chmdn_train(spec, res.train_set, tcfg);
  math::SeededRng decode_rng(seed, 909);
  res.joint = gen::generate_gmm(vae, decode_rng);

  Vec conditions;
  for (std::size_t i = 0; i < res.test_set.rows(); ++i)
    conditions.push_back(res.test_set(i, 1));
  math::SeededRng cov_rng(seed, 53);
  res.coverage = gen::branch_coverage(res.joint, conditions, cfg.virt.alpha, 200, 0.25, cov_rng);
  return res;
}

void write_curves_csv(const std::string& path,
                      const std::vector<std::pair<std::uint64_t, rl::TrainResult>>& runs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "episode,reward_mean,cost_mean,lambda,seed\n";
  for (const auto& [seed, res] : runs)
    for (const auto& pt : res.curve)
      out << pt.episode << "," << pt.reward_mean << "," << pt.cost_mean << "," << pt.lambda
          << "," << seed << "\n";
}

void write_meta(const std::string& artifact_path, const ExperimentConfig& cfg,
                const std::string& phase, std::uint64_t seed) {
  json j{{"env_hash", cfg.env.hash()},
         {"env_hash_hex", hex_u64(cfg.env.hash())},
         {"phase", phase},
         {"seed", seed}};
  std::ofstream out(artifact_path + ".meta.json");
  if (!out) throw std::runtime_error("cannot write meta for " + artifact_path);
  out << j.dump(1) << "\n";
}

namespace {

void write_histogram_csv(const std::string& path, const Vec& values, int bins) {
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    counts[static_cast<std::size_t>(b)] += 1;
  }
  std::ofstream out(path);
  out.precision(12);
  out << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < bins; ++b)
    out << lo + (hi - lo) * b / bins << "," << lo + (hi - lo) * (b + 1) / bins << ","
        << counts[static_cast<std::size_t>(b)] << "\n";
}

}  // namespace

int cmd_collect(const ExperimentConfig& cfg, std::uint64_t seed) {
  fs::create_directories(cfg.out_dir);
  const env::TransitionDataset ds = collect_dataset(cfg, seed);
  const std::string path = cfg.out_dir + "/dataset.bin";
  env::save_dataset(ds, path);
  env::save_dataset_csv(ds, cfg.out_dir + "/dataset.csv");
  write_meta(path, cfg, "collect", seed);

  // coverage summary
  std::ofstream cov(cfg.out_dir + "/coverage.csv");
  cov.precision(12);
  cov << "column,min,max\n";
  auto col_range = [&](const Mat& m, const std::string& prefix) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double lo = m(0, j), hi = m(0, j);
      for (std::size_t i = 1; i < m.rows(); ++i) {
        lo = std::min(lo, m(i, j));
        hi = std::max(hi, m(i, j));
      }
      cov << prefix << j << "," << lo << "," << hi << "\n";
    }
  };
  col_range(ds.states, "s_");
  col_range(ds.actions, "a_");
  write_histogram_csv(cfg.out_dir + "/reward_hist.csv", ds.rewards, 30);
  write_histogram_csv(cfg.out_dir + "/cost_hist.csv", ds.costs, 30);

  double r_lo = ds.rewards[0], r_hi = ds.rewards[0];
  for (double r : ds.rewards) {
    r_lo = std::min(r_lo, r);
    r_hi = std::max(r_hi, r);
  }
  std::printf("collect: %zu tuples -> %s (env hash %s)\n", ds.count(), path.c_str(),
              hex_u64(ds.env_hash).c_str());
  std::printf("collect: reward range [%.4g, %.4g] bits/J, cost range over %zu UEs\n", r_lo,
              r_hi, ds.num_ue);
  return 0;
}

int cmd_fit(const ExperimentConfig& cfg, const std::string& dataset_path) {
  const env::TransitionDataset ds = env::load_dataset(dataset_path);
  if (ds.env_hash != cfg.env.hash()) {
    std::fprintf(stderr, "fit: dataset env hash %s does not match config %s\n",
                 hex_u64(ds.env_hash).c_str(), hex_u64(cfg.env.hash()).c_str());
    return 2;
  }
  fs::create_directories(cfg.out_dir);
  gen::FidelityReport report;
  const gen::VirtualCmdp v = fit_bundle(cfg, ds, &report);
  const std::string bundle_path = cfg.out_dir + "/bundle.json";
  gen::save_virtual_cmdp(v, bundle_path);
  write_meta(bundle_path, cfg, "fit", cfg.virt.seed);

  std::ofstream rep(cfg.out_dir + "/fidelity.csv");
  rep.precision(12);
  rep << "model,metric,train,test\n";
  for (const auto& row : report.rows)
    rep << row.model << "," << row.metric << "," << row.train << "," << row.test << "\n";
  std::printf("fit: bundle -> %s\n", bundle_path.c_str());
  for (const auto& row : report.rows)
    std::printf("fit: %-12s %-9s train %.5f test %.5f\n", row.model.c_str(),
                row.metric.c_str(), row.train, row.test);
  return 0;
}

int cmd_pretrain(const ExperimentConfig& cfg, const std::string& bundle_path,
                 std::uint64_t seed) {
  gen::VirtualCmdp v = gen::load_virtual_cmdp(bundle_path, cfg.env.hash());
  fs::create_directories(cfg.out_dir);
  rl::Policy policy = make_policy(cfg, v, seed);
  const rl::TrainResult res =
      train_on(cfg, v, policy, cfg.pretrain_episodes, seed, cfg.checkpoint_interval,
               cfg.out_dir);
  const std::string curve_path = cfg.out_dir + "/pretrain_curve.csv";
  write_curves_csv(curve_path, {{seed, res}});
  write_meta(curve_path, cfg, "pretrain", seed);
  const std::string policy_path = cfg.out_dir + "/policy_pretrained.json";
  rl::save_policy(policy, policy_path, cfg.env.hash());
  write_meta(policy_path, cfg, "pretrain", seed);
  std::ofstream pcfg(cfg.out_dir + "/ppo_config.json");
  pcfg << cfg.to_json()["ppo"].dump(1) << "\n";
  std::printf("pretrain: %zu episodes in the virtual CMDP -> %s\n", cfg.pretrain_episodes,
              policy_path.c_str());
  std::printf("pretrain: final reward_mean %.4g, cost_mean %.4g, lambda %.3f\n",
              res.curve.back().reward_mean, res.curve.back().cost_mean,
              res.curve.back().lambda);
  return 0;
}

int cmd_finetune(const ExperimentConfig& cfg, const std::optional<std::string>& policy_path) {
  fs::create_directories(cfg.out_dir);
  std::optional<rl::Policy> warm;
  if (policy_path) {
    std::uint64_t hash = 0;
    warm = rl::load_policy(*policy_path, &hash);
    if (hash != cfg.env.hash()) {
      std::fprintf(stderr, "finetune: policy env hash mismatch\n");
      return 2;
    }
    if (warm->spec.state_dim != cfg.env.state_dim() ||
        warm->spec.action_dim != cfg.env.action_dim()) {
      std::fprintf(stderr, "finetune: policy dimensions do not match the environment\n");
      return 2;
    }
  }

  std::vector<std::pair<std::uint64_t, rl::TrainResult>> runs(cfg.seeds.size());
  std::vector<rl::Policy> finals(cfg.seeds.size());
  const int workers = std::min<int>(max_workers(), static_cast<int>(cfg.seeds.size()));
  std::size_t next = 0;
  std::mutex mtx;
  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mtx);
        if (next >= cfg.seeds.size()) return;
        idx = next++;
      }
      const std::uint64_t seed = cfg.seeds[idx];
      env::Environment envr(cfg.env);
      rl::Policy policy = warm ? *warm : make_policy(cfg, envr, seed);
      const rl::TrainResult res = train_on(cfg, envr, policy, cfg.finetune_episodes, seed);
      runs[idx] = {seed, res};
      finals[idx] = policy;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  const std::string curve_path = cfg.out_dir + "/finetune_curve.csv";
  write_curves_csv(curve_path, runs);
  write_meta(curve_path, cfg, "finetune", cfg.seeds.front());
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const std::string p =
        cfg.out_dir + "/policy_seed" + std::to_string(cfg.seeds[i]) + ".json";
    rl::save_policy(finals[i], p, cfg.env.hash());
  }

  // mean +- std across seeds per episode
  std::ofstream summary(cfg.out_dir + "/finetune_summary.csv");
  summary.precision(12);
  summary << "episode,reward_mean,reward_std,cost_mean,cost_std\n";
  for (std::size_t ep = 0; ep < cfg.finetune_episodes; ++ep) {
    double rm = 0.0, cm = 0.0;
    for (const auto& [seed, res] : runs) {
      rm += res.curve[ep].reward_mean;
      cm += res.curve[ep].cost_mean;
    }
    rm /= static_cast<double>(runs.size());
    cm /= static_cast<double>(runs.size());
    double rv = 0.0, cv = 0.0;
    for (const auto& [seed, res] : runs) {
      rv += std::pow(res.curve[ep].reward_mean - rm, 2);
      cv += std::pow(res.curve[ep].cost_mean - cm, 2);
    }
    const double denom = runs.size() > 1 ? static_cast<double>(runs.size() - 1) : 1.0;
    summary << ep << "," << rm << "," << std::sqrt(rv / denom) << "," << cm << ","
            << std::sqrt(cv / denom) << "\n";
  }
  std::printf("finetune: %zu seeds x %zu episodes -> %s (%s)\n", cfg.seeds.size(),
              cfg.finetune_episodes, curve_path.c_str(),
              policy_path ? "warm start" : "from scratch");
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& policy_path, std::uint64_t seed) {
  std::uint64_t hash = 0;
  const rl::Policy policy = rl::load_policy(policy_path, &hash);
  if (hash != cfg.env.hash()) {
    std::fprintf(stderr, "eval: policy env hash mismatch\n");
    return 2;
  }
  env::Environment envr(cfg.env);
  math::SeededRng rng(seed, 61);
  const rl::EvalStats stats = rl::evaluate_policy(envr, policy, cfg.eval_episodes, rng);
  json j{{"ee_mean", stats.ee_mean},
         {"ee_std", stats.ee_std},
         {"viol_mean", stats.viol_mean},
         {"viol_std", stats.viol_std}};
  fs::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/eval.json");
  out << j.dump(1) << "\n";
  write_meta(cfg.out_dir + "/eval.json", cfg, "eval", seed);
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

int cmd_halfmoons(const ExperimentConfig& cfg, std::uint64_t seed) {
  fs::create_directories(cfg.out_dir);
  const HalfmoonsResult res = run_halfmoons(cfg, seed);

  std::ofstream train_csv(cfg.out_dir + "/halfmoons_train.csv");
  train_csv.precision(12);
  train_csv << "condition,target\n";
  for (std::size_t i = 0; i < res.train_set.rows(); ++i)
    train_csv << res.train_set(i, 1) << "," << res.train_set(i, 0) << "\n";

  // conditional samples across a condition grid
  std::ofstream samples(cfg.out_dir + "/halfmoons_samples.csv");
  samples.precision(12);
  samples << "condition,sample\n";
  math::SeededRng srng(seed, 55);
  const double threshold = math::chi2_quantile(1, cfg.virt.alpha);
  for (int gi = 0; gi <= 60; ++gi) {
    const double x = -1.0 + 3.0 * gi / 60.0;
    const auto inf = gen::ea_cgmm_infer_with_threshold(res.joint, math::BlockSplit{1}, Vec{x},
                                                       threshold);
    for (int s = 0; s < 20; ++s)
      samples << x << "," << gen::gmm_sample(inf.conditional, srng)[0] << "\n";
  }

  json metrics{{"branch_coverage", res.coverage.coverage()},
               {"conditions_checked", res.coverage.conditions_checked},
               {"conditions_covered", res.coverage.conditions_covered}};
  std::ofstream mj(cfg.out_dir + "/halfmoons_metrics.json");
  mj << metrics.dump(1) << "\n";
  std::printf("halfmoons: branch coverage %.3f over %zu two-branch conditions\n",
              res.coverage.coverage(), res.coverage.conditions_checked);
  return 0;
}

int cmd_bench(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/bench.csv");
  out << "b,u,k,m,state_dim,action_dim,policy_macs,regressor_macs,init_sample_flops,"
         "transition_infer_flops\n";
  std::printf("bench: per-sample operation counts by system scale\n");
  std::printf("%4s %4s %4s %4s %12s %14s %16s %20s\n", "B", "U", "K", "M", "policy",
              "regressor", "init_sample", "transition_infer");
  for (int s = 2; s <= 8; ++s) {
    const std::size_t b = s, u = s, k = s, m = s;
    const std::size_t r_dim = b * u * k * m;
    const std::size_t state = r_dim + 2 * u;
    const std::size_t action = 3 * b * u * k;

    // policy torso + mean head multiply-accumulates
    std::size_t policy_macs = 0;
    std::size_t prev = state;
    for (std::size_t w : cfg.policy_torso) {
      policy_macs += prev * w;
      prev = w;
    }
    policy_macs += prev * action;

    // regressor on (s, a): edges x (basis combination + base term)
    const std::size_t nb =
        static_cast<std::size_t>(cfg.virt.kan_grid + cfg.virt.kan_order);
    std::size_t reg_macs = 0;
    prev = state + action;
    for (std::size_t w : cfg.virt.regressor_hidden) {
      reg_macs += prev * w * (nb + 2);
      prev = w;
    }
    reg_macs += prev * (nb + 2);

    // initial-state generation: decoder pass + one triangular solve
    const std::size_t tri = r_dim * (r_dim + 1) / 2;
    const std::size_t dec_out = cfg.virt.init_components * (1 + r_dim + tri);
    std::size_t init_flops = 0;
    prev = cfg.virt.latent_dim;
    for (std::size_t w : cfg.virt.vae_hidden) {
      init_flops += prev * w;
      prev = w;
    }
    init_flops += prev * dec_out;
    init_flops += tri;  // back-substitution

    // transition inference: per component, conditional mean solve plus the
    // Mahalanobis form on the conditioning block
    const std::size_t n_joint = 2 * r_dim;
    const std::size_t cond = n_joint - r_dim;
    const std::size_t per_comp =
        r_dim * cond + r_dim * r_dim / 2 + cond * cond / 2 + cond;
    const std::size_t trans_flops = cfg.virt.trans_components * per_comp + tri;

    out << b << "," << u << "," << k << "," << m << "," << state << "," << action << ","
        << policy_macs << "," << reg_macs << "," << init_flops << "," << trans_flops << "\n";
    std::printf("%4zu %4zu %4zu %4zu %12zu %14zu %16zu %20zu\n", b, u, k, m, policy_macs,
                reg_macs, init_flops, trans_flops);
  }
  std::printf("bench: written to %s/bench.csv\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace deterra::cli
