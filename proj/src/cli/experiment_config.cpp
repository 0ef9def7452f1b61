#include "cli/experiment_config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace deterra::cli {

using nlohmann::json;

ExperimentConfig ExperimentConfig::desk_default() {
  ExperimentConfig c;
  c.env = env::EnvConfig::desk_default();
  c.ppo.gamma = 0.9;
  c.ppo.gae_lambda = 0.95;
  c.ppo.clip_ratio = 0.2;
  c.ppo.initial_dual = 30.0;
  c.ppo.dual_lr = 0.1;
  c.ppo.cost_threshold = 0.005;
  c.ppo.reward_scale = 1e-6;  // learner sees Mbit/J
  c.ppo.episodes_per_update = 4;
  c.ppo.update_epochs = 10;
  c.ppo.minibatch = 200;
  c.ppo.policy_lr = 3e-4;
  c.ppo.value_lr = 1e-3;

  c.virt.init_components = 8;
  c.virt.trans_components = 8;
  c.virt.alpha = 0.03;
  c.virt.cost_threshold = c.ppo.cost_threshold;
  c.virt.latent_dim = 8;
  c.virt.vae_hidden = {64};
  c.virt.vae_train.lr = 2e-3;
  c.virt.vae_train.epochs = 150;
  c.virt.vae_train.batch = 128;
  c.virt.vae_train.input_jitter = 0.01;
  c.virt.regressor_train.lr = 2e-3;
  c.virt.regressor_train.epochs = 120;
  c.virt.regressor_train.batch = 256;
  c.virt.regressor_kind = nn::RegressorKind::kKan;
  c.virt.regressor_hidden = {12};
  c.virt.episode_len = static_cast<std::size_t>(c.env.slots_per_episode);
  c.virt.seed = 32;

  c.lyapunov.cost_threshold = c.ppo.cost_threshold;
  c.lyapunov.reward_scale = 1e-6;
  return c;
}

ExperimentConfig ExperimentConfig::paper_default() {
  ExperimentConfig c = desk_default();
  c.env = env::EnvConfig::paper_default();
  c.dataset_size = 30000;
  c.pretrain_episodes = 1500;
  c.finetune_episodes = 1500;
  c.seeds = {7, 8, 9, 10, 11, 12, 13, 14};
  c.virt.episode_len = static_cast<std::size_t>(c.env.slots_per_episode);
  c.virt.regressor_train.lr = 1e-4;
  c.virt.regressor_train.batch = 256;
  c.virt.regressor_train.epochs = 200;
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["env"] = env.to_json();
  j["ppo"] = {{"gamma", ppo.gamma},
              {"gae_lambda", ppo.gae_lambda},
              {"clip_ratio", ppo.clip_ratio},
              {"update_epochs", ppo.update_epochs},
              {"minibatch", ppo.minibatch},
              {"episodes_per_update", ppo.episodes_per_update},
              {"policy_lr", ppo.policy_lr},
              {"value_lr", ppo.value_lr},
              {"dual_lr", ppo.dual_lr},
              {"initial_dual", ppo.initial_dual},
              {"cost_threshold", ppo.cost_threshold},
              {"entropy_coef", ppo.entropy_coef},
              {"reward_scale", ppo.reward_scale},
              {"max_grad_norm", ppo.max_grad_norm}};
  j["policy_torso"] = policy_torso;
  j["value_widths"] = value_widths;
  j["virtual"] = {{"init_components", virt.init_components},
                  {"trans_components", virt.trans_components},
                  {"alpha", virt.alpha},
                  {"alpha_queue", virt.alpha_queue},
                  {"cost_threshold", virt.cost_threshold},
                  {"latent_dim", virt.latent_dim},
                  {"vae_hidden", virt.vae_hidden},
                  {"vae_lr", virt.vae_train.lr},
                  {"vae_epochs", virt.vae_train.epochs},
                  {"vae_batch", virt.vae_train.batch},
                  {"vae_jitter", virt.vae_train.input_jitter},
                  {"regressor_kind",
                   virt.regressor_kind == nn::RegressorKind::kKan ? "kan" : "mlp"},
                  {"regressor_hidden", virt.regressor_hidden},
                  {"regressor_lr", virt.regressor_train.lr},
                  {"regressor_epochs", virt.regressor_train.epochs},
                  {"regressor_batch", virt.regressor_train.batch},
                  {"kan_grid", virt.kan_grid},
                  {"kan_order", virt.kan_order},
                  {"kan_grid_eps", virt.kan_grid_eps},
                  {"seed", virt.seed},
                  {"redecode_per_episode", virt.redecode_per_episode}};
  j["lyapunov"] = {{"candidates", lyapunov.candidates},
                   {"penalty_weight", lyapunov.penalty_weight},
                   {"cost_threshold", lyapunov.cost_threshold},
                   {"reward_scale", lyapunov.reward_scale}};
  j["dataset_size"] = dataset_size;
  j["seeds"] = seeds;
  j["out_dir"] = out_dir;
  j["pretrain_episodes"] = pretrain_episodes;
  j["finetune_episodes"] = finetune_episodes;
  j["checkpoint_interval"] = checkpoint_interval;
  j["eval_episodes"] = eval_episodes;
  j["scaler_warmup_steps"] = scaler_warmup_steps;
  j["halfmoons"] = {{"samples", halfmoons_samples},
                    {"noise", halfmoons_noise},
                    {"components", halfmoons_components},
                    {"epochs", halfmoons_epochs},
                    {"lr", halfmoons_lr}};
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c = desk_default();
  if (j.contains("schema_version")) c.schema_version = j.at("schema_version").get<int>();
  if (c.schema_version != 1)
    throw std::invalid_argument("ExperimentConfig: unsupported schema_version");
  if (j.contains("env")) c.env = env::EnvConfig::from_json(j.at("env"));
  if (j.contains("ppo")) {
    const auto& p = j.at("ppo");
    c.ppo.gamma = p.value("gamma", c.ppo.gamma);
    c.ppo.gae_lambda = p.value("gae_lambda", c.ppo.gae_lambda);
    c.ppo.clip_ratio = p.value("clip_ratio", c.ppo.clip_ratio);
    c.ppo.update_epochs = p.value("update_epochs", c.ppo.update_epochs);
    c.ppo.minibatch = p.value("minibatch", c.ppo.minibatch);
    c.ppo.episodes_per_update = p.value("episodes_per_update", c.ppo.episodes_per_update);
    c.ppo.policy_lr = p.value("policy_lr", c.ppo.policy_lr);
    c.ppo.value_lr = p.value("value_lr", c.ppo.value_lr);
    c.ppo.dual_lr = p.value("dual_lr", c.ppo.dual_lr);
    c.ppo.initial_dual = p.value("initial_dual", c.ppo.initial_dual);
    c.ppo.cost_threshold = p.value("cost_threshold", c.ppo.cost_threshold);
    c.ppo.entropy_coef = p.value("entropy_coef", c.ppo.entropy_coef);
    c.ppo.reward_scale = p.value("reward_scale", c.ppo.reward_scale);
    c.ppo.max_grad_norm = p.value("max_grad_norm", c.ppo.max_grad_norm);
  }
  if (j.contains("policy_torso"))
    c.policy_torso = j.at("policy_torso").get<std::vector<std::size_t>>();
  if (j.contains("value_widths"))
    c.value_widths = j.at("value_widths").get<std::vector<std::size_t>>();
  if (j.contains("virtual")) {
    const auto& v = j.at("virtual");
    c.virt.init_components = v.value("init_components", c.virt.init_components);
    c.virt.trans_components = v.value("trans_components", c.virt.trans_components);
    c.virt.alpha = v.value("alpha", c.virt.alpha);
    c.virt.alpha_queue = v.value("alpha_queue", c.virt.alpha_queue);
    c.virt.cost_threshold = v.value("cost_threshold", c.virt.cost_threshold);
    c.virt.latent_dim = v.value("latent_dim", c.virt.latent_dim);
    if (v.contains("vae_hidden"))
      c.virt.vae_hidden = v.at("vae_hidden").get<std::vector<std::size_t>>();
    c.virt.vae_train.lr = v.value("vae_lr", c.virt.vae_train.lr);
    c.virt.vae_train.epochs = v.value("vae_epochs", c.virt.vae_train.epochs);
    c.virt.vae_train.batch = v.value("vae_batch", c.virt.vae_train.batch);
    c.virt.vae_train.input_jitter = v.value("vae_jitter", c.virt.vae_train.input_jitter);
    if (v.contains("regressor_kind"))
      c.virt.regressor_kind = v.at("regressor_kind").get<std::string>() == "mlp"
                                  ? nn::RegressorKind::kMlp
                                  : nn::RegressorKind::kKan;
    if (v.contains("regressor_hidden"))
      c.virt.regressor_hidden = v.at("regressor_hidden").get<std::vector<std::size_t>>();
    c.virt.regressor_train.lr = v.value("regressor_lr", c.virt.regressor_train.lr);
    c.virt.regressor_train.epochs = v.value("regressor_epochs", c.virt.regressor_train.epochs);
    c.virt.regressor_train.batch = v.value("regressor_batch", c.virt.regressor_train.batch);
    c.virt.kan_grid = v.value("kan_grid", c.virt.kan_grid);
    c.virt.kan_order = v.value("kan_order", c.virt.kan_order);
    c.virt.kan_grid_eps = v.value("kan_grid_eps", c.virt.kan_grid_eps);
    c.virt.seed = v.value("seed", c.virt.seed);
    c.virt.redecode_per_episode = v.value("redecode_per_episode", c.virt.redecode_per_episode);
  }
  if (j.contains("lyapunov")) {
    const auto& l = j.at("lyapunov");
    c.lyapunov.candidates = l.value("candidates", c.lyapunov.candidates);
    c.lyapunov.penalty_weight = l.value("penalty_weight", c.lyapunov.penalty_weight);
    c.lyapunov.cost_threshold = l.value("cost_threshold", c.lyapunov.cost_threshold);
    c.lyapunov.reward_scale = l.value("reward_scale", c.lyapunov.reward_scale);
  }
  c.dataset_size = j.value("dataset_size", c.dataset_size);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.out_dir = j.value("out_dir", c.out_dir);
  c.pretrain_episodes = j.value("pretrain_episodes", c.pretrain_episodes);
  c.finetune_episodes = j.value("finetune_episodes", c.finetune_episodes);
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  c.scaler_warmup_steps = j.value("scaler_warmup_steps", c.scaler_warmup_steps);
  if (j.contains("halfmoons")) {
    const auto& h = j.at("halfmoons");
    c.halfmoons_samples = h.value("samples", c.halfmoons_samples);
    c.halfmoons_noise = h.value("noise", c.halfmoons_noise);
    c.halfmoons_components = h.value("components", c.halfmoons_components);
    c.halfmoons_epochs = h.value("epochs", c.halfmoons_epochs);
    c.halfmoons_lr = h.value("lr", c.halfmoons_lr);
  }
  c.virt.episode_len = static_cast<std::size_t>(c.env.slots_per_episode);
  return c;
}

void ExperimentConfig::validate() const {
  env.validate();
  if (seeds.empty()) throw std::invalid_argument("ExperimentConfig: seeds must be non-empty");
  if (dataset_size < 10) throw std::invalid_argument("ExperimentConfig: dataset too small");
  if (ppo.gamma <= 0.0 || ppo.gamma >= 1.0)
    throw std::invalid_argument("ExperimentConfig: gamma outside (0,1)");
  if (!(virt.alpha > 0.0 && virt.alpha < 1.0))
    throw std::invalid_argument("ExperimentConfig: alpha outside (0,1)");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c = ExperimentConfig::from_json(j);
  c.validate();
  return c;
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file " + path);
  out << cfg.to_json().dump(1) << "\n";
}

int max_workers() {
  if (const char* env_threads = std::getenv("DETERRA_THREADS")) {
    const int n = std::atoi(env_threads);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace deterra::cli
