#pragma once

#include <string>

#include "env/env_config.hpp"
#include "genmodel/virtual_cmdp.hpp"
#include "rl/loops.hpp"
#include "rl/lyapunov.hpp"

namespace deterra::cli {

/// Everything one experiment needs, loadable from a single JSON file. The
/// desk profile keeps the full pipeline under an hour of CPU; the paper
/// profile restores the published dimensions (and is marked slow).
struct ExperimentConfig {
  int schema_version = 1;
  env::EnvConfig env;
  rl::PpoConfig ppo;
  std::vector<std::size_t> policy_torso{64, 64};
  std::vector<std::size_t> value_widths{64, 64};
  gen::VirtualFitConfig virt;
  rl::LyapunovConfig lyapunov;

  std::size_t dataset_size = 8000;
  std::vector<std::uint64_t> seeds{7, 8, 9, 10, 11};
  std::string out_dir = "out";
  std::size_t pretrain_episodes = 300;
  std::size_t finetune_episodes = 400;
  std::size_t checkpoint_interval = 150;
  std::size_t eval_episodes = 100;
  std::size_t scaler_warmup_steps = 2000;

  std::size_t halfmoons_samples = 400;
  double halfmoons_noise = 0.08;
  std::size_t halfmoons_components = 8;
  std::size_t halfmoons_epochs = 1500;
  double halfmoons_lr = 4e-3;

  static ExperimentConfig desk_default();
  static ExperimentConfig paper_default();

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Throws std::invalid_argument on broken invariants (maps to exit code 2).
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

/// Worker cap: DETERRA_THREADS when set, hardware concurrency otherwise.
int max_workers();

}  // namespace deterra::cli
