#pragma once

#include <optional>

#include "cli/experiment_config.hpp"
#include "env/dataset.hpp"
#include "env/environment.hpp"
#include "genmodel/halfmoons.hpp"

namespace deterra::cli {

// Reusable phase cores (the acceptance suite drives these directly); the
// cmd_* wrappers add file IO and console reporting.

env::TransitionDataset collect_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

gen::VirtualCmdp fit_bundle(const ExperimentConfig& cfg, const env::TransitionDataset& ds,
                            gen::FidelityReport* report);

/// Fresh policy with its state scaler fitted from a uniform-action warmup on
/// the given CMDP.
rl::Policy make_policy(const ExperimentConfig& cfg, Cmdp& cmdp, std::uint64_t seed);

/// Runs the primal-dual PPO loop for `episodes`; value nets are fresh, the
/// policy is updated in place (pass a pretrained one to warm start).
rl::TrainResult train_on(const ExperimentConfig& cfg, Cmdp& cmdp, rl::Policy& policy,
                         std::size_t episodes, std::uint64_t seed,
                         std::size_t checkpoint_interval = 0,
                         const std::string& checkpoint_dir = "");

struct HalfmoonsResult {
  gen::Gmm joint;
  gen::BranchCoverageReport coverage;
  Mat train_set;
  Mat test_set;
};

HalfmoonsResult run_halfmoons(const ExperimentConfig& cfg, std::uint64_t seed);

void write_curves_csv(const std::string& path,
                      const std::vector<std::pair<std::uint64_t, rl::TrainResult>>& runs);
void write_meta(const std::string& artifact_path, const ExperimentConfig& cfg,
                const std::string& phase, std::uint64_t seed);

// CLI entry points; return process exit codes (0 ok, 2 config error).
int cmd_collect(const ExperimentConfig& cfg, std::uint64_t seed);
int cmd_fit(const ExperimentConfig& cfg, const std::string& dataset_path);
int cmd_pretrain(const ExperimentConfig& cfg, const std::string& bundle_path,
                 std::uint64_t seed);
int cmd_finetune(const ExperimentConfig& cfg, const std::optional<std::string>& policy_path);
int cmd_eval(const ExperimentConfig& cfg, const std::string& policy_path, std::uint64_t seed);
int cmd_halfmoons(const ExperimentConfig& cfg, std::uint64_t seed);
int cmd_bench(const ExperimentConfig& cfg);

}  // namespace deterra::cli
