#include <CLI11.hpp>
#include <cstdio>
#include <optional>

#include "cli/pipeline.hpp"
#include "cli/selftest.hpp"

using deterra::cli::ExperimentConfig;

int main(int argc, char** argv) {
  CLI::App app{"deterra: delay-constrained CF-MIMO resource allocation "
               "with generative virtual-environment pretraining"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::uint64_t seed = 32;
  bool seed_given = false;
  std::string out_dir;
  bool paper_profile = false;
  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--paper-scale", paper_profile,
               "use the published system dimensions (slow) instead of the desk profile");

  auto* collect = app.add_subcommand("collect", "run the uniform behavior policy, write tuples");
  std::string dataset_path = "";
  auto* fit = app.add_subcommand("fit", "train the virtual CMDP bundle from a dataset");
  fit->add_option("--dataset", dataset_path, "transition-tuple file");
  std::string bundle_path = "";
  auto* pretrain = app.add_subcommand("pretrain", "train the agent inside the virtual CMDP");
  pretrain->add_option("--bundle", bundle_path, "virtual CMDP bundle manifest");
  std::string policy_path = "";
  auto* finetune = app.add_subcommand("finetune", "train in the real environment, multi-seed");
  finetune->add_option("--policy", policy_path, "pretrained policy to warm start from");
  std::string eval_policy = "";
  auto* eval = app.add_subcommand("eval", "Monte Carlo evaluation of a saved policy");
  eval->add_option("--policy", eval_policy, "policy checkpoint")->required();
  auto* halfmoons = app.add_subcommand("halfmoons", "two half-moons conditional-generation toy");
  auto* selftest = app.add_subcommand("selftest", "run the built-in oracle suites");
  auto* bench = app.add_subcommand("bench", "operation counts versus system scale");

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    if (!config_path.empty())
      cfg = deterra::cli::load_experiment_config(config_path);
    else
      cfg = paper_profile ? ExperimentConfig::paper_default() : ExperimentConfig::desk_default();
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_given) {
      cfg.virt.seed = seed;
      cfg.seeds = {seed};
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    if (*collect) return deterra::cli::cmd_collect(cfg, seed);
    if (*fit) {
      if (dataset_path.empty()) dataset_path = cfg.out_dir + "/dataset.bin";
      return deterra::cli::cmd_fit(cfg, dataset_path);
    }
    if (*pretrain) {
      if (bundle_path.empty()) bundle_path = cfg.out_dir + "/bundle.json";
      return deterra::cli::cmd_pretrain(cfg, bundle_path, seed);
    }
    if (*finetune)
      return deterra::cli::cmd_finetune(
          cfg, policy_path.empty() ? std::nullopt : std::optional<std::string>(policy_path));
    if (*eval) return deterra::cli::cmd_eval(cfg, eval_policy, seed);
    if (*halfmoons) return deterra::cli::cmd_halfmoons(cfg, seed);
    if (*selftest) return deterra::cli::cmd_selftest(cfg);
    if (*bench) return deterra::cli::cmd_bench(cfg);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
