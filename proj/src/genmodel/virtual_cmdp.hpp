#pragma once

#include <optional>
#include <string>

#include "core/cmdp.hpp"
#include "env/dataset.hpp"
#include "env/env_config.hpp"
#include "genmodel/eacgmm.hpp"
#include "genmodel/vae_chmdn.hpp"
#include "nn/regressor.hpp"

namespace deterra::gen {

struct VirtualFitConfig {
  std::size_t init_components = 8;   // G
  std::size_t trans_components = 8;  // J, parity with G
  double alpha = 0.03;
  double alpha_queue = -1.0;  // < 0 -> use alpha for both transition models
  double cost_threshold = 0.005;
  std::size_t latent_dim = 8;
  std::vector<std::size_t> vae_hidden{64};
  VaeTrainConfig vae_train;
  nn::TrainConfig regressor_train;
  nn::RegressorKind regressor_kind = nn::RegressorKind::kKan;
  std::vector<std::size_t> regressor_hidden{12};
  int kan_grid = 10;
  int kan_order = 3;
  double kan_grid_eps = 0.1;
  std::size_t episode_len = 100;  // slots per collected episode
  std::uint64_t seed = 32;
  bool redecode_per_episode = false;
  std::size_t fidelity_eval_tuples = 400;
  std::size_t mmd_draws = 8;  // per-condition draws averaged in the MAE report

  double queue_alpha() const { return alpha_queue < 0.0 ? alpha : alpha_queue; }
};

struct FidelityRow {
  std::string model;
  std::string metric;
  double train = 0.0;
  double test = 0.0;
};

struct FidelityReport {
  std::vector<FidelityRow> rows;
  double value(const std::string& model, const std::string& metric, bool test = true) const;
};

/// Learned stand-in for the real environment: initial-state mixtures,
/// EA-CGMM transition joints, and reward/cost regressors behind the same
/// reset/step contract. Immutable once fitted except for the rollout cursor;
/// share one instance across workers only with per-worker RNG streams and
/// per-worker cursors (or clone per worker).
class VirtualCmdp : public Cmdp {
 public:
  std::size_t state_dim() const override { return env_cfg.state_dim(); }
  std::size_t action_dim() const override { return env_cfg.action_dim(); }
  std::size_t episode_length() const override {
    return static_cast<std::size_t>(env_cfg.slots_per_episode);
  }
  CmdpState reset(math::SeededRng& rng) override;
  StepOutcome step(const RawAction& action, math::SeededRng& rng) override;

  /// Re-decodes the transition joints at a fresh latent (config flag path).
  void redecode_transitions(math::SeededRng& rng);

  env::EnvConfig env_cfg;
  std::uint64_t env_hash = 0;
  Gmm init_r, init_q;
  Gmm channel_joint;  // over (r', r), scaled
  Gmm queue_joint;    // over (q', a, r, q), scaled
  nn::Regressor reward_model, cost_model;
  nn::Scaler r_scaler, q_scaler;
  double alpha_channel = 0.03;
  double alpha_queue = 0.03;
  double cost_threshold = 0.005;
  bool redecode_per_episode = false;

  // retained so per-episode re-decode stays available after loading
  std::optional<VaeChmdn> channel_vae, queue_vae;

  void finalize();  // caches chi-squared thresholds; call after fields change

 private:
  CmdpState state_;
  bool has_state_ = false;
  double chi2_channel_ = 0.0;
  double chi2_queue_ = 0.0;
};

/// Row indices of episode-initial states in a sequentially collected dataset.
std::vector<std::size_t> initial_state_rows(std::size_t count, std::size_t episode_len);

/// Trains every learned piece from offline tuples. Requires the dataset hash
/// to match cfg and at least 10 * max(state, action) tuples.
VirtualCmdp fit_virtual_cmdp(const env::TransitionDataset& ds, const env::EnvConfig& cfg,
                             const VirtualFitConfig& fit, FidelityReport* report);

/// Bundle persistence: a JSON manifest with serialized GMM blocks plus
/// sibling regressor model files. Loading verifies the env-config hash.
void save_virtual_cmdp(const VirtualCmdp& v, const std::string& manifest_path);
VirtualCmdp load_virtual_cmdp(const std::string& manifest_path,
                              std::optional<std::uint64_t> expected_hash);

nlohmann::json gmm_to_json(const Gmm& g);
Gmm gmm_from_json(const nlohmann::json& j);

}  // namespace deterra::gen
