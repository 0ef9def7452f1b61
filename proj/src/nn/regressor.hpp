#pragma once

#include <string>

#include "nn/kan.hpp"
#include "nn/mlp.hpp"
#include "nn/scaler.hpp"

namespace deterra::nn {

enum class Loss { kMse, kNll };

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch = 256;
  std::size_t epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  Loss loss = Loss::kMse;
};

enum class RegressorKind { kMlp, kKan };

/// Scalar-output regressor bundling the trained network with its input scaler
/// and target standardization. Predictions come back in raw target units.
struct Regressor {
  RegressorKind kind = RegressorKind::kMlp;
  MlpSpec mlp_spec;
  ParamVector mlp_params;
  KanModel kan;
  Scaler input_scaler;
  TargetScaler target;

  std::size_t input_dim() const;
  std::size_t param_count() const;
  double predict(const Vec& x_raw) const;
  Vec predict_batch(const Mat& x_raw) const;
  /// Prediction in standardized target units for a pre-scaled input row.
  Vec predict_normalized(const Mat& x_scaled) const;
};

struct FitReport {
  double train_mae = 0.0;  // normalized target units
  double test_mae = 0.0;
  double train_bias = 0.0;  // mean residual
  double test_bias = 0.0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

/// 80/20 split (seeded shuffle), target standardization from the train split,
/// minibatch Adam on MSE. Deterministic given cfg.seed. Throws on NaN loss.
Regressor fit_regressor(RegressorKind kind, const std::vector<std::size_t>& hidden_widths,
                        const KanSpec& kan_arch, const Mat& x_raw, const Vec& y_raw,
                        const TrainConfig& cfg, FitReport* report);

void save_regressor(const Regressor& model, const std::string& path);
Regressor load_regressor(const std::string& path);

}  // namespace deterra::nn
