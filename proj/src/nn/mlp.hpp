#pragma once

#include "mathcore/rng.hpp"
#include "nn/params.hpp"

namespace deterra::nn {

enum class Act { kIdentity, kTanh, kSilu, kSoftplus };

double act_eval(Act a, double x);
double act_deriv(Act a, double pre);

/// Fully connected regressor: affine layers with a shared hidden activation
/// and a separate output activation.
struct MlpSpec {
  std::vector<std::size_t> widths;  // input, hidden..., output
  Act hidden = Act::kTanh;
  Act output = Act::kIdentity;

  std::size_t num_layers() const { return widths.size() - 1; }
  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t param_count() const;
};

/// Params layout per layer: weight matrix (out x in, row-major), then bias.
ParamVector mlp_init(const MlpSpec& spec, math::SeededRng& rng);

struct MlpCache {
  std::vector<Mat> inputs;  // inputs[l] feeds layer l; inputs[0] is X
  std::vector<Mat> pre;     // pre-activations per layer
};

/// Batched forward: X is (batch x in), result (batch x out). The cache is
/// optional and required only for the backward pass.
Mat mlp_forward(const MlpSpec& spec, const ParamVector& params, const Mat& x,
                MlpCache* cache = nullptr);

/// Exact reverse-mode gradients of a scalar loss, given dL/dY. Accumulates
/// into `grad` (registry-compatible with params) and returns dL/dX.
Mat mlp_backward(const MlpSpec& spec, const ParamVector& params, const MlpCache& cache,
                 const Mat& dy, ParamVector& grad);

}  // namespace deterra::nn
