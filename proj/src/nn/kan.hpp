#pragma once

#include "mathcore/rng.hpp"
#include "nn/bspline.hpp"
#include "nn/mlp.hpp"
#include "nn/params.hpp"

namespace deterra::nn {

/// Network of learnable univariate edge functions
///   phi(x) = w_b * silu(x) + w_s * sum_i c_i B_i(x)
/// summed at nodes. Inputs are expected pre-normalized into [lo, hi]; values
/// outside are clamped onto the grid (the silu term still sees the raw value).
struct KanSpec {
  std::vector<std::size_t> widths;
  int grid_size = 10;
  int spline_order = 3;
  double grid_eps = 0.1;
  double lo = -1.0;
  double hi = 1.0;

  std::size_t num_layers() const { return widths.size() - 1; }
  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
};

/// sum_l n_l * n_{l+1} * (grid_size + spline_order + 2)
std::size_t kan_param_count(const KanSpec& spec);

struct KanModel {
  KanSpec spec;
  std::vector<std::vector<BsplineGrid>> grids;  // [layer][input dim]
  ParamVector params;
};

/// Uniform grids everywhere; params per layer: w_b (in x out), w_s (in x out),
/// spline coefficients (in x num_basis x out).
KanModel kan_init(const KanSpec& spec, math::SeededRng& rng);

/// Replaces the first-layer grids with data-quantile grids blended toward
/// uniform by grid_eps. Spline coefficients are expected untrained.
void kan_fit_input_grids(KanModel& model, const Mat& x);

struct KanCache {
  struct Layer {
    Mat input;       // batch x n_in
    Mat silu_val;    // batch x n_in
    Mat silu_der;    // batch x n_in
    Mat basis;       // batch x (n_in * nb)
    Mat dbasis;      // batch x (n_in * nb)
    Mat spline;      // batch x (n_in * n_out), per-input spline outputs
  };
  std::vector<Layer> layers;
};

Mat kan_forward(const KanModel& model, const Mat& x, KanCache* cache = nullptr);

/// Exact gradients; accumulates into grad (same registry as model.params)
/// and returns dL/dX.
Mat kan_backward(const KanModel& model, const KanCache& cache, const Mat& dy, ParamVector& grad);

}  // namespace deterra::nn
