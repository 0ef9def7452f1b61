#include "nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "kernels/kernels.hpp"

namespace deterra::nn {

double act_eval(Act a, double x) {
  switch (a) {
    case Act::kIdentity: return x;
    case Act::kTanh: return std::tanh(x);
    case Act::kSilu: return x / (1.0 + std::exp(-x));
    case Act::kSoftplus: return x > 30.0 ? x : std::log1p(std::exp(x));
  }
  return x;
}

double act_deriv(Act a, double pre) {
  switch (a) {
    case Act::kIdentity: return 1.0;
    case Act::kTanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case Act::kSilu: {
      const double s = 1.0 / (1.0 + std::exp(-pre));
      return s * (1.0 + pre * (1.0 - s));
    }
    case Act::kSoftplus: return 1.0 / (1.0 + std::exp(-pre));
  }
  return 1.0;
}

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += (widths[l] + 1) * widths[l + 1];
  return n;
}

ParamVector mlp_init(const MlpSpec& spec, math::SeededRng& rng) {
  if (spec.widths.size() < 2) throw std::invalid_argument("MlpSpec needs >= 1 layer");
  for (auto w : spec.widths)
    if (w == 0) throw std::invalid_argument("MlpSpec widths must be >= 1");
  ParamVector p;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    const std::size_t fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
    const std::size_t w_idx = p.add("w" + std::to_string(l), fan_in * fan_out);
    p.add("b" + std::to_string(l), fan_out);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    double* w = p.seg(w_idx);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) w[i] = rng.uniform(-bound, bound);
  }
  return p;
}

Mat mlp_forward(const MlpSpec& spec, const ParamVector& params, const Mat& x, MlpCache* cache) {
  if (x.cols() != spec.input_dim()) throw std::invalid_argument("mlp_forward: shape mismatch");
  const std::size_t batch = x.rows();
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Mat h = x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
    const double* w = params.seg(2 * l);
    const double* b = params.seg(2 * l + 1);
    Mat pre(batch, out);
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < out; ++j) pre(i, j) = b[j];
    // pre += h * W^T  (W is out x in)
    kern::gemm_nt(h.data(), w, pre.data(), batch, in, out);
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(pre);
    }
    const Act act = (l + 1 == spec.num_layers()) ? spec.output : spec.hidden;
    if (act == Act::kIdentity) {
      h = std::move(pre);
    } else {
      Mat post(batch, out);
      for (std::size_t i = 0; i < batch * out; ++i)
        post.data()[i] = act_eval(act, pre.data()[i]);
      h = std::move(post);
    }
  }
  return h;
}

Mat mlp_backward(const MlpSpec& spec, const ParamVector& params, const MlpCache& cache,
                 const Mat& dy, ParamVector& grad) {
  if (cache.pre.size() != spec.num_layers())
    throw std::invalid_argument("mlp_backward: cache/spec mismatch");
  const std::size_t batch = dy.rows();
  Mat delta = dy;  // dL/d(post-activation of current layer)
  for (std::size_t ll = spec.num_layers(); ll-- > 0;) {
    const std::size_t in = spec.widths[ll], out = spec.widths[ll + 1];
    const Act act = (ll + 1 == spec.num_layers()) ? spec.output : spec.hidden;
    Mat dpre;
    if (act == Act::kIdentity) {
      dpre = std::move(delta);
    } else {
      const Mat& pre = cache.pre[ll];
      dpre = Mat(batch, out);
      for (std::size_t i = 0; i < batch * out; ++i)
        dpre.data()[i] = delta.data()[i] * act_deriv(act, pre.data()[i]);
    }

    // dW (out x in) += dpre^T * input ; db += column sums of dpre
    double* gw = grad.seg(2 * ll);
    double* gb = grad.seg(2 * ll + 1);
    kern::gemm_tn(dpre.data(), cache.inputs[ll].data(), gw, out, batch, in);
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < out; ++j) gb[j] += dpre(i, j);

    // dX (batch x in) = dpre * W
    Mat dx(batch, in, 0.0);
    kern::gemm_nn(dpre.data(), params.seg(2 * ll), dx.data(), batch, out, in);
    delta = std::move(dx);
  }
  return delta;
}

}  // namespace deterra::nn
