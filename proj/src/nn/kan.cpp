#include "nn/kan.hpp"

#include <cmath>
#include <stdexcept>

#include "kernels/kernels.hpp"

namespace deterra::nn {

std::size_t kan_param_count(const KanSpec& spec) {
  const std::size_t per_edge =
      static_cast<std::size_t>(spec.grid_size + spec.spline_order) + 2;
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l)
    n += spec.widths[l] * spec.widths[l + 1] * per_edge;
  return n;
}

KanModel kan_init(const KanSpec& spec, math::SeededRng& rng) {
  if (spec.widths.size() < 2) throw std::invalid_argument("KanSpec needs >= 1 layer");
  if (spec.grid_size < 1 || spec.spline_order < 1)
    throw std::invalid_argument("KanSpec: grid_size and spline_order must be >= 1");
  KanModel m;
  m.spec = spec;
  const int nb = spec.grid_size + spec.spline_order;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    m.grids.emplace_back(spec.widths[l],
                         uniform_grid(spec.lo, spec.hi, spec.grid_size, spec.spline_order));
    const std::size_t n_in = spec.widths[l], n_out = spec.widths[l + 1];
    const std::size_t wb = m.params.add("wb" + std::to_string(l), n_in * n_out);
    const std::size_t ws = m.params.add("ws" + std::to_string(l), n_in * n_out);
    const std::size_t c = m.params.add("c" + std::to_string(l), n_in * nb * n_out);
    const double bound = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    double* pwb = m.params.seg(wb);
    double* pws = m.params.seg(ws);
    double* pc = m.params.seg(c);
    for (std::size_t i = 0; i < n_in * n_out; ++i) pwb[i] = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < n_in * n_out; ++i) pws[i] = 1.0;
    for (std::size_t i = 0; i < n_in * nb * n_out; ++i) pc[i] = 0.1 * rng.normal() / nb;
  }
  return m;
}

void kan_fit_input_grids(KanModel& model, const Mat& x) {
  if (x.cols() != model.spec.input_dim())
    throw std::invalid_argument("kan_fit_input_grids: dimension mismatch");
  for (std::size_t i = 0; i < model.spec.input_dim(); ++i) {
    Vec col(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) col[r] = x(r, i);
    model.grids[0][i] = blended_grid(std::move(col), model.spec.lo, model.spec.hi,
                                     model.spec.grid_size, model.spec.spline_order,
                                     model.spec.grid_eps);
  }
}

Mat kan_forward(const KanModel& model, const Mat& x, KanCache* cache) {
  const KanSpec& spec = model.spec;
  if (x.cols() != spec.input_dim()) throw std::invalid_argument("kan_forward: shape mismatch");
  const std::size_t batch = x.rows();
  const std::size_t nb = static_cast<std::size_t>(spec.grid_size + spec.spline_order);
  if (cache) cache->layers.clear();

  Mat h = x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t n_in = spec.widths[l], n_out = spec.widths[l + 1];
    const double* wb = model.params.seg(3 * l);
    const double* ws = model.params.seg(3 * l + 1);
    const double* coef = model.params.seg(3 * l + 2);

    KanCache::Layer layer;
    layer.input = h;
    layer.silu_val = Mat(batch, n_in);
    layer.silu_der = Mat(batch, n_in);
    layer.basis = Mat(batch, n_in * nb);
    layer.dbasis = Mat(batch, n_in * nb);

    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < n_in; ++i) {
        const double v = h(b, i);
        layer.silu_val(b, i) = act_eval(Act::kSilu, v);
        layer.silu_der(b, i) = act_deriv(Act::kSilu, v);
        bspline_basis_deriv(model.grids[l][i], v, layer.basis.row(b) + i * nb,
                            layer.dbasis.row(b) + i * nb);
      }
    }

    Mat out(batch, n_out, 0.0);
    // base term: silu(X) * Wb
    kern::gemm_nn(layer.silu_val.data(), wb, out.data(), batch, n_in, n_out);

    // spline term per input dim, modulated by w_s
    layer.spline = Mat(batch, n_in * n_out);
    Mat basis_i(batch, nb);
    for (std::size_t i = 0; i < n_in; ++i) {
      for (std::size_t b = 0; b < batch; ++b)
        std::copy(layer.basis.row(b) + i * nb, layer.basis.row(b) + (i + 1) * nb,
                  basis_i.row(b));
      Mat s_i(batch, n_out, 0.0);
      kern::gemm_nn(basis_i.data(), coef + i * nb * n_out, s_i.data(), batch, nb, n_out);
      const double* ws_i = ws + i * n_out;
      for (std::size_t b = 0; b < batch; ++b) {
        double* out_b = out.row(b);
        const double* s_b = s_i.row(b);
        double* cache_b = layer.spline.row(b) + i * n_out;
        for (std::size_t j = 0; j < n_out; ++j) {
          cache_b[j] = s_b[j];
          out_b[j] += ws_i[j] * s_b[j];
        }
      }
    }

    if (cache) cache->layers.push_back(std::move(layer));
    h = std::move(out);
  }
  return h;
}

Mat kan_backward(const KanModel& model, const KanCache& cache, const Mat& dy, ParamVector& grad) {
  const KanSpec& spec = model.spec;
  if (cache.layers.size() != spec.num_layers())
    throw std::invalid_argument("kan_backward: cache/spec mismatch");
  const std::size_t batch = dy.rows();
  const std::size_t nb = static_cast<std::size_t>(spec.grid_size + spec.spline_order);

  Mat delta = dy;
  for (std::size_t ll = spec.num_layers(); ll-- > 0;) {
    const std::size_t n_in = spec.widths[ll], n_out = spec.widths[ll + 1];
    const KanCache::Layer& layer = cache.layers[ll];
    const double* wb = model.params.seg(3 * ll);
    const double* ws = model.params.seg(3 * ll + 1);
    const double* coef = model.params.seg(3 * ll + 2);
    double* gwb = grad.seg(3 * ll);
    double* gws = grad.seg(3 * ll + 1);
    double* gcoef = grad.seg(3 * ll + 2);

    // base-weight grads and the silu part of dX
    kern::gemm_tn(layer.silu_val.data(), delta.data(), gwb, n_in, batch, n_out);
    Mat dx(batch, n_in, 0.0);
    kern::gemm_nt(delta.data(), wb, dx.data(), batch, n_out, n_in);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t i = 0; i < n_in; ++i) dx(b, i) *= layer.silu_der(b, i);

    Mat t_i(batch, n_out);
    Mat basis_i(batch, nb);
    Mat db_i(batch, nb, 0.0);
    for (std::size_t i = 0; i < n_in; ++i) {
      const double* ws_i = ws + i * n_out;
      double* gws_i = gws + i * n_out;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* delta_b = delta.row(b);
        const double* spline_b = layer.spline.row(b) + i * n_out;
        double* t_b = t_i.row(b);
        for (std::size_t j = 0; j < n_out; ++j) {
          gws_i[j] += delta_b[j] * spline_b[j];
          t_b[j] = delta_b[j] * ws_i[j];
        }
        std::copy(layer.basis.row(b) + i * nb, layer.basis.row(b) + (i + 1) * nb,
                  basis_i.row(b));
      }
      // coefficient grads: B_i^T * T_i
      kern::gemm_tn(basis_i.data(), t_i.data(), gcoef + i * nb * n_out, nb, batch, n_out);
      // dB_i = T_i * C_i^T, then contract with cached basis derivatives
      db_i.fill(0.0);
      kern::gemm_nt(t_i.data(), coef + i * nb * n_out, db_i.data(), batch, n_out, nb);
      for (std::size_t b = 0; b < batch; ++b)
        dx(b, i) += kern::dot(db_i.row(b), layer.dbasis.row(b) + i * nb, nb);
    }
    delta = std::move(dx);
  }
  return delta;
}

}  // namespace deterra::nn
