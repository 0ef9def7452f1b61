#include "genmodel/vae_chmdn.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kernels/kernels.hpp"
#include "mathcore/linalg.hpp"
#include "nn/params.hpp"

namespace deterra::gen {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kDiagFloor = math::CholeskyGaussian::kDiagFloor;

// Cold-path unpack for decode_gmm.
void unpack_factor(const double* tri, std::size_t n, double cap, Mat* u) {
  *u = Mat(n, n, 0.0);
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j, ++t)
      (*u)(i, j) = (i == j) ? std::clamp(std::exp(tri[t]), kDiagFloor, cap) : tri[t];
}

struct NllGrad {
  double nll = 0.0;
};

// Flat scratch reused across rows; sized for one call's component set.
struct NllWorkspace {
  Vec logits, terms, log_det;
  Vec diag;       // comps x n clamped diagonal values
  Vec deltas;     // comps x n
  Vec residuals;  // comps x n
  std::vector<unsigned char> clamped;  // comps x n

  void resize(std::size_t comps, std::size_t n) {
    logits.resize(comps);
    terms.resize(comps);
    log_det.resize(comps);
    diag.resize(comps * n);
    deltas.resize(comps * n);
    residuals.resize(comps * n);
    clamped.resize(comps * n);
  }
};

// NLL of x under the decoded mixture and its gradient w.r.t. the raw decoder
// output row (accumulated scaled by `scale`). Works directly on the packed
// upper-triangular layout.
NllGrad nll_and_grad_row(const double* dec_out, const double* x, std::size_t n,
                         std::size_t comps, double cap, double scale, double* grad_out,
                         NllWorkspace& ws) {
  const std::size_t tri_size = n * (n + 1) / 2;
  const std::size_t block = 1 + n + tri_size;
  ws.resize(comps, n);

  double logit_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < comps; ++g) {
    ws.logits[g] = dec_out[g * block];
    logit_hi = std::max(logit_hi, ws.logits[g]);
  }
  double logit_denom = 0.0;
  for (std::size_t g = 0; g < comps; ++g) logit_denom += std::exp(ws.logits[g] - logit_hi);
  const double log_denom = logit_hi + std::log(logit_denom);

  double term_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < comps; ++g) {
    const double* base = dec_out + g * block;
    const double* mean = base + 1;
    const double* tri = base + 1 + n;
    double* delta = ws.deltas.data() + g * n;
    double* resid = ws.residuals.data() + g * n;
    double* diag = ws.diag.data() + g * n;
    unsigned char* clamped = ws.clamped.data() + g * n;
    for (std::size_t i = 0; i < n; ++i) delta[i] = x[i] - mean[i];

    double log_det = 0.0, quad = 0.0;
    const double* row = tri;
    for (std::size_t i = 0; i < n; ++i) {
      double d = std::exp(row[0]);
      unsigned char cl = 0;
      if (d < kDiagFloor) {
        d = kDiagFloor;
        cl = 1;
      } else if (d > cap) {
        d = cap;
        cl = 1;
      }
      diag[i] = d;
      clamped[i] = cl;
      log_det += std::log(d);
      double acc = d * delta[i];
      const std::size_t len = n - i - 1;
      if (len > 0) acc += kern::dot(row + 1, delta + i + 1, len);
      resid[i] = acc;
      quad += acc * acc;
      row += n - i;
    }
    ws.log_det[g] = log_det;
    ws.terms[g] = (ws.logits[g] - log_denom) - 0.5 * static_cast<double>(n) * kLog2Pi -
                  0.5 * quad + log_det;
    term_hi = std::max(term_hi, ws.terms[g]);
  }
  double mix_denom = 0.0;
  for (std::size_t g = 0; g < comps; ++g) mix_denom += std::exp(ws.terms[g] - term_hi);
  const double log_mix = term_hi + std::log(mix_denom);

  NllGrad out;
  out.nll = -log_mix;
  if (scale == 0.0) return out;

  for (std::size_t g = 0; g < comps; ++g) {
    const double gamma = std::exp(ws.terms[g] - log_mix);
    const double pi_g = std::exp(ws.logits[g] - log_denom);
    const double* base = dec_out + g * block;
    const double* tri = base + 1 + n;
    const double* delta = ws.deltas.data() + g * n;
    const double* resid = ws.residuals.data() + g * n;
    const double* diag = ws.diag.data() + g * n;
    const unsigned char* clamped = ws.clamped.data() + g * n;
    double* grad = grad_out + g * block;
    grad[0] += scale * (pi_g - gamma);

    // d(-logp)/dmu_j = -(U^T r)_j and the triangular-entry gradients in one
    // sweep over the packed rows
    double* dmu = grad + 1;
    double* dtri = grad + 1 + n;
    const double* row = tri;
    double* drow = dtri;
    const double coeff = scale * gamma;
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = resid[i];
      dmu[i] -= scale * gamma * diag[i] * ri;  // diagonal part of U^T r
      if (!clamped[i]) drow[0] += coeff * (ri * delta[i] * diag[i] - 1.0);
      const std::size_t len = n - i - 1;
      if (len > 0) {
        // off-diagonal: dU_ij = gamma r_i delta_j ; dmu_j -= gamma U_ij r_i
        kern::axpy(coeff * ri, delta + i + 1, drow + 1, len);
        kern::axpy(-coeff * ri, row + 1, dmu + i + 1, len);
      }
      row += n - i;
      drow += n - i;
    }
  }
  return out;
}

}  // namespace

nn::MlpSpec VaeChmdnSpec::encoder_spec() const {
  nn::MlpSpec s;
  s.widths.push_back(input_dim);
  s.widths.insert(s.widths.end(), encoder_hidden.begin(), encoder_hidden.end());
  s.widths.push_back(2 * latent_dim);
  s.hidden = nn::Act::kTanh;
  s.output = nn::Act::kIdentity;
  return s;
}

nn::MlpSpec VaeChmdnSpec::decoder_spec() const {
  nn::MlpSpec s;
  s.widths.push_back(latent_dim);
  s.widths.insert(s.widths.end(), decoder_hidden.begin(), decoder_hidden.end());
  s.widths.push_back(decoder_output_dim());
  s.hidden = nn::Act::kTanh;
  s.output = nn::Act::kIdentity;
  return s;
}

VaeChmdn vae_chmdn_init(const VaeChmdnSpec& spec, math::SeededRng& rng) {
  if (spec.input_dim == 0 || spec.latent_dim == 0 || spec.components == 0)
    throw std::invalid_argument("VaeChmdnSpec: zero dimension");
  VaeChmdn m;
  m.spec = spec;
  m.enc_params = nn::mlp_init(spec.encoder_spec(), rng);
  m.dec_params = nn::mlp_init(spec.decoder_spec(), rng);
  return m;
}

double vae_loss_and_grad(const VaeChmdn& model, const Mat& batch, const Mat& eps,
                         double diag_cap, nn::ParamVector* enc_grad,
                         nn::ParamVector* dec_grad) {
  const VaeChmdnSpec& spec = model.spec;
  const std::size_t bsz = batch.rows();
  const std::size_t zd = spec.latent_dim;
  if (batch.cols() != spec.input_dim || eps.rows() != bsz || eps.cols() != zd)
    throw std::invalid_argument("vae_loss_and_grad: shape mismatch");
  const double scale = 1.0 / static_cast<double>(bsz);

  // encode
  nn::MlpCache enc_cache;
  const Mat enc_out = nn::mlp_forward(spec.encoder_spec(), model.enc_params, batch, &enc_cache);

  // reparameterize
  Mat z(bsz, zd);
  Mat sigma(bsz, zd);
  double kl = 0.0;
  for (std::size_t i = 0; i < bsz; ++i) {
    for (std::size_t j = 0; j < zd; ++j) {
      const double mu = enc_out(i, j);
      const double log_sig = enc_out(i, zd + j);
      const double sig = std::exp(log_sig);
      sigma(i, j) = sig;
      z(i, j) = mu + sig * eps(i, j);
      kl += 0.5 * (mu * mu + sig * sig - 1.0 - 2.0 * log_sig);
    }
  }
  kl *= scale;

  // decode
  nn::MlpCache dec_cache;
  const Mat dec_out = nn::mlp_forward(spec.decoder_spec(), model.dec_params, z, &dec_cache);

  // mixture NLL per row and gradient w.r.t. decoder outputs
  Mat ddec(bsz, spec.decoder_output_dim(), 0.0);
  double nll = 0.0;
  NllWorkspace ws;
  for (std::size_t i = 0; i < bsz; ++i) {
    nll += scale * nll_and_grad_row(dec_out.row(i), batch.row(i), spec.input_dim,
                                    spec.components, diag_cap, scale, ddec.row(i), ws)
                       .nll;
  }
  const double loss = kl + nll;
  if (!std::isfinite(loss)) throw std::runtime_error("vae_chmdn: non-finite loss");

  // backward through the decoder to z
  const Mat dz = nn::mlp_backward(spec.decoder_spec(), model.dec_params, dec_cache, ddec,
                                  *dec_grad);

  // KL gradient plus the sampled-path gradient into the encoder outputs
  Mat denc(bsz, 2 * zd);
  for (std::size_t i = 0; i < bsz; ++i) {
    for (std::size_t j = 0; j < zd; ++j) {
      const double mu = enc_out(i, j);
      const double sig = sigma(i, j);
      denc(i, j) = dz(i, j) + scale * mu;
      denc(i, zd + j) = dz(i, j) * sig * eps(i, j) + scale * (sig * sig - 1.0);
    }
  }
  nn::mlp_backward(spec.encoder_spec(), model.enc_params, enc_cache, denc, *enc_grad);
  return loss;
}

VaeChmdn vae_chmdn_train(const VaeChmdnSpec& spec, const Mat& data, const VaeTrainConfig& cfg,
                         VaeTrainReport* report) {
  if (data.rows() < 4) throw std::invalid_argument("vae_chmdn_train: too few samples");
  math::SeededRng rng(cfg.seed, 301);
  VaeChmdn model = vae_chmdn_init(spec, rng);

  nn::AdamState enc_adam(model.enc_params.size());
  nn::AdamState dec_adam(model.dec_params.size());
  nn::ParamVector enc_grad = model.enc_params.zeros_like();
  nn::ParamVector dec_grad = model.dec_params.zeros_like();

  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::min<std::size_t>(cfg.batch, data.rows());
  if (report) report->loss_per_epoch.clear();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < data.rows(); start += bs) {
      const std::size_t count = std::min(bs, data.rows() - start);
      Mat xb(count, data.cols());
      for (std::size_t i = 0; i < count; ++i) {
        Vec row = data.row_vec(order[start + i]);
        if (cfg.input_jitter > 0.0)
          for (auto& v : row) v += cfg.input_jitter * rng.normal();
        xb.set_row(i, row);
      }
      Mat eps(count, spec.latent_dim);
      for (std::size_t i = 0; i < count * spec.latent_dim; ++i) eps.data()[i] = rng.normal();

      std::fill(enc_grad.values.begin(), enc_grad.values.end(), 0.0);
      std::fill(dec_grad.values.begin(), dec_grad.values.end(), 0.0);
      epoch_loss +=
          vae_loss_and_grad(model, xb, eps, cfg.diag_cap, &enc_grad, &dec_grad);
      ++batches;

      // joint global-norm clip across encoder and decoder
      const double norm_sq_total = norm_sq(enc_grad.values) + norm_sq(dec_grad.values);
      const double norm = std::sqrt(norm_sq_total);
      if (norm > cfg.grad_clip && norm > 0.0) {
        const double s = cfg.grad_clip / norm;
        for (auto& g : enc_grad.values) g *= s;
        for (auto& g : dec_grad.values) g *= s;
      }
      enc_adam.step(model.enc_params.values, enc_grad.values, cfg.lr, cfg.beta1, cfg.beta2,
                    cfg.adam_eps);
      dec_adam.step(model.dec_params.values, dec_grad.values, cfg.lr, cfg.beta1, cfg.beta2,
                    cfg.adam_eps);
    }
    if (report) report->loss_per_epoch.push_back(epoch_loss / static_cast<double>(batches));
  }
  if (report) report->final_nll = vae_chmdn_nll(model, data, cfg.diag_cap);
  return model;
}

Gmm decode_gmm(const VaeChmdn& model, const Vec& z, double diag_cap) {
  const VaeChmdnSpec& spec = model.spec;
  if (z.size() != spec.latent_dim) throw std::invalid_argument("decode_gmm: latent dim mismatch");
  Mat zin(1, spec.latent_dim);
  zin.set_row(0, z);
  const Mat out = nn::mlp_forward(spec.decoder_spec(), model.dec_params, zin);
  const std::size_t n = spec.input_dim;
  const std::size_t block = 1 + n + spec.tri_size();

  Gmm gmm;
  Vec logits(spec.components);
  for (std::size_t g = 0; g < spec.components; ++g) logits[g] = out(0, g * block);
  const double hi = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - hi);
  gmm.weights.resize(spec.components);
  for (std::size_t g = 0; g < spec.components; ++g)
    gmm.weights[g] = std::exp(logits[g] - hi) / denom;

  for (std::size_t g = 0; g < spec.components; ++g) {
    const double* base = out.row(0) + g * block;
    Vec mean(base + 1, base + 1 + n);
    Mat u;
    unpack_factor(base + 1 + n, n, diag_cap, &u);
    gmm.comps.emplace_back(std::move(mean), std::move(u));
  }
  gmm.validate();
  return gmm;
}

Gmm generate_gmm(const VaeChmdn& model, math::SeededRng& rng, double diag_cap) {
  Vec z(model.spec.latent_dim);
  rng.fill_normal(z);
  return decode_gmm(model, z, diag_cap);
}

double vae_chmdn_nll(const VaeChmdn& model, const Mat& data, double diag_cap) {
  const VaeChmdnSpec& spec = model.spec;
  const Mat enc_out = nn::mlp_forward(spec.encoder_spec(), model.enc_params, data);
  Mat z(data.rows(), spec.latent_dim);
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < spec.latent_dim; ++j) z(i, j) = enc_out(i, j);
  const Mat dec_out = nn::mlp_forward(spec.decoder_spec(), model.dec_params, z);
  double nll = 0.0;
  NllWorkspace ws;
  for (std::size_t i = 0; i < data.rows(); ++i)
    nll += nll_and_grad_row(dec_out.row(i), data.row(i), spec.input_dim, spec.components,
                            diag_cap, 0.0, nullptr, ws)
               .nll;
  return nll / static_cast<double>(data.rows());
}

}  // namespace deterra::gen
