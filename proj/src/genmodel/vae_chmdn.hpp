#pragma once

#include "genmodel/gmm.hpp"
#include "nn/mlp.hpp"

namespace deterra::gen {

/// Encoder maps an observation to (mu_en, log sigma_en); the decoder is a
/// mixture density head emitting, per component, a logit weight, a mean
/// vector, and the packed upper triangle of the precision Cholesky factor
/// (diagonal through exp, floored).
struct VaeChmdnSpec {
  std::size_t input_dim = 0;
  std::size_t latent_dim = 8;
  std::size_t components = 8;  // G
  std::vector<std::size_t> encoder_hidden{64};
  std::vector<std::size_t> decoder_hidden{64};

  std::size_t tri_size() const { return input_dim * (input_dim + 1) / 2; }
  std::size_t decoder_output_dim() const { return components * (1 + input_dim + tri_size()); }
  nn::MlpSpec encoder_spec() const;
  nn::MlpSpec decoder_spec() const;
};

struct VaeChmdn {
  VaeChmdnSpec spec;
  nn::ParamVector enc_params;
  nn::ParamVector dec_params;
};

struct VaeTrainConfig {
  double lr = 1e-3;
  std::size_t batch = 64;
  std::size_t epochs = 300;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 10.0;
  double diag_cap = 1e4;      // upper clamp on exp(raw) diagonal entries
  double input_jitter = 0.0;  // training-time noise, in scaled units
  std::uint64_t seed = 0;
};

struct VaeTrainReport {
  Vec loss_per_epoch;
  double final_nll = 0.0;  // mean NLL over the data, no KL term
};

VaeChmdn vae_chmdn_init(const VaeChmdnSpec& spec, math::SeededRng& rng);

/// KL(q(z|x) || N(0,I)) plus the negative log-likelihood of x under the
/// decoded GMM, averaged over the batch; eps supplies the reparameterization
/// noise row-per-sample. Gradients accumulate into enc_grad/dec_grad.
/// Throws std::runtime_error on a non-finite loss.
double vae_loss_and_grad(const VaeChmdn& model, const Mat& batch, const Mat& eps,
                         double diag_cap, nn::ParamVector* enc_grad,
                         nn::ParamVector* dec_grad);

/// Minibatch Adam on the ELBO-style loss with global-norm gradient clipping.
/// Deterministic given cfg.seed.
VaeChmdn vae_chmdn_train(const VaeChmdnSpec& spec, const Mat& data, const VaeTrainConfig& cfg,
                         VaeTrainReport* report = nullptr);

/// One decoder pass at the given latent input.
Gmm decode_gmm(const VaeChmdn& model, const Vec& z, double diag_cap = 1e4);

/// decode_gmm at z ~ N(0, I).
Gmm generate_gmm(const VaeChmdn& model, math::SeededRng& rng, double diag_cap = 1e4);

/// Mean NLL of rows of data under the per-sample decoded mixtures with
/// deterministic z = mu_en (no sampling); used for held-out reporting.
double vae_chmdn_nll(const VaeChmdn& model, const Mat& data, double diag_cap = 1e4);

}  // namespace deterra::gen
