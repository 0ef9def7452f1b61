#include "genmodel/virtual_cmdp.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "core/bytes.hpp"
#include "mathcore/mmd.hpp"
#include "mathcore/special.hpp"

namespace deterra::gen {

namespace fs = std::filesystem;
using nlohmann::json;

double FidelityReport::value(const std::string& model, const std::string& metric,
                             bool test) const {
  for (const auto& r : rows)
    if (r.model == model && r.metric == metric) return test ? r.test : r.train;
  throw std::out_of_range("FidelityReport: no row " + model + "/" + metric);
}

void VirtualCmdp::finalize() {
  chi2_channel_ =
      math::chi2_quantile(static_cast<int>(channel_joint.dim() - env_cfg.pbm_dim()),
                          alpha_channel);
  const std::size_t q_dim = 2 * static_cast<std::size_t>(env_cfg.num_ues);
  chi2_queue_ =
      math::chi2_quantile(static_cast<int>(queue_joint.dim() - q_dim), alpha_queue);
}

CmdpState VirtualCmdp::reset(math::SeededRng& rng) {
  if (redecode_per_episode && channel_vae && queue_vae) redecode_transitions(rng);
  const Vec r_scaled = gmm_sample(init_r, rng);
  const Vec q_scaled = gmm_sample(init_q, rng);
  CmdpState s;
  s.r = r_scaler.invert(r_scaled);
  for (auto& v : s.r) v = std::max(v, 0.0);
  const Vec q_raw = q_scaler.invert(q_scaled);
  const std::size_t u_count = static_cast<std::size_t>(env_cfg.num_ues);
  s.q_buf.resize(u_count);
  s.q_urg.resize(u_count);
  for (std::size_t u = 0; u < u_count; ++u) {
    s.q_buf[u] = std::max(0.0, std::round(q_raw[u]));
    s.q_urg[u] = std::min(std::max(0.0, std::round(q_raw[u_count + u])), s.q_buf[u]);
  }
  state_ = s;
  has_state_ = true;
  return s;
}

void VirtualCmdp::redecode_transitions(math::SeededRng& rng) {
  channel_joint = generate_gmm(*channel_vae, rng);
  queue_joint = generate_gmm(*queue_vae, rng);
  finalize();
}

StepOutcome VirtualCmdp::step(const RawAction& action, math::SeededRng& rng) {
  if (!has_state_) throw std::runtime_error("VirtualCmdp::step before reset");
  const std::size_t u_count = static_cast<std::size_t>(env_cfg.num_ues);
  const Vec a_vec = action.to_vector();
  Vec x = state_.to_vector();
  x.insert(x.end(), a_vec.begin(), a_vec.end());

  StepOutcome out;
  out.reward = reward_model.predict(x);
  out.cost_agg = std::clamp(cost_model.predict(x), 0.0, 1.0);
  out.cost_per_user.assign(u_count, out.cost_agg);
  out.vio.assign(u_count, 0);
  out.drop.assign(u_count, 0);
  out.tx.assign(u_count, 0);
  out.arrivals.assign(u_count, 0);
  out.bits_served.assign(u_count, 0.0);

  // channel block: condition on r_t alone (the joint carries no action dims)
  const Vec r_cond = r_scaler.apply(state_.r);
  const EaCgmmResult ch_inf = ea_cgmm_infer_with_threshold(
      channel_joint, math::BlockSplit{state_.r.size()}, r_cond, chi2_channel_);
  const Vec r_next_scaled = gmm_sample(ch_inf.conditional, rng);

  // queue block: condition on (a_t, s_t)
  Vec q_now(2 * u_count);
  for (std::size_t u = 0; u < u_count; ++u) {
    q_now[u] = state_.q_buf[u];
    q_now[u_count + u] = state_.q_urg[u];
  }
  const Vec q_scaled_now = q_scaler.apply(q_now);
  Vec w = a_vec;
  w.insert(w.end(), r_cond.begin(), r_cond.end());
  w.insert(w.end(), q_scaled_now.begin(), q_scaled_now.end());
  const EaCgmmResult q_inf = ea_cgmm_infer_with_threshold(
      queue_joint, math::BlockSplit{2 * u_count}, w, chi2_queue_);
  const Vec q_next_scaled = gmm_sample(q_inf.conditional, rng);

  CmdpState next;
  next.r = r_scaler.invert(r_next_scaled);
  for (auto& v : next.r) v = std::max(v, 0.0);
  const Vec q_next_raw = q_scaler.invert(q_next_scaled);
  next.q_buf.resize(u_count);
  next.q_urg.resize(u_count);
  for (std::size_t u = 0; u < u_count; ++u) {
    next.q_buf[u] = std::max(0.0, std::round(q_next_raw[u]));
    next.q_urg[u] =
        std::min(std::max(0.0, std::round(q_next_raw[u_count + u])), next.q_buf[u]);
  }
  out.next_state = next;
  state_ = std::move(next);
  return out;
}

namespace {

Mat stack_rows(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) out.set_row(i, a.row_vec(i));
  for (std::size_t i = 0; i < b.rows(); ++i) out.set_row(a.rows() + i, b.row_vec(i));
  return out;
}

Mat slice_cols(const Mat& m, std::size_t lo, std::size_t count) {
  Mat out(m.rows(), count);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = m(i, lo + j);
  return out;
}

}  // namespace

std::vector<std::size_t> initial_state_rows(std::size_t count, std::size_t episode_len) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < count; i += episode_len) rows.push_back(i);
  return rows;
}

VirtualCmdp fit_virtual_cmdp(const env::TransitionDataset& ds, const env::EnvConfig& cfg,
                             const VirtualFitConfig& fit, FidelityReport* report) {
  if (ds.env_hash != cfg.hash())
    throw std::invalid_argument("fit_virtual_cmdp: dataset/env-config hash mismatch");
  const std::size_t min_tuples = 10 * std::max(ds.state_dim, ds.action_dim);
  if (ds.count() < min_tuples)
    throw std::invalid_argument("fit_virtual_cmdp: insufficient data (< 10*max(dim) tuples)");

  const std::size_t r_dim = cfg.pbm_dim();
  const std::size_t u_count = static_cast<std::size_t>(cfg.num_ues);
  const std::size_t q_dim = 2 * u_count;
  const std::size_t a_dim = ds.action_dim;

  VirtualCmdp v;
  v.env_cfg = cfg;
  v.env_hash = cfg.hash();
  v.alpha_channel = fit.alpha;
  v.alpha_queue = fit.queue_alpha();
  v.cost_threshold = fit.cost_threshold;
  v.redecode_per_episode = fit.redecode_per_episode;

  // block scalers over current and next states together
  const Mat r_now = slice_cols(ds.states, 0, r_dim);
  const Mat r_next = slice_cols(ds.next_states, 0, r_dim);
  const Mat q_now = slice_cols(ds.states, r_dim, q_dim);
  const Mat q_next = slice_cols(ds.next_states, r_dim, q_dim);
  v.r_scaler = nn::fit_scaler(stack_rows(r_now, r_next));
  v.q_scaler = nn::fit_scaler(stack_rows(q_now, q_next));

  // reward and cost regressors on raw (s, a)
  Mat xsa(ds.count(), ds.state_dim + a_dim);
  for (std::size_t i = 0; i < ds.count(); ++i) {
    for (std::size_t j = 0; j < ds.state_dim; ++j) xsa(i, j) = ds.states(i, j);
    for (std::size_t j = 0; j < a_dim; ++j) xsa(i, ds.state_dim + j) = ds.actions(i, j);
  }
  nn::KanSpec kan_arch;
  kan_arch.widths = fit.regressor_hidden;
  kan_arch.grid_size = fit.kan_grid;
  kan_arch.spline_order = fit.kan_order;
  kan_arch.grid_eps = fit.kan_grid_eps;
  nn::FitReport reward_rep, cost_rep;
  nn::TrainConfig reg_cfg = fit.regressor_train;
  reg_cfg.seed = fit.seed * 1000 + 1;
  v.reward_model = nn::fit_regressor(fit.regressor_kind, fit.regressor_hidden, kan_arch, xsa,
                                     ds.rewards, reg_cfg, &reward_rep);
  reg_cfg.seed = fit.seed * 1000 + 2;
  v.cost_model = nn::fit_regressor(fit.regressor_kind, fit.regressor_hidden, kan_arch, xsa,
                                   ds.costs, reg_cfg, &cost_rep);

  // initial states: one per collected episode
  const std::vector<std::size_t> init_rows = initial_state_rows(ds.count(), fit.episode_len);
  Mat r0(init_rows.size(), r_dim), q0(init_rows.size(), q_dim);
  for (std::size_t i = 0; i < init_rows.size(); ++i) {
    const double* row = ds.states.row(init_rows[i]);
    r0.set_row(i, v.r_scaler.apply(Vec(row, row + r_dim)));
    q0.set_row(i, v.q_scaler.apply(Vec(row + r_dim, row + r_dim + q_dim)));
  }

  VaeChmdnSpec init_r_spec;
  init_r_spec.input_dim = r_dim;
  init_r_spec.latent_dim = fit.latent_dim;
  init_r_spec.components = fit.init_components;
  init_r_spec.encoder_hidden = fit.vae_hidden;
  init_r_spec.decoder_hidden = fit.vae_hidden;
  VaeTrainConfig vcfg = fit.vae_train;
  vcfg.seed = fit.seed * 1000 + 3;
  const VaeChmdn init_r_vae = vae_chmdn_train(init_r_spec, r0, vcfg);

  VaeChmdnSpec init_q_spec = init_r_spec;
  init_q_spec.input_dim = q_dim;
  vcfg.seed = fit.seed * 1000 + 4;
  const VaeChmdn init_q_vae = vae_chmdn_train(init_q_spec, q0, vcfg);

  // transition joints: train on the first 80%, hold out the rest for the
  // one-step fidelity numbers
  const std::size_t n_train = (ds.count() * 8) / 10;
  Mat ch_train(n_train, 2 * r_dim);
  Mat qu_train(n_train, q_dim + a_dim + r_dim + q_dim);
  for (std::size_t i = 0; i < n_train; ++i) {
    const Vec rn = v.r_scaler.apply(Vec(ds.next_states.row(i), ds.next_states.row(i) + r_dim));
    const Vec rc = v.r_scaler.apply(Vec(ds.states.row(i), ds.states.row(i) + r_dim));
    for (std::size_t j = 0; j < r_dim; ++j) {
      ch_train(i, j) = rn[j];
      ch_train(i, r_dim + j) = rc[j];
    }
    const Vec qn = v.q_scaler.apply(
        Vec(ds.next_states.row(i) + r_dim, ds.next_states.row(i) + r_dim + q_dim));
    const Vec qc =
        v.q_scaler.apply(Vec(ds.states.row(i) + r_dim, ds.states.row(i) + r_dim + q_dim));
    std::size_t col = 0;
    for (std::size_t j = 0; j < q_dim; ++j) qu_train(i, col++) = qn[j];
    for (std::size_t j = 0; j < a_dim; ++j) qu_train(i, col++) = ds.actions(i, j);
    for (std::size_t j = 0; j < r_dim; ++j) qu_train(i, col++) = rc[j];
    for (std::size_t j = 0; j < q_dim; ++j) qu_train(i, col++) = qc[j];
  }

  VaeChmdnSpec ch_spec = init_r_spec;
  ch_spec.input_dim = 2 * r_dim;
  ch_spec.components = fit.trans_components;
  vcfg.seed = fit.seed * 1000 + 5;
  v.channel_vae = vae_chmdn_train(ch_spec, ch_train, vcfg);

  VaeChmdnSpec qu_spec = init_r_spec;
  qu_spec.input_dim = q_dim + a_dim + r_dim + q_dim;
  qu_spec.components = fit.trans_components;
  vcfg.seed = fit.seed * 1000 + 6;
  v.queue_vae = vae_chmdn_train(qu_spec, qu_train, vcfg);

  // decode the mixtures once at a fixed latent seed for reproducible rollouts
  math::SeededRng decode_rng(fit.seed, 909);
  v.init_r = generate_gmm(init_r_vae, decode_rng);
  v.init_q = generate_gmm(init_q_vae, decode_rng);
  v.channel_joint = generate_gmm(*v.channel_vae, decode_rng);
  v.queue_joint = generate_gmm(*v.queue_vae, decode_rng);
  v.finalize();

  if (report) {
    report->rows.push_back({"reward", "mae_norm", reward_rep.train_mae, reward_rep.test_mae});
    report->rows.push_back({"cost", "mae_norm", cost_rep.train_mae, cost_rep.test_mae});
    report->rows.push_back(
        {"reward", "bias_norm", reward_rep.train_bias, reward_rep.test_bias});
    report->rows.push_back({"cost", "bias_norm", cost_rep.train_bias, cost_rep.test_bias});

    // init-model MMD in the scaled domain: train = split-half calibration of
    // the data, test = model samples against the data
    math::SeededRng mmd_rng(fit.seed, 911);
    for (int which = 0; which < 2; ++which) {
      const Mat& data = which == 0 ? r0 : q0;
      const Gmm& g = which == 0 ? v.init_r : v.init_q;
      const std::size_t half = data.rows() / 2;
      Mat a(half, data.cols()), b(half, data.cols()), model_s(2 * half, data.cols());
      for (std::size_t i = 0; i < half; ++i) {
        a.set_row(i, data.row_vec(i));
        b.set_row(i, data.row_vec(half + i));
      }
      for (std::size_t i = 0; i < 2 * half; ++i) model_s.set_row(i, gmm_sample(g, mmd_rng));
      Mat full(2 * half, data.cols());
      for (std::size_t i = 0; i < 2 * half; ++i) full.set_row(i, data.row_vec(i));
      const double bw = math::median_heuristic_bandwidth(full, model_s);
      const double calib = math::mmd_sq(a, b, bw);
      const double vs_model = math::mmd_sq(full, model_s, bw);
      report->rows.push_back(
          {which == 0 ? "init_r" : "init_q", "mmd2", calib, vs_model});
    }

    // one-step transition MAE on held-out tuples, scaled units; train column
    // is the single-draw number, test column the mean of mmd_draws draws
    const std::size_t n_eval =
        std::min(fit.fidelity_eval_tuples, ds.count() - n_train);
    double ch_single = 0.0, ch_avg = 0.0, qu_single = 0.0, qu_avg = 0.0;
    math::SeededRng eval_rng(fit.seed, 913);
    for (std::size_t e = 0; e < n_eval; ++e) {
      const std::size_t i = n_train + e;
      const Vec rc = v.r_scaler.apply(Vec(ds.states.row(i), ds.states.row(i) + r_dim));
      const Vec rn =
          v.r_scaler.apply(Vec(ds.next_states.row(i), ds.next_states.row(i) + r_dim));
      const EaCgmmResult ch_inf = ea_cgmm_infer(
          v.channel_joint, math::BlockSplit{r_dim}, rc, v.alpha_channel);
      Vec mean_draw(r_dim, 0.0);
      for (std::size_t t = 0; t < fit.mmd_draws; ++t) {
        const Vec draw = gmm_sample(ch_inf.conditional, eval_rng);
        if (t == 0) {
          double acc = 0.0;
          for (std::size_t j = 0; j < r_dim; ++j) acc += std::fabs(draw[j] - rn[j]);
          ch_single += acc / static_cast<double>(r_dim);
        }
        add_scaled(mean_draw, 1.0 / static_cast<double>(fit.mmd_draws), draw);
      }
      double acc = 0.0;
      for (std::size_t j = 0; j < r_dim; ++j) acc += std::fabs(mean_draw[j] - rn[j]);
      ch_avg += acc / static_cast<double>(r_dim);

      const Vec qc =
          v.q_scaler.apply(Vec(ds.states.row(i) + r_dim, ds.states.row(i) + r_dim + q_dim));
      const Vec qn = v.q_scaler.apply(
          Vec(ds.next_states.row(i) + r_dim, ds.next_states.row(i) + r_dim + q_dim));
      Vec w(ds.actions.row(i), ds.actions.row(i) + a_dim);
      w.insert(w.end(), rc.begin(), rc.end());
      w.insert(w.end(), qc.begin(), qc.end());
      const EaCgmmResult qu_inf =
          ea_cgmm_infer(v.queue_joint, math::BlockSplit{q_dim}, w, v.alpha_queue);
      Vec q_mean(q_dim, 0.0);
      for (std::size_t t = 0; t < fit.mmd_draws; ++t) {
        const Vec draw = gmm_sample(qu_inf.conditional, eval_rng);
        if (t == 0) {
          double acc2 = 0.0;
          for (std::size_t j = 0; j < q_dim; ++j) acc2 += std::fabs(draw[j] - qn[j]);
          qu_single += acc2 / static_cast<double>(q_dim);
        }
        add_scaled(q_mean, 1.0 / static_cast<double>(fit.mmd_draws), draw);
      }
      double acc2 = 0.0;
      for (std::size_t j = 0; j < q_dim; ++j) acc2 += std::fabs(q_mean[j] - qn[j]);
      qu_avg += acc2 / static_cast<double>(q_dim);
    }
    const double inv = 1.0 / static_cast<double>(n_eval);
    report->rows.push_back({"transition_r", "mae_norm", ch_single * inv, ch_avg * inv});
    report->rows.push_back({"transition_q", "mae_norm", qu_single * inv, qu_avg * inv});
  }
  return v;
}

json gmm_to_json(const Gmm& g) {
  json comps = json::array();
  for (const auto& c : g.comps) {
    Vec packed;
    const std::size_t n = c.dim();
    packed.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) packed.push_back(c.chol_factor(i, j));
    comps.push_back(json{{"mean", encode_f64_base64(c.mean)},
                         {"chol_packed", encode_f64_base64(packed)}});
  }
  return json{{"dim", g.dim()}, {"weights", g.weights}, {"components", comps}};
}

Gmm gmm_from_json(const json& j) {
  Gmm g;
  g.weights = j.at("weights").get<Vec>();
  const std::size_t n = j.at("dim").get<std::size_t>();
  for (const auto& cj : j.at("components")) {
    Vec mean = decode_f64_base64(cj.at("mean").get<std::string>());
    const Vec packed = decode_f64_base64(cj.at("chol_packed").get<std::string>());
    if (mean.size() != n || packed.size() != n * (n + 1) / 2)
      throw std::runtime_error("gmm_from_json: payload size mismatch");
    Mat u(n, n, 0.0);
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t jj = i; jj < n; ++jj) u(i, jj) = packed[t++];
    g.comps.emplace_back(std::move(mean), std::move(u));
  }
  g.validate();
  return g;
}

namespace {

json scaler_json(const nn::Scaler& s) { return json{{"lo", s.lo}, {"hi", s.hi}}; }

nn::Scaler scaler_unjson(const json& j) {
  nn::Scaler s;
  s.lo = j.at("lo").get<Vec>();
  s.hi = j.at("hi").get<Vec>();
  return s;
}

}  // namespace

void save_virtual_cmdp(const VirtualCmdp& v, const std::string& manifest_path) {
  const fs::path dir = fs::path(manifest_path).parent_path();
  const std::string reward_file = "reward_model.json";
  const std::string cost_file = "cost_model.json";
  nn::save_regressor(v.reward_model, (dir / reward_file).string());
  nn::save_regressor(v.cost_model, (dir / cost_file).string());
  json j{{"version", 1},
         {"env_hash", v.env_hash},
         {"env_config", v.env_cfg.to_json()},
         {"alpha_channel", v.alpha_channel},
         {"alpha_queue", v.alpha_queue},
         {"cost_threshold", v.cost_threshold},
         {"redecode_per_episode", v.redecode_per_episode},
         {"r_scaler", scaler_json(v.r_scaler)},
         {"q_scaler", scaler_json(v.q_scaler)},
         {"init_r", gmm_to_json(v.init_r)},
         {"init_q", gmm_to_json(v.init_q)},
         {"channel_joint", gmm_to_json(v.channel_joint)},
         {"queue_joint", gmm_to_json(v.queue_joint)},
         {"reward_model_file", reward_file},
         {"cost_model_file", cost_file}};
  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("save_virtual_cmdp: cannot write " + manifest_path);
  out << j.dump(1) << "\n";
}

VirtualCmdp load_virtual_cmdp(const std::string& manifest_path,
                              std::optional<std::uint64_t> expected_hash) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("load_virtual_cmdp: cannot read " + manifest_path);
  json j;
  in >> j;
  VirtualCmdp v;
  v.env_hash = j.at("env_hash").get<std::uint64_t>();
  if (expected_hash && *expected_hash != v.env_hash)
    throw std::runtime_error("load_virtual_cmdp: env-config hash mismatch");
  v.env_cfg = env::EnvConfig::from_json(j.at("env_config"));
  if (v.env_cfg.hash() != v.env_hash)
    throw std::runtime_error("load_virtual_cmdp: manifest hash does not match its config");
  v.alpha_channel = j.at("alpha_channel").get<double>();
  v.alpha_queue = j.at("alpha_queue").get<double>();
  v.cost_threshold = j.at("cost_threshold").get<double>();
  v.redecode_per_episode = j.value("redecode_per_episode", false);
  v.r_scaler = scaler_unjson(j.at("r_scaler"));
  v.q_scaler = scaler_unjson(j.at("q_scaler"));
  v.init_r = gmm_from_json(j.at("init_r"));
  v.init_q = gmm_from_json(j.at("init_q"));
  v.channel_joint = gmm_from_json(j.at("channel_joint"));
  v.queue_joint = gmm_from_json(j.at("queue_joint"));
  const fs::path dir = fs::path(manifest_path).parent_path();
  v.reward_model =
      nn::load_regressor((dir / j.at("reward_model_file").get<std::string>()).string());
  v.cost_model =
      nn::load_regressor((dir / j.at("cost_model_file").get<std::string>()).string());
  v.finalize();
  return v;
}

}  // namespace deterra::gen
