#include "rl/policy.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "core/bytes.hpp"

namespace deterra::rl {

using nlohmann::json;

namespace {
constexpr double kLogStdLo = -5.0;
constexpr double kLogStdHi = 1.0;
constexpr double kHalfLog2Pi = 0.91893853320467274178;
}  // namespace

double clamp_log_std(double v) { return std::clamp(v, kLogStdLo, kLogStdHi); }

nn::MlpSpec PolicySpec::mlp_spec() const {
  nn::MlpSpec s;
  s.widths.push_back(state_dim);
  s.widths.insert(s.widths.end(), torso_widths.begin(), torso_widths.end());
  s.widths.push_back(action_dim);
  s.hidden = nn::Act::kTanh;
  s.output = nn::Act::kIdentity;
  return s;
}

Policy policy_init(const PolicySpec& spec, math::SeededRng& rng) {
  if (spec.state_dim == 0 || spec.action_dim == 0)
    throw std::invalid_argument("PolicySpec: zero dimensions");
  Policy p;
  p.spec = spec;
  p.params = nn::mlp_init(spec.mlp_spec(), rng);
  // shrink the mean head so initial actions hover near zero
  const std::size_t head_w = p.params.num_segments() - 2;
  double* w = p.params.seg(head_w);
  for (std::size_t i = 0; i < p.params.segment(head_w).size; ++i) w[i] *= 0.01;
  const std::size_t ls = p.params.add("log_std", spec.action_dim);
  double* log_std = p.params.seg(ls);
  for (std::size_t i = 0; i < spec.action_dim; ++i) log_std[i] = spec.init_log_std;
  // identity scaler by default; callers fit it before training
  p.state_scaler.lo.assign(spec.state_dim, -1.0);
  p.state_scaler.hi.assign(spec.state_dim, 1.0);
  return p;
}

ActSample policy_act(const Policy& policy, const Vec& state_raw, math::SeededRng& rng,
                     bool deterministic) {
  const Vec scaled = policy.state_scaler.apply(state_raw);
  Mat x(1, scaled.size());
  x.set_row(0, scaled);
  const nn::MlpSpec spec = policy.spec.mlp_spec();
  const Mat mean = nn::mlp_forward(spec, policy.params, x);
  const double* log_std = policy.params.seg(policy.log_std_segment());

  ActSample out;
  const std::size_t dim = policy.spec.action_dim;
  out.raw_action.resize(dim);
  out.pre_tanh.resize(dim);
  out.log_prob = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double ls = clamp_log_std(log_std[i]);
    const double sigma = std::exp(ls);
    const double u = deterministic ? mean(0, i) : mean(0, i) + sigma * rng.normal();
    const double a = std::tanh(u);
    out.pre_tanh[i] = u;
    out.raw_action[i] = a;
    const double zscore = (u - mean(0, i)) / sigma;
    // log N(u) - log(1 - tanh(u)^2), the latter in the stable softplus form
    out.log_prob += -0.5 * zscore * zscore - ls - kHalfLog2Pi;
    out.log_prob -= 2.0 * (std::log(2.0) - u - std::log1p(std::exp(-2.0 * u)));
  }
  return out;
}

void policy_log_prob(const Policy& policy, const Mat& states_scaled, const Mat& pre_tanh,
                     Vec* log_probs, Vec* entropies, nn::MlpCache* cache, Mat* means_out) {
  const nn::MlpSpec spec = policy.spec.mlp_spec();
  const Mat mean = nn::mlp_forward(spec, policy.params, states_scaled, cache);
  const double* log_std = policy.params.seg(policy.log_std_segment());
  const std::size_t batch = states_scaled.rows();
  const std::size_t dim = policy.spec.action_dim;
  log_probs->assign(batch, 0.0);
  if (entropies) entropies->assign(batch, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    double lp = 0.0, ent = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double ls = clamp_log_std(log_std[i]);
      const double sigma = std::exp(ls);
      const double u = pre_tanh(b, i);
      const double z = (u - mean(b, i)) / sigma;
      lp += -0.5 * z * z - ls - kHalfLog2Pi;
      lp -= 2.0 * (std::log(2.0) - u - std::log1p(std::exp(-2.0 * u)));
      ent += ls + kHalfLog2Pi + 0.5;
    }
    (*log_probs)[b] = lp;
    if (entropies) (*entropies)[b] = ent;
  }
  if (means_out) *means_out = mean;
}

ValueNet value_init(std::size_t state_dim, const std::vector<std::size_t>& widths,
                    math::SeededRng& rng) {
  ValueNet v;
  v.spec.widths.push_back(state_dim);
  v.spec.widths.insert(v.spec.widths.end(), widths.begin(), widths.end());
  v.spec.widths.push_back(1);
  v.spec.hidden = nn::Act::kTanh;
  v.spec.output = nn::Act::kIdentity;
  v.params = nn::mlp_init(v.spec, rng);
  return v;
}

double value_eval(const ValueNet& v, const Vec& state_scaled) {
  Mat x(1, state_scaled.size());
  x.set_row(0, state_scaled);
  return nn::mlp_forward(v.spec, v.params, x)(0, 0);
}

Vec value_eval_batch(const ValueNet& v, const Mat& states_scaled) {
  const Mat y = nn::mlp_forward(v.spec, v.params, states_scaled);
  Vec out(y.rows());
  for (std::size_t i = 0; i < y.rows(); ++i) out[i] = y(i, 0);
  return out;
}

Vec behavior_policy_uniform(std::size_t action_dim, math::SeededRng& rng) {
  Vec a(action_dim);
  for (auto& v : a) {
    do {
      v = rng.uniform(-1.0, 1.0);
    } while (v <= -1.0 || v >= 1.0);
  }
  return a;
}

void save_policy(const Policy& policy, const std::string& path, std::uint64_t env_hash) {
  json j{{"version", 1},
         {"env_hash", env_hash},
         {"state_dim", policy.spec.state_dim},
         {"action_dim", policy.spec.action_dim},
         {"torso_widths", policy.spec.torso_widths},
         {"scaler", {{"lo", policy.state_scaler.lo}, {"hi", policy.state_scaler.hi}}},
         {"params", encode_f64_base64(policy.params.values)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_policy: cannot write " + path);
  out << j.dump(1) << "\n";
}

Policy load_policy(const std::string& path, std::uint64_t* env_hash_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_policy: cannot read " + path);
  json j;
  in >> j;
  PolicySpec spec;
  spec.state_dim = j.at("state_dim").get<std::size_t>();
  spec.action_dim = j.at("action_dim").get<std::size_t>();
  spec.torso_widths = j.at("torso_widths").get<std::vector<std::size_t>>();
  math::SeededRng dummy(0, 0);
  Policy p = policy_init(spec, dummy);
  Vec values = decode_f64_base64(j.at("params").get<std::string>());
  if (values.size() != p.params.size())
    throw std::runtime_error("load_policy: parameter payload size mismatch");
  p.params.values = std::move(values);
  p.state_scaler.lo = j.at("scaler").at("lo").get<Vec>();
  p.state_scaler.hi = j.at("scaler").at("hi").get<Vec>();
  if (env_hash_out) *env_hash_out = j.at("env_hash").get<std::uint64_t>();
  return p;
}

}  // namespace deterra::rl
