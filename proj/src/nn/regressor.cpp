#include "nn/regressor.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <stdexcept>

#include "core/bytes.hpp"

namespace deterra::nn {

using nlohmann::json;

std::size_t Regressor::input_dim() const {
  return kind == RegressorKind::kMlp ? mlp_spec.input_dim() : kan.spec.input_dim();
}

std::size_t Regressor::param_count() const {
  return kind == RegressorKind::kMlp ? mlp_params.size() : kan.params.size();
}

Vec Regressor::predict_normalized(const Mat& x_scaled) const {
  const Mat y = kind == RegressorKind::kMlp ? mlp_forward(mlp_spec, mlp_params, x_scaled)
                                            : kan_forward(kan, x_scaled);
  Vec out(y.rows());
  for (std::size_t i = 0; i < y.rows(); ++i) out[i] = y(i, 0);
  return out;
}

double Regressor::predict(const Vec& x_raw) const {
  Mat x(1, x_raw.size());
  x.set_row(0, input_scaler.apply(x_raw));
  return target.invert(predict_normalized(x)[0]);
}

Vec Regressor::predict_batch(const Mat& x_raw) const {
  const Mat xs = input_scaler.apply_rows(x_raw);
  Vec out = predict_normalized(xs);
  for (auto& v : out) v = target.invert(v);
  return out;
}

namespace {

void eval_split(const Regressor& model, const Mat& xs, const Vec& yn, double* mae, double* bias) {
  const Vec pred = model.predict_normalized(xs);
  double abs_acc = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - yn[i];
    abs_acc += std::fabs(r);
    acc += r;
  }
  *mae = abs_acc / static_cast<double>(pred.size());
  *bias = acc / static_cast<double>(pred.size());
}

}  // namespace

Regressor fit_regressor(RegressorKind kind, const std::vector<std::size_t>& hidden_widths,
                        const KanSpec& kan_arch, const Mat& x_raw, const Vec& y_raw,
                        const TrainConfig& cfg, FitReport* report) {
  if (x_raw.rows() != y_raw.size() || x_raw.rows() < 5)
    throw std::invalid_argument("fit_regressor: bad dataset");
  math::SeededRng rng(cfg.seed, 101);

  // 80/20 split on a seeded shuffle
  std::vector<std::size_t> idx(x_raw.rows());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
  const std::size_t n_train = (x_raw.rows() * 8) / 10;
  const std::size_t n_test = x_raw.rows() - n_train;

  Mat x_train(n_train, x_raw.cols()), x_test(n_test, x_raw.cols());
  Vec y_train(n_train), y_test(n_test);
  for (std::size_t i = 0; i < n_train; ++i) {
    x_train.set_row(i, x_raw.row_vec(idx[i]));
    y_train[i] = y_raw[idx[i]];
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    x_test.set_row(i, x_raw.row_vec(idx[n_train + i]));
    y_test[i] = y_raw[idx[n_train + i]];
  }

  Regressor model;
  model.kind = kind;
  model.input_scaler = fit_scaler(x_train);
  model.target = fit_target_scaler(y_train);

  const Mat xs_train = model.input_scaler.apply_rows(x_train);
  const Mat xs_test = model.input_scaler.apply_rows(x_test);
  Vec yn_train(n_train), yn_test(n_test);
  for (std::size_t i = 0; i < n_train; ++i) yn_train[i] = model.target.apply(y_train[i]);
  for (std::size_t i = 0; i < n_test; ++i) yn_test[i] = model.target.apply(y_test[i]);

  if (kind == RegressorKind::kMlp) {
    model.mlp_spec.widths.assign(1, x_raw.cols());
    model.mlp_spec.widths.insert(model.mlp_spec.widths.end(), hidden_widths.begin(),
                                 hidden_widths.end());
    model.mlp_spec.widths.push_back(1);
    model.mlp_spec.hidden = Act::kTanh;
    model.mlp_spec.output = Act::kIdentity;
    model.mlp_params = mlp_init(model.mlp_spec, rng);
  } else {
    KanSpec ks = kan_arch;
    ks.widths.assign(1, x_raw.cols());
    ks.widths.insert(ks.widths.end(), kan_arch.widths.begin(), kan_arch.widths.end());
    ks.widths.push_back(1);
    model.kan = kan_init(ks, rng);
    kan_fit_input_grids(model.kan, xs_train);
  }

  Vec& params =
      kind == RegressorKind::kMlp ? model.mlp_params.values : model.kan.params.values;
  AdamState adam(params.size());
  ParamVector grad = kind == RegressorKind::kMlp ? model.mlp_params.zeros_like()
                                                 : model.kan.params.zeros_like();

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::min<std::size_t>(cfg.batch, n_train);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
    for (std::size_t start = 0; start < n_train; start += bs) {
      const std::size_t count = std::min(bs, n_train - start);
      Mat xb(count, x_raw.cols());
      Vec yb(count);
      for (std::size_t i = 0; i < count; ++i) {
        xb.set_row(i, xs_train.row_vec(order[start + i]));
        yb[i] = yn_train[order[start + i]];
      }
      std::fill(grad.values.begin(), grad.values.end(), 0.0);

      Mat dy(count, 1);
      double loss = 0.0;
      if (kind == RegressorKind::kMlp) {
        MlpCache cache;
        const Mat y = mlp_forward(model.mlp_spec, model.mlp_params, xb, &cache);
        for (std::size_t i = 0; i < count; ++i) {
          const double r = y(i, 0) - yb[i];
          loss += 0.5 * r * r;
          dy(i, 0) = r / static_cast<double>(count);
        }
        mlp_backward(model.mlp_spec, model.mlp_params, cache, dy, grad);
      } else {
        KanCache cache;
        const Mat y = kan_forward(model.kan, xb, &cache);
        for (std::size_t i = 0; i < count; ++i) {
          const double r = y(i, 0) - yb[i];
          loss += 0.5 * r * r;
          dy(i, 0) = r / static_cast<double>(count);
        }
        kan_backward(model.kan, cache, dy, grad);
      }
      if (!std::isfinite(loss))
        throw std::runtime_error("fit_regressor: non-finite loss at epoch " +
                                 std::to_string(epoch));
      adam.step(params, grad.values, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
    }
  }

  if (report) {
    eval_split(model, xs_train, yn_train, &report->train_mae, &report->train_bias);
    eval_split(model, xs_test, yn_test, &report->test_mae, &report->test_bias);
    report->train_count = n_train;
    report->test_count = n_test;
  }
  return model;
}

namespace {

json scaler_to_json(const Scaler& s) { return json{{"lo", s.lo}, {"hi", s.hi}}; }

Scaler scaler_from_json(const json& j) {
  Scaler s;
  s.lo = j.at("lo").get<Vec>();
  s.hi = j.at("hi").get<Vec>();
  return s;
}

json grid_to_json(const BsplineGrid& g) {
  return json{{"knots", g.knots}, {"grid_size", g.grid_size}, {"order", g.order}};
}

BsplineGrid grid_from_json(const json& j) {
  BsplineGrid g;
  g.knots = j.at("knots").get<Vec>();
  g.grid_size = j.at("grid_size").get<int>();
  g.order = j.at("order").get<int>();
  return g;
}

}  // namespace

void save_regressor(const Regressor& model, const std::string& path) {
  json j;
  j["version"] = 1;
  j["kind"] = model.kind == RegressorKind::kMlp ? "mlp" : "kan";
  j["input_scaler"] = scaler_to_json(model.input_scaler);
  j["target"] = json{{"mean", model.target.mean}, {"stddev", model.target.stddev}};
  if (model.kind == RegressorKind::kMlp) {
    j["widths"] = model.mlp_spec.widths;
    j["hidden_act"] = static_cast<int>(model.mlp_spec.hidden);
    j["output_act"] = static_cast<int>(model.mlp_spec.output);
    j["params"] = encode_f64_base64(model.mlp_params.values);
  } else {
    const KanSpec& s = model.kan.spec;
    j["widths"] = s.widths;
    j["grid_size"] = s.grid_size;
    j["spline_order"] = s.spline_order;
    j["grid_eps"] = s.grid_eps;
    j["range"] = json{s.lo, s.hi};
    json grids = json::array();
    for (const auto& layer : model.kan.grids) {
      json lg = json::array();
      for (const auto& g : layer) lg.push_back(grid_to_json(g));
      grids.push_back(lg);
    }
    j["grids"] = grids;
    j["params"] = encode_f64_base64(model.kan.params.values);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_regressor: cannot write " + path);
  out << j.dump(1) << "\n";
}

Regressor load_regressor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_regressor: cannot read " + path);
  json j;
  in >> j;
  if (j.at("version").get<int>() != 1) throw std::runtime_error("load_regressor: bad version");
  Regressor model;
  model.input_scaler = scaler_from_json(j.at("input_scaler"));
  model.target.mean = j.at("target").at("mean").get<double>();
  model.target.stddev = j.at("target").at("stddev").get<double>();
  math::SeededRng dummy(0, 0);
  if (j.at("kind").get<std::string>() == "mlp") {
    model.kind = RegressorKind::kMlp;
    model.mlp_spec.widths = j.at("widths").get<std::vector<std::size_t>>();
    model.mlp_spec.hidden = static_cast<Act>(j.at("hidden_act").get<int>());
    model.mlp_spec.output = static_cast<Act>(j.at("output_act").get<int>());
    model.mlp_params = mlp_init(model.mlp_spec, dummy);
    model.mlp_params.values = decode_f64_base64(j.at("params").get<std::string>());
    if (model.mlp_params.values.size() != model.mlp_spec.param_count())
      throw std::runtime_error("load_regressor: parameter payload size mismatch");
  } else {
    model.kind = RegressorKind::kKan;
    KanSpec s;
    s.widths = j.at("widths").get<std::vector<std::size_t>>();
    s.grid_size = j.at("grid_size").get<int>();
    s.spline_order = j.at("spline_order").get<int>();
    s.grid_eps = j.at("grid_eps").get<double>();
    s.lo = j.at("range")[0].get<double>();
    s.hi = j.at("range")[1].get<double>();
    model.kan = kan_init(s, dummy);
    model.kan.grids.clear();
    for (const auto& lg : j.at("grids")) {
      std::vector<BsplineGrid> layer;
      for (const auto& g : lg) layer.push_back(grid_from_json(g));
      model.kan.grids.push_back(std::move(layer));
    }
    model.kan.params.values = decode_f64_base64(j.at("params").get<std::string>());
    if (model.kan.params.values.size() != kan_param_count(s))
      throw std::runtime_error("load_regressor: parameter payload size mismatch");
  }
  return model;
}

}  // namespace deterra::nn
