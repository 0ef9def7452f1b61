#include "nn/params.hpp"

#include <cmath>

#include "kernels/kernels.hpp"

namespace deterra::nn {

std::size_t ParamVector::add(const std::string& name, std::size_t size) {
  Segment s{name, values.size(), size};
  segments_.push_back(s);
  values.resize(values.size() + size, 0.0);
  return segments_.size() - 1;
}

ParamVector ParamVector::zeros_like() const {
  ParamVector z(*this);
  std::fill(z.values.begin(), z.values.end(), 0.0);
  return z;
}

void AdamState::step(Vec& params, const Vec& grad, double lr, double beta1, double beta2,
                     double eps) {
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

double clip_grad_norm(Vec& grad, double max_norm) {
  const double norm = std::sqrt(kern::sum_sq(grad.data(), grad.size()));
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& g : grad) g *= scale;
  }
  return norm;
}

}  // namespace deterra::nn
