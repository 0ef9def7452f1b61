#pragma once

#include <string>
#include <vector>

#include "core/mat.hpp"

namespace deterra::nn {

/// Flat trainable-parameter vector with a named shape registry. Gradients are
/// carried in a second ParamVector sharing the same registry.
class ParamVector {
 public:
  struct Segment {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  std::size_t add(const std::string& name, std::size_t size);

  double* seg(std::size_t idx) { return values.data() + segments_[idx].offset; }
  const double* seg(std::size_t idx) const { return values.data() + segments_[idx].offset; }
  const Segment& segment(std::size_t idx) const { return segments_[idx]; }
  std::size_t num_segments() const { return segments_.size(); }
  std::size_t size() const { return values.size(); }

  /// Same registry, zeroed values.
  ParamVector zeros_like() const;

  Vec values;

 private:
  std::vector<Segment> segments_;
};

/// Adam moment state over a flat parameter vector.
struct AdamState {
  Vec m, v;
  long t = 0;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
  void step(Vec& params, const Vec& grad, double lr, double beta1, double beta2, double eps);
};

/// Rescales grad in place so its l2 norm is at most max_norm; returns the
/// pre-clip norm.
double clip_grad_norm(Vec& grad, double max_norm);

}  // namespace deterra::nn
