#include "nn/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deterra::nn {
namespace {

void check_params(int g, int d) {
  if (g < 1 || d < 1) throw std::invalid_argument("bspline: grid_size and order must be >= 1");
}

BsplineGrid extend(Vec internal, int g, int d) {
  // internal has g+1 strictly increasing points; extend d knots per side by
  // repeating the boundary spacing.
  const double h_lo = internal[1] - internal[0];
  const double h_hi = internal[g] - internal[g - 1];
  Vec knots;
  knots.reserve(internal.size() + 2 * static_cast<std::size_t>(d));
  for (int i = d; i >= 1; --i) knots.push_back(internal.front() - i * h_lo);
  knots.insert(knots.end(), internal.begin(), internal.end());
  for (int i = 1; i <= d; ++i) knots.push_back(internal.back() + i * h_hi);
  BsplineGrid grid;
  grid.knots = std::move(knots);
  grid.grid_size = g;
  grid.order = d;
  return grid;
}

// All degree-`deg` basis values over the knot vector, Cox-de Boor elevation.
void all_basis(const Vec& t, int deg, double x, Vec& b) {
  const std::size_t nk = t.size();
  b.assign(nk - 1, 0.0);
  for (std::size_t i = 0; i + 1 < nk; ++i)
    if (t[i] <= x && x < t[i + 1]) b[i] = 1.0;
  for (int r = 1; r <= deg; ++r) {
    for (std::size_t i = 0; i + r + 1 < nk; ++i) {
      double left = 0.0, right = 0.0;
      const double dl = t[i + r] - t[i];
      const double dr = t[i + r + 1] - t[i + 1];
      if (dl > 0.0) left = (x - t[i]) / dl * b[i];
      if (dr > 0.0) right = (t[i + r + 1] - x) / dr * b[i + 1];
      b[i] = left + right;
    }
  }
  b.resize(nk - 1 - static_cast<std::size_t>(deg));
}

double clamp_into(const BsplineGrid& grid, double x) {
  const double lo = grid.lo();
  const double hi = grid.hi();
  const double margin = (hi - lo) * 1e-12;
  if (x < lo) return lo;
  if (x >= hi) return hi - margin;
  return x;
}

}  // namespace

BsplineGrid uniform_grid(double lo, double hi, int g, int d) {
  check_params(g, d);
  if (!(hi > lo)) throw std::invalid_argument("bspline: grid range must be non-empty");
  Vec internal(static_cast<std::size_t>(g) + 1);
  const double h = (hi - lo) / g;
  for (int i = 0; i <= g; ++i) internal[static_cast<std::size_t>(i)] = lo + i * h;
  return extend(std::move(internal), g, d);
}

BsplineGrid blended_grid(Vec samples, double lo, double hi, int g, int d, double grid_eps) {
  check_params(g, d);
  if (samples.size() < 2) return uniform_grid(lo, hi, g, d);
  std::sort(samples.begin(), samples.end());
  for (auto& s : samples) s = std::clamp(s, lo, hi);
  Vec internal(static_cast<std::size_t>(g) + 1);
  const double h = (hi - lo) / g;
  for (int i = 0; i <= g; ++i) {
    const double u = lo + i * h;
    const double pos = static_cast<double>(i) / g * static_cast<double>(samples.size() - 1);
    const std::size_t k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    const double q = k + 1 < samples.size() ? samples[k] * (1.0 - frac) + samples[k + 1] * frac
                                            : samples[k];
    internal[static_cast<std::size_t>(i)] = grid_eps * u + (1.0 - grid_eps) * q;
  }
  // keep knots strictly increasing
  const double min_gap = (hi - lo) * 1e-4 / g;
  internal.front() = lo;
  internal.back() = hi;
  bool ok = true;
  for (int i = 1; i <= g; ++i)
    if (internal[i] - internal[i - 1] < min_gap) ok = false;
  if (!ok) {
    for (int i = 1; i < g; ++i)
      internal[i] = std::max(internal[i], internal[i - 1] + min_gap);
    internal[g] = hi;
    for (int i = g - 1; i >= 1; --i)
      internal[i] = std::min(internal[i], internal[i + 1] - min_gap);
    for (int i = 1; i <= g; ++i)
      if (internal[i] - internal[i - 1] <= 0.0) return uniform_grid(lo, hi, g, d);
  }
  return extend(std::move(internal), g, d);
}

void bspline_basis(const BsplineGrid& grid, double x, double* out) {
  const double xc = clamp_into(grid, x);
  Vec b;
  all_basis(grid.knots, grid.order, xc, b);
  std::copy(b.begin(), b.end(), out);
}

void bspline_basis_deriv(const BsplineGrid& grid, double x, double* out, double* dout) {
  const double xc = clamp_into(grid, x);
  const bool clamped = (x != xc);
  const Vec& t = grid.knots;
  const int d = grid.order;
  Vec lower;
  all_basis(t, d - 1, xc, lower);  // g + d + 1 functions of degree d-1
  const std::size_t nb = static_cast<std::size_t>(grid.num_basis());
  Vec full;
  all_basis(t, d, xc, full);
  for (std::size_t i = 0; i < nb; ++i) {
    out[i] = full[i];
    double deriv = 0.0;
    const double dl = t[i + d] - t[i];
    const double dr = t[i + d + 1] - t[i + 1];
    if (dl > 0.0) deriv += lower[i] / dl;
    if (dr > 0.0) deriv -= lower[i + 1] / dr;
    dout[i] = clamped ? 0.0 : d * deriv;
  }
}

}  // namespace deterra::nn
