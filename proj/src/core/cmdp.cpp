#include "core/cmdp.hpp"

#include <stdexcept>

namespace deterra {

Vec CmdpState::to_vector() const {
  Vec v;
  v.reserve(dim());
  v.insert(v.end(), r.begin(), r.end());
  v.insert(v.end(), q_buf.begin(), q_buf.end());
  v.insert(v.end(), q_urg.begin(), q_urg.end());
  return v;
}

CmdpState CmdpState::from_vector(const Vec& v, std::size_t r_dim, std::size_t num_ue) {
  if (v.size() != r_dim + 2 * num_ue)
    throw std::invalid_argument("CmdpState::from_vector: size mismatch");
  CmdpState s;
  s.r.assign(v.begin(), v.begin() + r_dim);
  s.q_buf.assign(v.begin() + r_dim, v.begin() + r_dim + num_ue);
  s.q_urg.assign(v.begin() + r_dim + num_ue, v.end());
  return s;
}

Vec RawAction::to_vector() const {
  Vec v;
  v.reserve(dim());
  v.insert(v.end(), zeta_hat.begin(), zeta_hat.end());
  v.insert(v.end(), i_hat.begin(), i_hat.end());
  v.insert(v.end(), p_hat.begin(), p_hat.end());
  return v;
}

RawAction RawAction::from_vector(const Vec& v) {
  if (v.size() % 3 != 0) throw std::invalid_argument("RawAction::from_vector: size not 3*B*U*K");
  const std::size_t n = v.size() / 3;
  RawAction a;
  a.zeta_hat.assign(v.begin(), v.begin() + n);
  a.i_hat.assign(v.begin() + n, v.begin() + 2 * n);
  a.p_hat.assign(v.begin() + 2 * n, v.end());
  return a;
}

}  // namespace deterra
