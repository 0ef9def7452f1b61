#pragma once

#include <cstdint>
#include <vector>

#include "core/mat.hpp"
#include "mathcore/rng.hpp"

namespace deterra {

/// Environment state: probing-beam measurements plus per-user queue summary.
/// Vector layout (the wire contract everywhere): r first, then q_buf, then
/// q_urg.
struct CmdpState {
  Vec r;                       // B*U*K*M beam-gain magnitudes, >= 0
  std::vector<double> q_buf;   // packets buffered, per UE
  std::vector<double> q_urg;   // packets at <=1 slot from deadline, per UE

  std::size_t dim() const { return r.size() + q_buf.size() + q_urg.size(); }
  Vec to_vector() const;
  static CmdpState from_vector(const Vec& v, std::size_t r_dim, std::size_t num_ue);
};

/// Raw policy output, all entries strictly inside (-1, 1). Each block has
/// length B*U*K, ordered b-major, then u, then k.
struct RawAction {
  Vec zeta_hat;
  Vec i_hat;
  Vec p_hat;

  std::size_t dim() const { return zeta_hat.size() + i_hat.size() + p_hat.size(); }
  Vec to_vector() const;
  static RawAction from_vector(const Vec& v);
};

/// Per-slot outcome of a CMDP step.
struct StepOutcome {
  CmdpState next_state;
  double reward = 0.0;              // bits per joule; 0 when nothing scheduled
  Vec cost_per_user;                // each in [0,1]
  double cost_agg = 0.0;            // mean over UEs
  std::vector<long> vio;            // deadline-expired packets this slot
  std::vector<long> drop;           // packets dropped at the buffer
  std::vector<long> tx;             // packets fully transmitted
  std::vector<long> arrivals;       // packets offered to the buffer
  Vec bits_served;                  // per UE
  double energy_joules = 0.0;       // transmit energy spent this slot
};

/// Reset/step contract shared by the real environment, the learned virtual
/// environment, and test CMDPs. Implementations hold their own mutable
/// internal state; interaction is single-threaded per instance.
class Cmdp {
 public:
  virtual ~Cmdp() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::size_t episode_length() const = 0;
  virtual CmdpState reset(math::SeededRng& rng) = 0;
  virtual StepOutcome step(const RawAction& action, math::SeededRng& rng) = 0;
};

}  // namespace deterra
