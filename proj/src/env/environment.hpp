#pragma once

#include "core/cmdp.hpp"
#include "env/channel.hpp"
#include "env/queueing.hpp"

namespace deterra::env {

/// Decoded resource allocation for one slot: scheduling flags, codeword
/// indices, and per-link transmit power (watts). All arrays are B*U*K long,
/// b-major.
struct DecodedAction {
  std::vector<int> zeta;
  std::vector<int> beam_idx;
  Vec power;
};

/// zeta = 1[zeta_hat >= 0]; beam = clamp(floor((i_hat+1) M/2), 0, M-1);
/// per-AP power = P_max * softmax over that AP's U*K entries.
DecodedAction decode_action(const EnvConfig& cfg, const RawAction& raw);

/// SINR per (UE, subband) under the decoded allocation.
Mat compute_sinr(const EnvConfig& cfg, const ChannelState& ch, const DecodedAction& act);

/// Finite-blocklength bits for one UE given its SINR row over subbands:
/// max(0, sum_k CN log2(1+g_k) - Qinv(eps) sqrt(sum_k CN V_k)).
double compute_bits(const EnvConfig& cfg, const Vec& sinr_row);

/// The real CMDP: synthetic multipath channel, finite-blocklength PHY, and
/// per-UE deadline queues. Mutable instance state (channel, queues, slot
/// counter) makes an instance single-threaded; run one instance per worker.
class Environment : public Cmdp {
 public:
  explicit Environment(EnvConfig cfg);

  std::size_t state_dim() const override { return cfg_.state_dim(); }
  std::size_t action_dim() const override { return cfg_.action_dim(); }
  std::size_t episode_length() const override {
    return static_cast<std::size_t>(cfg_.slots_per_episode);
  }

  CmdpState reset(math::SeededRng& rng) override;
  StepOutcome step(const RawAction& action, math::SeededRng& rng) override;

  const EnvConfig& config() const { return cfg_; }
  const ChannelState& channel() const { return ch_; }
  long current_slot() const { return slot_; }
  /// Packets currently buffered, summed over UEs (for conservation checks).
  long buffered_packets() const;

 private:
  CmdpState assemble_state() const;

  EnvConfig cfg_;
  ChannelState ch_;
  std::vector<UeQueue> queues_;
  long slot_ = 0;
  double q_inv_eps_ = 0.0;
};

}  // namespace deterra::env
