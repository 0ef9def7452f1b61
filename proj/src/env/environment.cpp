#include "env/environment.hpp"

#include <cmath>
#include <stdexcept>

#include "mathcore/special.hpp"

namespace deterra::env {
namespace {
constexpr double kLog2E = 1.4426950408889634074;
}

DecodedAction decode_action(const EnvConfig& cfg, const RawAction& raw) {
  const std::size_t links = cfg.num_links();
  if (raw.zeta_hat.size() != links || raw.i_hat.size() != links || raw.p_hat.size() != links)
    throw std::invalid_argument("decode_action: raw action dimension mismatch");
  DecodedAction act;
  act.zeta.resize(links);
  act.beam_idx.resize(links);
  act.power.assign(links, 0.0);
  for (std::size_t i = 0; i < links; ++i) {
    act.zeta[i] = raw.zeta_hat[i] >= 0.0 ? 1 : 0;
    const int m = static_cast<int>(
        std::floor((raw.i_hat[i] + 1.0) * cfg.num_antennas / 2.0));
    act.beam_idx[i] = std::clamp(m, 0, cfg.num_antennas - 1);
  }
  // per-AP softmax over the U*K power logits
  const std::size_t per_ap = static_cast<std::size_t>(cfg.num_ues) * cfg.num_subbands;
  const double p_max = cfg.p_max_watts();
  for (int b = 0; b < cfg.num_aps; ++b) {
    const std::size_t base = static_cast<std::size_t>(b) * per_ap;
    double hi = raw.p_hat[base];
    for (std::size_t i = 1; i < per_ap; ++i) hi = std::max(hi, raw.p_hat[base + i]);
    double denom = 0.0;
    for (std::size_t i = 0; i < per_ap; ++i) denom += std::exp(raw.p_hat[base + i] - hi);
    for (std::size_t i = 0; i < per_ap; ++i)
      act.power[base + i] = p_max * std::exp(raw.p_hat[base + i] - hi) / denom;
  }
  return act;
}

Mat compute_sinr(const EnvConfig& cfg, const ChannelState& ch, const DecodedAction& act) {
  const int B = cfg.num_aps, U = cfg.num_ues, K = cfg.num_subbands, M = cfg.num_antennas;
  const std::vector<Cplx> cb = build_codebook(M);
  const double noise = cfg.noise_power_watts();
  const double inv_c = 1.0 / cfg.subcarriers;
  Mat gamma(U, K, 0.0);
  auto link_idx = [&](int b, int u, int k) {
    return (static_cast<std::size_t>(b) * U + u) * K + k;
  };
  // effective channel of UE u toward the beam assigned to (b, v, k)
  auto beam_gain = [&](int b, int u, int v, int k) {
    const Cplx* h = ch.h.data() + link_idx(b, u, k) * M;
    const Cplx* f = cb.data() + static_cast<std::size_t>(act.beam_idx[link_idx(b, v, k)]) * M;
    Cplx acc(0.0, 0.0);
    for (int a = 0; a < M; ++a) acc += std::conj(h[a]) * f[a];
    return acc;
  };
  for (int u = 0; u < U; ++u) {
    for (int k = 0; k < K; ++k) {
      Cplx desired(0.0, 0.0);
      for (int b = 0; b < B; ++b) {
        const std::size_t i = link_idx(b, u, k);
        if (act.zeta[i])
          desired += std::sqrt(act.power[i] * inv_c) * beam_gain(b, u, u, k);
      }
      double interference = 0.0;
      for (int v = 0; v < U; ++v) {
        if (v == u) continue;
        Cplx cross(0.0, 0.0);
        for (int b = 0; b < B; ++b) {
          const std::size_t i = link_idx(b, v, k);
          if (act.zeta[i])
            cross += std::sqrt(act.power[i] * inv_c) * beam_gain(b, u, v, k);
        }
        interference += std::norm(cross);
      }
      gamma(u, k) = std::norm(desired) / (interference + noise);
    }
  }
  return gamma;
}

double compute_bits(const EnvConfig& cfg, const Vec& sinr_row) {
  const double re_per_tfu = static_cast<double>(cfg.subcarriers) * cfg.symbols;
  double shannon = 0.0, dispersion = 0.0;
  for (double g : sinr_row) {
    shannon += re_per_tfu * std::log2(1.0 + g);
    const double inv = 1.0 / (1.0 + g);
    dispersion += re_per_tfu * kLog2E * kLog2E * (1.0 - inv * inv);
  }
  const double q_inv = math::gaussian_q_inv(cfg.block_error_prob);
  const double psi = shannon - q_inv * std::sqrt(dispersion);
  return psi > 0.0 ? psi : 0.0;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  q_inv_eps_ = math::gaussian_q_inv(cfg_.block_error_prob);
  queues_.resize(static_cast<std::size_t>(cfg_.num_ues));
}

CmdpState Environment::assemble_state() const {
  CmdpState s;
  s.r = compute_pbm(cfg_, ch_);
  s.q_buf.resize(queues_.size());
  s.q_urg.resize(queues_.size());
  for (std::size_t u = 0; u < queues_.size(); ++u) {
    s.q_buf[u] = static_cast<double>(queues_[u].depth());
    s.q_urg[u] = static_cast<double>(queues_[u].urgent_count(slot_, cfg_.deadline_slots));
  }
  return s;
}

CmdpState Environment::reset(math::SeededRng& rng) {
  slot_ = 0;
  ch_ = channel_reset(cfg_, rng);
  for (auto& q : queues_) {
    q.packets.clear();
    q.total_bits = 0.0;
  }
  // one slot of arrivals, age zero
  for (auto& q : queues_) {
    const int n = rng.poisson(cfg_.arrival_rate);
    for (int a = 0; a < n; ++a) {
      const double size =
          static_cast<double>(rng.uniform_int(cfg_.packet_bits_min, cfg_.packet_bits_max));
      if (q.total_bits + size <= cfg_.buffer_bits) {
        q.packets.push_back(Packet{0, size, size});
        q.total_bits += size;
      }
    }
  }
  return assemble_state();
}

StepOutcome Environment::step(const RawAction& action, math::SeededRng& rng) {
  const DecodedAction act = decode_action(cfg_, action);
  const Mat gamma = compute_sinr(cfg_, ch_, act);
  slot_ += 1;

  StepOutcome out;
  out.cost_per_user.assign(queues_.size(), 0.0);
  out.vio.assign(queues_.size(), 0);
  out.drop.assign(queues_.size(), 0);
  out.tx.assign(queues_.size(), 0);
  out.arrivals.assign(queues_.size(), 0);
  out.bits_served.assign(queues_.size(), 0.0);

  double total_bits = 0.0;
  for (std::size_t u = 0; u < queues_.size(); ++u) {
    Vec row(static_cast<std::size_t>(cfg_.num_subbands));
    for (int k = 0; k < cfg_.num_subbands; ++k) row[static_cast<std::size_t>(k)] = gamma(u, k);
    const double psi = compute_bits(cfg_, row);
    const SlotCounters counters = queue_step(cfg_, queues_[u], psi, slot_, rng);
    out.vio[u] = counters.vio;
    out.drop[u] = counters.drop;
    out.tx[u] = counters.tx;
    out.arrivals[u] = counters.arrivals;
    // the reward numerator is the PHY serving capability psi, matching the
    // queue law [Q - psi]^+; actual drained bits can be smaller
    out.bits_served[u] = psi;
    total_bits += psi;
    const long events = counters.vio + counters.drop + counters.tx;
    out.cost_per_user[u] =
        events > 0 ? static_cast<double>(counters.vio + counters.drop) / events : 0.0;
    out.cost_agg += out.cost_per_user[u] / static_cast<double>(queues_.size());
  }

  double energy = 0.0;
  for (std::size_t i = 0; i < act.power.size(); ++i)
    if (act.zeta[i]) energy += act.power[i];
  energy *= cfg_.slot_seconds;
  out.energy_joules = energy;
  // single-slot energy efficiency; bits actually handed to the queues
  out.reward = energy > 0.0 ? total_bits / energy : 0.0;

  channel_advance(cfg_, ch_, rng);
  out.next_state = assemble_state();
  return out;
}

long Environment::buffered_packets() const {
  long n = 0;
  for (const auto& q : queues_) n += static_cast<long>(q.depth());
  return n;
}

}  // namespace deterra::env
