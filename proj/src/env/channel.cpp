#include "env/channel.hpp"

#include <cmath>

namespace deterra::env {
namespace {

constexpr double kPi = 3.14159265358979323846;

void rebuild_h(const EnvConfig& cfg, ChannelState& ch) {
  const int B = cfg.num_aps, U = cfg.num_ues, K = cfg.num_subbands, M = cfg.num_antennas;
  const int L = cfg.channel.num_paths;
  ch.h.assign(static_cast<std::size_t>(B) * U * K * M, Cplx(0.0, 0.0));
  for (int b = 0; b < B; ++b) {
    for (int u = 0; u < U; ++u) {
      const std::size_t link = static_cast<std::size_t>(b) * U + u;
      for (int k = 0; k < K; ++k) {
        // subband center frequency relative to the carrier
        const double f_k = (k - 0.5 * (K - 1)) * cfg.subband_bandwidth_hz();
        Cplx* hk = ch.h.data() + (link * K + static_cast<std::size_t>(k)) * M;
        for (int l = 0; l < L; ++l) {
          const double phase = -2.0 * kPi * f_k * ch.path_delay_s[link][l];
          const Cplx rot = ch.path_gain[link][l] * Cplx(std::cos(phase), std::sin(phase));
          const double s = ch.path_angle_sin[link][l];
          for (int m = 0; m < M; ++m) {
            const double steer = kPi * m * s;
            hk[m] += rot * Cplx(std::cos(steer), std::sin(steer));
          }
        }
      }
    }
  }
}

Cplx draw_cn(math::SeededRng& rng, double var) {
  const double s = std::sqrt(0.5 * var);
  return Cplx(s * rng.normal(), s * rng.normal());
}

}  // namespace

std::vector<Cplx> build_codebook(int num_antennas) {
  const int m_count = num_antennas;
  std::vector<Cplx> cb(static_cast<std::size_t>(m_count) * m_count);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_count));
  for (int m = 0; m < m_count; ++m)
    for (int a = 0; a < m_count; ++a) {
      const double phase = 2.0 * kPi * a * m / m_count;
      cb[static_cast<std::size_t>(m) * m_count + a] =
          scale * Cplx(std::cos(phase), std::sin(phase));
    }
  return cb;
}

ChannelState channel_reset(const EnvConfig& cfg, math::SeededRng& rng) {
  const int B = cfg.num_aps, U = cfg.num_ues;
  const int L = cfg.channel.num_paths;
  ChannelState ch;
  const std::size_t links = static_cast<std::size_t>(B) * U;
  ch.path_angle_sin.assign(links, Vec(L));
  ch.path_delay_s.assign(links, Vec(L));
  ch.path_power.assign(links, Vec(L));
  ch.path_gain.assign(links, std::vector<Cplx>(L));
  for (std::size_t link = 0; link < links; ++link) {
    const double gain_db =
        cfg.channel.mean_gain_db + cfg.channel.shadowing_std_db * rng.normal();
    const double gain_lin = std::pow(10.0, gain_db / 10.0);
    double profile_sum = 0.0;
    for (int l = 0; l < L; ++l) profile_sum += std::exp(-cfg.channel.path_decay * l);
    for (int l = 0; l < L; ++l) {
      ch.path_angle_sin[link][l] =
          rng.uniform(-cfg.channel.angle_spread, cfg.channel.angle_spread);
      ch.path_delay_s[link][l] = rng.uniform(0.0, cfg.channel.delay_spread_s);
      ch.path_power[link][l] =
          gain_lin * std::exp(-cfg.channel.path_decay * l) / profile_sum;
      ch.path_gain[link][l] = draw_cn(rng, ch.path_power[link][l]);
    }
  }
  rebuild_h(cfg, ch);
  return ch;
}

void channel_advance(const EnvConfig& cfg, ChannelState& ch, math::SeededRng& rng) {
  const double a = cfg.channel.time_corr;
  const double innov = std::sqrt(1.0 - a * a);
  for (std::size_t link = 0; link < ch.path_gain.size(); ++link)
    for (std::size_t l = 0; l < ch.path_gain[link].size(); ++l)
      ch.path_gain[link][l] =
          a * ch.path_gain[link][l] + innov * draw_cn(rng, ch.path_power[link][l]);
  rebuild_h(cfg, ch);
}

Vec compute_pbm(const EnvConfig& cfg, const ChannelState& ch) {
  const int B = cfg.num_aps, U = cfg.num_ues, K = cfg.num_subbands, M = cfg.num_antennas;
  const std::vector<Cplx> cb = build_codebook(M);
  Vec r(cfg.pbm_dim());
  std::size_t idx = 0;
  for (int b = 0; b < B; ++b)
    for (int u = 0; u < U; ++u)
      for (int k = 0; k < K; ++k) {
        const Cplx* h =
            ch.h.data() + ((static_cast<std::size_t>(b) * U + u) * K + k) * M;
        for (int m = 0; m < M; ++m) {
          const Cplx* f = cb.data() + static_cast<std::size_t>(m) * M;
          Cplx acc(0.0, 0.0);
          for (int a = 0; a < M; ++a) acc += std::conj(h[a]) * f[a];
          r[idx++] = std::abs(acc);
        }
      }
  return r;
}

}  // namespace deterra::env
