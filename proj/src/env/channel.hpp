#pragma once

#include <complex>
#include <vector>

#include "core/mat.hpp"
#include "env/env_config.hpp"
#include "mathcore/rng.hpp"

namespace deterra::env {

using Cplx = std::complex<double>;

/// Unit-norm DFT codebook for an M-antenna uniform linear array; column m is
/// codeword f_m, stored column-major (codeword-major).
std::vector<Cplx> build_codebook(int num_antennas);

/// Multipath geometry per (AP, UE): fixed angles/delays/powers for the
/// episode, with per-path complex gains evolving as AR(1).
struct ChannelState {
  // h indexed ((b*U + u)*K + k)*M + m
  std::vector<Cplx> h;
  // per (b,u): path geometry
  std::vector<Vec> path_angle_sin;   // [b*U+u][l]
  std::vector<Vec> path_delay_s;     // [b*U+u][l]
  std::vector<Vec> path_power;       // [b*U+u][l], includes large-scale gain
  std::vector<std::vector<Cplx>> path_gain;  // [b*U+u][l]
};

/// Draws fresh geometry and gains; emulates a new drop of user positions.
ChannelState channel_reset(const EnvConfig& cfg, math::SeededRng& rng);

/// First-order Gauss-Markov update of the per-path gains:
/// g' = a_ch g + sqrt(1 - a_ch^2) innovation, then rebuilds h.
void channel_advance(const EnvConfig& cfg, ChannelState& ch, math::SeededRng& rng);

/// PBM vector |h^H f_m| in fixed order (b, u, k, m innermost); this ordering
/// is part of the wire contract.
Vec compute_pbm(const EnvConfig& cfg, const ChannelState& ch);

}  // namespace deterra::env
