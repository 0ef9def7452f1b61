#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace deterra::env {

struct ChannelConfig {
  int num_paths = 6;
  double angle_spread = 0.9;       // sine-domain half-spread of path angles
  double path_decay = 0.5;         // exponential per-path power profile
  double time_corr = 0.95;         // AR(1) coefficient, in [0, 1)
  double delay_spread_s = 1.0e-6;  // per-path delay range (subband rotation)
  double mean_gain_db = -100.0;    // large-scale gain
  double shadowing_std_db = 3.0;
};

/// Static description of the CF-MIMO downlink scenario: dimensions, PHY
/// parameters, traffic, and the synthetic channel model.
struct EnvConfig {
  int num_aps = 3;        // B
  int num_ues = 3;        // U
  int num_subbands = 4;   // K
  int num_antennas = 4;   // M
  int subcarriers = 20;   // C, per subband
  int symbols = 75;       // N, per slot

  double p_max_dbm = 20.0;
  double noise_psd_dbm_hz = -174.0;
  double block_error_prob = 1e-6;  // eps_u
  double arrival_rate = 30.0;      // lambda_u, packets per slot per UE
  int packet_bits_min = 50;
  int packet_bits_max = 200;
  int deadline_slots = 2;          // D_u
  double buffer_bits = 30000.0;    // Q_max
  int slots_per_episode = 200;     // T
  double slot_seconds = 5e-3;
  double subcarrier_spacing_hz = 15e3;
  double bandwidth_hz = 1.2e6;

  ChannelConfig channel;

  static EnvConfig paper_default();
  static EnvConfig desk_default();

  // Derived quantities.
  std::size_t num_links() const {
    return static_cast<std::size_t>(num_aps) * num_ues * num_subbands;
  }
  std::size_t pbm_dim() const { return num_links() * static_cast<std::size_t>(num_antennas); }
  std::size_t state_dim() const { return pbm_dim() + 2 * static_cast<std::size_t>(num_ues); }
  std::size_t action_dim() const { return 3 * num_links(); }
  double p_max_watts() const;
  double subband_bandwidth_hz() const { return subcarriers * subcarrier_spacing_hz; }
  double noise_power_watts() const;  // per subband

  /// Throws std::invalid_argument when an invariant is broken
  /// (N*K*C/bandwidth must equal slot_seconds, counts >= 1, a_ch in [0,1)).
  void validate() const;

  /// Hash of the canonical field serialization; embedded in every artifact.
  std::uint64_t hash() const;

  nlohmann::json to_json() const;
  static EnvConfig from_json(const nlohmann::json& j);
};

}  // namespace deterra::env
