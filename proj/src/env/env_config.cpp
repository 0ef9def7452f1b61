#include "env/env_config.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "core/bytes.hpp"

namespace deterra::env {

EnvConfig EnvConfig::paper_default() { return EnvConfig{}; }

EnvConfig EnvConfig::desk_default() {
  EnvConfig c;
  c.num_aps = 2;
  c.num_ues = 2;
  c.num_subbands = 2;
  c.num_antennas = 2;
  c.bandwidth_hz = c.num_subbands * c.subcarriers * c.subcarrier_spacing_hz;  // 600 kHz
  c.slots_per_episode = 100;
  c.arrival_rate = 20.0;
  c.buffer_bits = 6000.0;
  return c;
}

double EnvConfig::p_max_watts() const { return std::pow(10.0, (p_max_dbm - 30.0) / 10.0); }

double EnvConfig::noise_power_watts() const {
  return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * subband_bandwidth_hz();
}

void EnvConfig::validate() const {
  if (num_aps < 1 || num_ues < 1 || num_subbands < 1 || num_antennas < 1 || subcarriers < 1 ||
      symbols < 1 || slots_per_episode < 1 || deadline_slots < 1)
    throw std::invalid_argument("EnvConfig: all counts must be >= 1");
  if (!(channel.time_corr >= 0.0 && channel.time_corr < 1.0))
    throw std::invalid_argument("EnvConfig: channel time correlation must be in [0,1)");
  if (channel.num_paths < 1) throw std::invalid_argument("EnvConfig: num_paths must be >= 1");
  const double slot = static_cast<double>(symbols) * num_subbands * subcarriers / bandwidth_hz;
  if (std::fabs(slot - slot_seconds) > 1e-9 * slot_seconds)
    throw std::invalid_argument("EnvConfig: N*K*C/bandwidth must equal slot_seconds");
  if (std::fabs(bandwidth_hz - num_subbands * subcarriers * subcarrier_spacing_hz) >
      1e-6 * bandwidth_hz)
    throw std::invalid_argument("EnvConfig: bandwidth must equal K*C*subcarrier_spacing");
  if (packet_bits_min < 1 || packet_bits_max < packet_bits_min)
    throw std::invalid_argument("EnvConfig: bad packet size range");
  if (!(block_error_prob > 0.0 && block_error_prob < 1.0))
    throw std::invalid_argument("EnvConfig: block error probability outside (0,1)");
  if (arrival_rate < 0.0) throw std::invalid_argument("EnvConfig: negative arrival rate");
  if (buffer_bits <= 0.0) throw std::invalid_argument("EnvConfig: buffer must be positive");
}

std::uint64_t EnvConfig::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << num_aps << '|' << num_ues << '|' << num_subbands << '|' << num_antennas << '|'
     << subcarriers << '|' << symbols << '|' << p_max_dbm << '|' << noise_psd_dbm_hz << '|'
     << block_error_prob << '|' << arrival_rate << '|' << packet_bits_min << '|'
     << packet_bits_max << '|' << deadline_slots << '|' << buffer_bits << '|'
     << slots_per_episode << '|' << slot_seconds << '|' << subcarrier_spacing_hz << '|'
     << bandwidth_hz << '|' << channel.num_paths << '|' << channel.angle_spread << '|'
     << channel.path_decay << '|' << channel.time_corr << '|' << channel.delay_spread_s << '|'
     << channel.mean_gain_db << '|' << channel.shadowing_std_db;
  return fnv1a64(os.str());
}

nlohmann::json EnvConfig::to_json() const {
  return nlohmann::json{
      {"num_aps", num_aps},
      {"num_ues", num_ues},
      {"num_subbands", num_subbands},
      {"num_antennas", num_antennas},
      {"subcarriers", subcarriers},
      {"symbols", symbols},
      {"p_max_dbm", p_max_dbm},
      {"noise_psd_dbm_hz", noise_psd_dbm_hz},
      {"block_error_prob", block_error_prob},
      {"arrival_rate", arrival_rate},
      {"packet_bits_min", packet_bits_min},
      {"packet_bits_max", packet_bits_max},
      {"deadline_slots", deadline_slots},
      {"buffer_bits", buffer_bits},
      {"slots_per_episode", slots_per_episode},
      {"slot_seconds", slot_seconds},
      {"subcarrier_spacing_hz", subcarrier_spacing_hz},
      {"bandwidth_hz", bandwidth_hz},
      {"channel",
       {{"num_paths", channel.num_paths},
        {"angle_spread", channel.angle_spread},
        {"path_decay", channel.path_decay},
        {"time_corr", channel.time_corr},
        {"delay_spread_s", channel.delay_spread_s},
        {"mean_gain_db", channel.mean_gain_db},
        {"shadowing_std_db", channel.shadowing_std_db}}}};
}

EnvConfig EnvConfig::from_json(const nlohmann::json& j) {
  EnvConfig c;
  c.num_aps = j.value("num_aps", c.num_aps);
  c.num_ues = j.value("num_ues", c.num_ues);
  c.num_subbands = j.value("num_subbands", c.num_subbands);
  c.num_antennas = j.value("num_antennas", c.num_antennas);
  c.subcarriers = j.value("subcarriers", c.subcarriers);
  c.symbols = j.value("symbols", c.symbols);
  c.p_max_dbm = j.value("p_max_dbm", c.p_max_dbm);
  c.noise_psd_dbm_hz = j.value("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  c.block_error_prob = j.value("block_error_prob", c.block_error_prob);
  c.arrival_rate = j.value("arrival_rate", c.arrival_rate);
  c.packet_bits_min = j.value("packet_bits_min", c.packet_bits_min);
  c.packet_bits_max = j.value("packet_bits_max", c.packet_bits_max);
  c.deadline_slots = j.value("deadline_slots", c.deadline_slots);
  c.buffer_bits = j.value("buffer_bits", c.buffer_bits);
  c.slots_per_episode = j.value("slots_per_episode", c.slots_per_episode);
  c.slot_seconds = j.value("slot_seconds", c.slot_seconds);
  c.subcarrier_spacing_hz = j.value("subcarrier_spacing_hz", c.subcarrier_spacing_hz);
  c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
  if (j.contains("channel")) {
    const auto& cj = j.at("channel");
    c.channel.num_paths = cj.value("num_paths", c.channel.num_paths);
    c.channel.angle_spread = cj.value("angle_spread", c.channel.angle_spread);
    c.channel.path_decay = cj.value("path_decay", c.channel.path_decay);
    c.channel.time_corr = cj.value("time_corr", c.channel.time_corr);
    c.channel.delay_spread_s = cj.value("delay_spread_s", c.channel.delay_spread_s);
    c.channel.mean_gain_db = cj.value("mean_gain_db", c.channel.mean_gain_db);
    c.channel.shadowing_std_db = cj.value("shadowing_std_db", c.channel.shadowing_std_db);
  }
  return c;
}

}  // namespace deterra::env
