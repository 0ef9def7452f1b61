#pragma once

#include <deque>
#include <vector>

#include "env/env_config.hpp"
#include "mathcore/rng.hpp"

namespace deterra::env {

struct Packet {
  long arrival_slot = 0;
  double size_bits = 0.0;
  double remaining_bits = 0.0;
};

/// FIFO queue of one UE; a single deadline class makes EDF degenerate to FIFO.
struct UeQueue {
  std::deque<Packet> packets;
  double total_bits = 0.0;

  std::size_t depth() const { return packets.size(); }
  /// Packets with <= 1 slot left before their deadline at the next decision.
  long urgent_count(long current_slot, int deadline_slots) const;
};

struct SlotCounters {
  long vio = 0;
  long drop = 0;
  long tx = 0;
  long arrivals = 0;
  double bits_served = 0.0;
  std::vector<long> tx_delays;  // slots, one entry per transmitted packet
};

/// One slot of queue dynamics, in order: (1) serve up to psi bits FIFO,
/// counting fully drained packets as tx with delay = current_slot - arrival;
/// (2) expire packets older than the deadline (counted vio, removed);
/// (3) Poisson arrivals with integer-uniform sizes, dropped once the buffer
/// would overflow.
SlotCounters queue_step(const EnvConfig& cfg, UeQueue& q, double psi_bits, long current_slot,
                        math::SeededRng& rng);

}  // namespace deterra::env
