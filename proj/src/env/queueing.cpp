#include "env/queueing.hpp"

namespace deterra::env {

long UeQueue::urgent_count(long current_slot, int deadline_slots) const {
  long n = 0;
  for (const auto& p : packets)
    if (current_slot - p.arrival_slot >= deadline_slots - 1) ++n;
  return n;
}

SlotCounters queue_step(const EnvConfig& cfg, UeQueue& q, double psi_bits, long current_slot,
                        math::SeededRng& rng) {
  SlotCounters out;

  // (1) FIFO service
  double budget = psi_bits;
  while (budget > 0.0 && !q.packets.empty()) {
    Packet& head = q.packets.front();
    const double served = std::min(budget, head.remaining_bits);
    head.remaining_bits -= served;
    q.total_bits -= served;
    budget -= served;
    out.bits_served += served;
    if (head.remaining_bits <= 1e-9) {
      out.tx += 1;
      out.tx_delays.push_back(current_slot - head.arrival_slot);
      q.total_bits -= head.remaining_bits;  // clear any residual epsilon
      q.packets.pop_front();
    }
  }

  // (2) deadline expiry
  for (std::size_t i = 0; i < q.packets.size();) {
    if (current_slot - q.packets[i].arrival_slot > cfg.deadline_slots) {
      q.total_bits -= q.packets[i].remaining_bits;
      q.packets.erase(q.packets.begin() + static_cast<long>(i));
      out.vio += 1;
    } else {
      ++i;
    }
  }
  if (q.total_bits < 0.0) q.total_bits = 0.0;

  // (3) arrivals
  const int n_arrivals = rng.poisson(cfg.arrival_rate);
  out.arrivals = n_arrivals;
  for (int a = 0; a < n_arrivals; ++a) {
    const double size = static_cast<double>(
        rng.uniform_int(cfg.packet_bits_min, cfg.packet_bits_max));
    if (q.total_bits + size > cfg.buffer_bits) {
      out.drop += 1;
    } else {
      q.packets.push_back(Packet{current_slot, size, size});
      q.total_bits += size;
    }
  }
  return out;
}

}  // namespace deterra::env
