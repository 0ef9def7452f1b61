#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "env/dataset.hpp"
#include "env/environment.hpp"
#include "mathcore/special.hpp"
#include "oracles.hpp"

using namespace deterra;
using namespace deterra::env;
using math::SeededRng;

namespace {

EnvConfig tiny_config() {
  EnvConfig c = EnvConfig::desk_default();
  c.validate();
  return c;
}

RawAction uniform_action(const EnvConfig& cfg, SeededRng& rng) {
  RawAction a;
  const std::size_t n = cfg.num_links();
  a.zeta_hat.resize(n);
  a.i_hat.resize(n);
  a.p_hat.resize(n);
  for (auto& v : a.zeta_hat) v = rng.uniform(-1.0, 1.0);
  for (auto& v : a.i_hat) v = rng.uniform(-1.0, 1.0);
  for (auto& v : a.p_hat) v = rng.uniform(-1.0, 1.0);
  return a;
}

}  // namespace

TEST_CASE("codebook: unit norms, orthogonality, first column") {
  const auto cb1 = build_codebook(1);
  CHECK(cb1.size() == 1);
  CHECK(std::abs(cb1[0] - Cplx(1.0, 0.0)) < 1e-15);

  const auto cb = build_codebook(4);
  for (int m = 0; m < 4; ++m) {
    double norm = 0.0;
    for (int a = 0; a < 4; ++a) norm += std::norm(cb[m * 4 + a]);
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      Cplx acc(0.0, 0.0);
      for (int a = 0; a < 4; ++a) acc += std::conj(cb[i * 4 + a]) * cb[j * 4 + a];
      CHECK(std::abs(acc) < 1e-12);
    }
  for (int a = 0; a < 4; ++a) CHECK(std::abs(cb[a] - Cplx(0.5, 0.0)) < 1e-12);
}

TEST_CASE("channel: frozen at a_ch=1, independent at a_ch=0, stationary variance") {
  EnvConfig cfg = tiny_config();

  cfg.channel.time_corr = 0.0;  // temporarily; validate() forbids 1.0 so test advance manually
  SeededRng rng(3, 1);
  ChannelState ch = channel_reset(cfg, rng);
  // manual freeze: time_corr = 1 - eps behaves continuously; emulate exact
  // freeze by checking the update formula collapses
  EnvConfig frozen = cfg;
  frozen.channel.time_corr = 0.999999999;
  ChannelState chf = channel_reset(frozen, rng);
  const Vec before = compute_pbm(frozen, chf);
  channel_advance(frozen, chf, rng);
  const Vec after = compute_pbm(frozen, chf);
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-3));

  // a_ch = 0: consecutive slots uncorrelated
  cfg.channel.time_corr = 0.0;
  ChannelState ch0 = channel_reset(cfg, rng);
  const int n = 10000;
  Vec x(n), y(n);
  double prev = compute_pbm(cfg, ch0)[0];
  for (int t = 0; t < n; ++t) {
    channel_advance(cfg, ch0, rng);
    const double cur = compute_pbm(cfg, ch0)[0];
    x[t] = prev;
    y[t] = cur;
    prev = cur;
  }
  const double mx = oracles::mean_of(x), my = oracles::mean_of(y);
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (int t = 0; t < n; ++t) {
    num += (x[t] - mx) * (y[t] - my);
    dx += (x[t] - mx) * (x[t] - mx);
    dy += (y[t] - my) * (y[t] - my);
  }
  CHECK(std::fabs(num / std::sqrt(dx * dy)) < 0.05);

  // stationarity of per-entry variance under the AR(1) update
  cfg.channel.time_corr = 0.9;
  const int reals = 8000, horizon = 60;
  Vec v1(reals), vh(reals);
  for (int rep = 0; rep < reals; ++rep) {
    SeededRng r(1000 + rep, 2);
    ChannelState c = channel_reset(cfg, r);
    channel_advance(cfg, c, r);
    v1[rep] = c.h[0].real();
    for (int t = 1; t < horizon; ++t) channel_advance(cfg, c, r);
    vh[rep] = c.h[0].real();
  }
  const double var1 = oracles::variance_of(v1);
  const double varh = oracles::variance_of(vh);
  CHECK(std::fabs(var1 - varh) / var1 < 0.05);
}

TEST_CASE("compute_pbm: codeword channel, zero channel, Parseval") {
  EnvConfig cfg = tiny_config();
  cfg.num_aps = 1;
  cfg.num_ues = 1;
  cfg.num_subbands = 1;
  cfg.num_antennas = 4;
  SeededRng rng(5, 5);
  ChannelState ch;
  const auto cb = build_codebook(4);
  ch.h.assign(4, Cplx(0, 0));
  for (int a = 0; a < 4; ++a) ch.h[a] = cb[a];  // h = f_0
  Vec r = compute_pbm(cfg, ch);
  CHECK(r.size() == 4);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
  double sum_sq = 0.0;
  for (double v : r) sum_sq += v * v;
  CHECK(sum_sq == doctest::Approx(1.0).epsilon(1e-12));

  ch.h.assign(4, Cplx(0, 0));
  r = compute_pbm(cfg, ch);
  for (double v : r) CHECK(v == 0.0);

  for (int rep = 0; rep < 20; ++rep) {
    double h_norm = 0.0;
    for (int a = 0; a < 4; ++a) {
      ch.h[a] = Cplx(rng.normal(), rng.normal());
      h_norm += std::norm(ch.h[a]);
    }
    r = compute_pbm(cfg, ch);
    sum_sq = 0.0;
    for (double v : r) sum_sq += v * v;
    CHECK(sum_sq == doctest::Approx(h_norm).epsilon(1e-10));
  }
}

TEST_CASE("decode_action: thresholds, beam bins, softmax power") {
  EnvConfig cfg;
  cfg.num_aps = 1;
  cfg.num_ues = 3;
  cfg.num_subbands = 4;
  cfg.num_antennas = 4;
  cfg.p_max_dbm = 20.0;  // 0.1 W
  const std::size_t n = cfg.num_links();
  RawAction raw;
  raw.zeta_hat.assign(n, -0.5);
  raw.i_hat.assign(n, 0.2);
  raw.p_hat.assign(n, 0.123);
  DecodedAction act = decode_action(cfg, raw);
  for (auto z : act.zeta) CHECK(z == 0);
  for (auto b : act.beam_idx) CHECK(b == 2);  // floor(1.2*4/2) = 2
  for (auto p : act.power) CHECK(p == doctest::Approx(0.1 / 12.0).epsilon(1e-12));

  raw.zeta_hat.assign(n, 0.5);
  act = decode_action(cfg, raw);
  for (auto z : act.zeta) CHECK(z == 1);
  raw.zeta_hat.assign(n, 0.0);  // tie resolves to scheduled
  act = decode_action(cfg, raw);
  for (auto z : act.zeta) CHECK(z == 1);

  // beam binning never exceeds M-1 and reaches every codeword
  SeededRng rng(6, 6);
  std::vector<int> seen(4, 0);
  for (int rep = 0; rep < 2000; ++rep) {
    raw.i_hat.assign(n, rng.uniform(-0.999999, 0.999999));
    act = decode_action(cfg, raw);
    for (auto b : act.beam_idx) {
      CHECK(b >= 0);
      CHECK(b <= 3);
      seen[static_cast<std::size_t>(b)] = 1;
    }
  }
  CHECK(seen[0] + seen[1] + seen[2] + seen[3] == 4);

  // per-AP power sums to P_max exactly (softmax construction)
  EnvConfig big = tiny_config();
  for (int rep = 0; rep < 50; ++rep) {
    const RawAction r2 = uniform_action(big, rng);
    const DecodedAction a2 = decode_action(big, r2);
    const std::size_t per_ap =
        static_cast<std::size_t>(big.num_ues) * big.num_subbands;
    for (int b = 0; b < big.num_aps; ++b) {
      double total = 0.0, scheduled = 0.0;
      for (std::size_t i = 0; i < per_ap; ++i) {
        total += a2.power[b * per_ap + i];
        if (a2.zeta[b * per_ap + i]) scheduled += a2.power[b * per_ap + i];
      }
      CHECK(total == doctest::Approx(big.p_max_watts()).epsilon(1e-9));
      CHECK(scheduled <= big.p_max_watts() * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("compute_sinr: single-link arithmetic, unscheduled UE, noise floor") {
  EnvConfig cfg;
  cfg.num_aps = 1;
  cfg.num_ues = 1;
  cfg.num_subbands = 1;
  cfg.num_antennas = 1;
  cfg.subcarriers = 20;
  cfg.p_max_dbm = 20.0;
  // noise power exactly 1e-3 W over the subband
  cfg.noise_psd_dbm_hz =
      10.0 * std::log10(1e-3 / cfg.subband_bandwidth_hz()) + 30.0;
  ChannelState ch;
  ch.h.assign(1, Cplx(1.0, 0.0));
  DecodedAction act;
  act.zeta = {1};
  act.beam_idx = {0};
  act.power = {0.1};
  const Mat gamma = compute_sinr(cfg, ch, act);
  CHECK(gamma(0, 0) == doctest::Approx(5.0).epsilon(1e-9));

  act.zeta = {0};
  const Mat gamma0 = compute_sinr(cfg, ch, act);
  CHECK(gamma0(0, 0) == 0.0);

  // default-config noise level: -174 dBm/Hz over 300 kHz is about -119.23 dBm
  EnvConfig def = EnvConfig::paper_default();
  const double noise_dbm = 10.0 * std::log10(def.noise_power_watts() * 1000.0);
  CHECK(noise_dbm == doctest::Approx(-119.23).epsilon(1e-3));
}

TEST_CASE("compute_bits: zero SINR, Shannon bound, spot value") {
  EnvConfig cfg = EnvConfig::paper_default();
  CHECK(compute_bits(cfg, Vec{0.0, 0.0, 0.0, 0.0}) == 0.0);

  // independently recomputed finite-blocklength arithmetic
  const double shannon = 1500.0 * std::log2(6.0);
  const double v = std::pow(std::log2(std::exp(1.0)), 2) * (1.0 - 1.0 / 36.0);
  const double penalty = math::gaussian_q_inv(1e-6) * std::sqrt(1500.0 * v);
  const double psi = compute_bits(cfg, Vec{5.0});
  CHECK(psi == doctest::Approx(shannon - penalty).epsilon(1e-9));
  CHECK(std::fabs(psi - 3615.1) < 0.5);

  SeededRng rng(8, 1);
  for (int rep = 0; rep < 200; ++rep) {
    Vec row(4);
    for (auto& g : row) g = std::exp(rng.uniform(-3.0, 3.0));
    double sh = 0.0;
    for (double g : row) sh += 1500.0 * std::log2(1.0 + g);
    const double bits = compute_bits(cfg, row);
    CHECK(bits <= sh + 1e-9);
    // monotonic in every coordinate (unclamped region)
    if (bits > 0.0) {
      for (int k = 0; k < 4; ++k) {
        Vec bumped = row;
        bumped[static_cast<std::size_t>(k)] += 1e-5;
        CHECK(compute_bits(cfg, bumped) >= bits - 1e-12);
      }
    }
  }
}

TEST_CASE("queue_step: drain, capacity rule, cost arithmetic") {
  EnvConfig cfg = tiny_config();
  cfg.arrival_rate = 0.0;
  SeededRng rng(9, 9);

  UeQueue q;
  q.packets.push_back(Packet{0, 1000.0, 1000.0});
  q.total_bits = 1000.0;
  const SlotCounters c1 = queue_step(cfg, q, 1000.0, 1, rng);
  CHECK(c1.tx == 1);
  CHECK(q.packets.empty());
  CHECK(q.total_bits == doctest::Approx(0.0));
  CHECK(c1.tx_delays[0] == 1);

  // capacity rule: fixed-size arrivals against a nearly full buffer
  EnvConfig cap = cfg;
  cap.arrival_rate = 5.0;
  cap.packet_bits_min = cap.packet_bits_max = 100;
  cap.buffer_bits = 150.0;
  for (int rep = 0; rep < 50; ++rep) {
    UeQueue qq;
    const SlotCounters c = queue_step(cap, qq, 0.0, 1, rng);
    const long kept = static_cast<long>(qq.packets.size());
    CHECK(kept == std::min<long>(c.arrivals, 1));
    CHECK(c.drop == c.arrivals - kept);
  }

  // one violation among ten events gives cost 0.1
  UeQueue q10;
  for (int i = 0; i < 10; ++i) q10.packets.push_back(Packet{0, 100.0, 100.0});
  q10.total_bits = 1000.0;
  EnvConfig dcfg = cfg;
  dcfg.deadline_slots = 1;
  const SlotCounters c10 = queue_step(dcfg, q10, 900.0, 2, rng);
  CHECK(c10.tx == 9);
  CHECK(c10.vio == 1);
  const double cost = static_cast<double>(c10.vio + c10.drop) / (c10.vio + c10.drop + c10.tx);
  CHECK(cost == doctest::Approx(0.1));
}

TEST_CASE("queue delays match the closed-form backlog recursion") {
  // big deadline and buffer: pure FIFO, no expiry or drops
  EnvConfig cfg = tiny_config();
  cfg.deadline_slots = 1000000;
  cfg.buffer_bits = 1e15;
  cfg.arrival_rate = 3.0;
  cfg.packet_bits_min = 50;
  cfg.packet_bits_max = 200;
  SeededRng rng(12, 3);

  UeQueue q;
  const int horizon = 400;
  Vec psi_seq(horizon + 1, 0.0);
  Vec q_begin(horizon + 1, 0.0);
  std::vector<std::vector<double>> arrivals(horizon + 1);
  std::vector<std::pair<long, long>> observed;  // (arrival_slot, delay)

  for (int t = 1; t <= horizon; ++t) {
    const double psi = rng.uniform(0.0, 900.0);
    psi_seq[t] = psi;
    q_begin[t] = q.total_bits;
    const SlotCounters c = queue_step(cfg, q, psi, t, rng);
    // record arrival sizes of this slot from the tail of the queue (nothing
    // arriving at slot t can have been served yet, and the buffer never drops
    // in this configuration)
    std::vector<double> sizes;
    for (auto it = q.packets.rbegin(); it != q.packets.rend(); ++it) {
      if (it->arrival_slot == t) sizes.insert(sizes.begin(), it->size_bits);
    }
    arrivals[static_cast<std::size_t>(t)] = sizes;
    for (long d : c.tx_delays) observed.push_back({t - d, d});
  }

  // closed form: packet a of slot t drains at the first tau with
  // [Q(t) - psi_t]^+ + sum_{i<=a} G_i - sum_{i=t+1}^{tau} psi_i <= 0
  std::size_t checked = 0;
  for (int t = 1; t <= horizon; ++t) {
    const auto& sizes = arrivals[static_cast<std::size_t>(t)];
    double cum = std::max(q_begin[t] - psi_seq[t], 0.0);
    for (std::size_t a = 0; a < sizes.size(); ++a) {
      cum += sizes[a];
      double rem = cum;
      long delay = -1;
      for (int tau = t + 1; tau <= horizon; ++tau) {
        rem -= psi_seq[tau];
        if (rem <= 1e-9) {
          delay = tau - t;
          break;
        }
      }
      if (delay < 0) continue;  // not drained within the horizon
      // find the observed delay for this packet
      bool found = false;
      for (const auto& [at, d] : observed)
        if (at == t && d == delay) {
          found = true;
          break;
        }
      CHECK(found);
      ++checked;
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("environment step: degenerate schedule, energy identity, reset moments") {
  EnvConfig cfg = tiny_config();
  Environment envr(cfg);
  SeededRng rng(13, 0);
  envr.reset(rng);

  RawAction none;
  none.zeta_hat.assign(cfg.num_links(), -0.5);
  none.i_hat.assign(cfg.num_links(), 0.1);
  none.p_hat.assign(cfg.num_links(), 0.0);
  const StepOutcome out = envr.step(none, rng);
  CHECK(out.reward == 0.0);
  for (double b : out.bits_served) CHECK(b == 0.0);
  CHECK(out.energy_joules == 0.0);

  RawAction all;
  all.zeta_hat.assign(cfg.num_links(), 0.5);
  all.i_hat.assign(cfg.num_links(), 0.1);
  all.p_hat.assign(cfg.num_links(), 0.3);
  const StepOutcome out2 = envr.step(all, rng);
  CHECK(out2.energy_joules ==
        doctest::Approx(cfg.num_aps * cfg.p_max_watts() * cfg.slot_seconds).epsilon(1e-9));
  for (double c : out2.cost_per_user) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
  for (std::size_t u = 0; u < out2.next_state.q_buf.size(); ++u)
    CHECK(out2.next_state.q_urg[u] <= out2.next_state.q_buf[u]);

  // reset: empty queues when no traffic
  EnvConfig quiet = cfg;
  quiet.arrival_rate = 0.0;
  Environment eq(quiet);
  const CmdpState s0 = eq.reset(rng);
  for (double v : s0.q_buf) CHECK(v == 0.0);
  for (double v : s0.q_urg) CHECK(v == 0.0);

  // reset determinism
  Environment e1(cfg), e2(cfg);
  SeededRng ra(21, 4), rb(21, 4);
  const CmdpState sa = e1.reset(ra);
  const CmdpState sb = e2.reset(rb);
  CHECK(sa.to_vector() == sb.to_vector());

  // Poisson moment at reset
  EnvConfig pois = cfg;
  pois.arrival_rate = 5.0;
  pois.buffer_bits = 1e9;
  Environment ep(pois);
  double acc = 0.0;
  const int n_resets = 10000;
  for (int i = 0; i < n_resets; ++i) {
    SeededRng r(40000 + i, 1);
    acc += ep.reset(r).q_buf[0];
  }
  CHECK(std::fabs(acc / n_resets - 5.0) <= 3.0 * std::sqrt(5.0 / n_resets));
}

TEST_CASE("episode determinism and packet conservation") {
  EnvConfig cfg = tiny_config();
  Environment e1(cfg), e2(cfg);
  SeededRng r1(77, 0), r2(77, 0), act_rng(78, 0);

  std::vector<RawAction> actions;
  for (int t = 0; t < cfg.slots_per_episode; ++t) actions.push_back(uniform_action(cfg, act_rng));

  e1.reset(r1);
  e2.reset(r2);
  long arrivals = e1.buffered_packets();  // reset seeds one slot of arrivals
  long tx = 0, vio = 0, drop = 0;
  for (int t = 0; t < cfg.slots_per_episode; ++t) {
    const StepOutcome o1 = e1.step(actions[static_cast<std::size_t>(t)], r1);
    const StepOutcome o2 = e2.step(actions[static_cast<std::size_t>(t)], r2);
    CHECK(o1.reward == o2.reward);
    CHECK(o1.next_state.to_vector() == o2.next_state.to_vector());
    CHECK(o1.cost_agg == o2.cost_agg);
    for (std::size_t u = 0; u < o1.tx.size(); ++u) {
      tx += o1.tx[u];
      vio += o1.vio[u];
      drop += o1.drop[u];
      arrivals += o1.arrivals[u];
    }
  }
  CHECK(arrivals == tx + vio + drop + e1.buffered_packets());
}

TEST_CASE("dataset round trip and csv header") {
  TransitionDataset ds;
  ds.state_dim = 3;
  ds.action_dim = 2;
  ds.num_ue = 2;
  ds.env_hash = 0x1234abcd;
  const std::size_t n = 17;
  ds.states = Mat(n, 3);
  ds.actions = Mat(n, 2);
  ds.rewards.resize(n);
  ds.costs.resize(n);
  ds.cost_per_user = Mat(n, 2);
  ds.next_states = Mat(n, 3);
  SeededRng rng(1, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) ds.states(i, j) = rng.normal();
    for (int j = 0; j < 2; ++j) ds.actions(i, j) = rng.normal();
    ds.rewards[i] = rng.normal();
    ds.costs[i] = rng.uniform01();
    for (int j = 0; j < 2; ++j) ds.cost_per_user(i, j) = rng.uniform01();
    for (int j = 0; j < 3; ++j) ds.next_states(i, j) = rng.normal();
  }
  const std::string path = "/tmp/deterra_test_ds.bin";
  save_dataset(ds, path);
  const TransitionDataset back = load_dataset(path);
  CHECK(back.count() == n);
  CHECK(back.env_hash == ds.env_hash);
  CHECK(back.states == ds.states);
  CHECK(back.actions == ds.actions);
  CHECK(back.rewards == ds.rewards);
  CHECK(back.costs == ds.costs);
  CHECK(back.cost_per_user == ds.cost_per_user);
  CHECK(back.next_states == ds.next_states);
  std::remove(path.c_str());

  const std::string csv = "/tmp/deterra_test_ds.csv";
  save_dataset_csv(ds, csv);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "s_0,s_1,s_2,a_0,a_1,reward,cost,sp_0,sp_1,sp_2");
  std::remove(csv.c_str());
}
