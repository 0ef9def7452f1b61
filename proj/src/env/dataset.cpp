#include "env/dataset.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace deterra::env {
namespace {

constexpr std::uint64_t kMagic = 0x4454524441544134ULL;  // "DTRDATA4"
constexpr std::uint64_t kVersion = 1;

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_dataset(const TransitionDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dataset: cannot write " + path);
  write_u64(out, kMagic);
  write_u64(out, kVersion);
  write_u64(out, ds.state_dim);
  write_u64(out, ds.action_dim);
  write_u64(out, ds.num_ue);
  write_u64(out, ds.count());
  write_u64(out, ds.env_hash);
  for (std::size_t i = 0; i < ds.count(); ++i) {
    out.write(reinterpret_cast<const char*>(ds.states.row(i)),
              static_cast<std::streamsize>(ds.state_dim * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ds.actions.row(i)),
              static_cast<std::streamsize>(ds.action_dim * sizeof(double)));
    out.write(reinterpret_cast<const char*>(&ds.rewards[i]), sizeof(double));
    out.write(reinterpret_cast<const char*>(&ds.costs[i]), sizeof(double));
    out.write(reinterpret_cast<const char*>(ds.cost_per_user.row(i)),
              static_cast<std::streamsize>(ds.num_ue * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ds.next_states.row(i)),
              static_cast<std::streamsize>(ds.state_dim * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

TransitionDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: cannot read " + path);
  if (read_u64(in) != kMagic) throw std::runtime_error("load_dataset: bad magic in " + path);
  if (read_u64(in) != kVersion) throw std::runtime_error("load_dataset: bad version in " + path);
  TransitionDataset ds;
  ds.state_dim = read_u64(in);
  ds.action_dim = read_u64(in);
  ds.num_ue = read_u64(in);
  const std::size_t count = read_u64(in);
  ds.env_hash = read_u64(in);
  ds.states = Mat(count, ds.state_dim);
  ds.actions = Mat(count, ds.action_dim);
  ds.rewards.resize(count);
  ds.costs.resize(count);
  ds.cost_per_user = Mat(count, ds.num_ue);
  ds.next_states = Mat(count, ds.state_dim);
  for (std::size_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(ds.states.row(i)),
            static_cast<std::streamsize>(ds.state_dim * sizeof(double)));
    in.read(reinterpret_cast<char*>(ds.actions.row(i)),
            static_cast<std::streamsize>(ds.action_dim * sizeof(double)));
    in.read(reinterpret_cast<char*>(&ds.rewards[i]), sizeof(double));
    in.read(reinterpret_cast<char*>(&ds.costs[i]), sizeof(double));
    in.read(reinterpret_cast<char*>(ds.cost_per_user.row(i)),
            static_cast<std::streamsize>(ds.num_ue * sizeof(double)));
    in.read(reinterpret_cast<char*>(ds.next_states.row(i)),
            static_cast<std::streamsize>(ds.state_dim * sizeof(double)));
  }
  if (!in) throw std::runtime_error("load_dataset: truncated file " + path);
  return ds;
}

void save_dataset_csv(const TransitionDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset_csv: cannot write " + path);
  out.precision(17);
  for (std::size_t j = 0; j < ds.state_dim; ++j) out << "s_" << j << ",";
  for (std::size_t j = 0; j < ds.action_dim; ++j) out << "a_" << j << ",";
  out << "reward,cost";
  for (std::size_t j = 0; j < ds.state_dim; ++j) out << ",sp_" << j;
  out << "\n";
  for (std::size_t i = 0; i < ds.count(); ++i) {
    for (std::size_t j = 0; j < ds.state_dim; ++j) out << ds.states(i, j) << ",";
    for (std::size_t j = 0; j < ds.action_dim; ++j) out << ds.actions(i, j) << ",";
    out << ds.rewards[i] << "," << ds.costs[i];
    for (std::size_t j = 0; j < ds.state_dim; ++j) out << "," << ds.next_states(i, j);
    out << "\n";
  }
}

}  // namespace deterra::env
