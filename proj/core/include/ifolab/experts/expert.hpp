#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifolab/envs/env.hpp"

namespace ifolab::experts {

// A state-only episode: s0..sT plus reward kept as metadata. No actions are
// stored anywhere in this module's data or files.
struct Trajectory {
  std::vector<std::vector<double>> states;
  double reward = 0.0;
};

// Adjacent state pairs (s_t, s_{t+1}) pooled across trajectories.
struct StatePairSet {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::size_t size() const { return first.size(); }
};

// Scripted policy for the env's current internal state: cartpole balances by
// a PD rule on the pole angle, mountaincar and acrobot pump energy in the
// direction of motion, the maze expert follows BFS shortest paths.
int expert_action(const envs::Env& env);

// Runs the expert until n_episodes goal-reaching episodes are collected,
// re-seeding failed attempts. Throws DataError after 100 consecutive
// failures.
std::vector<Trajectory> record_demonstrations(const envs::EnvSpec& spec, int n_episodes,
                                              std::uint64_t seed);

StatePairSet make_pairs(const std::vector<Trajectory>& demos);

// Demo file: header line with the format version, then one trajectory per
// line: env name, shape (dims joined by 'x'), state count, flattened values
// serialized with full double round-trip precision.
void write_demos(const std::string& path, const envs::EnvSpec& spec,
                 const std::vector<Trajectory>& demos);

struct DemoFile {
  std::string env_name;
  std::vector<Trajectory> trajectories;
};
DemoFile read_demos(const std::string& path);

}  // namespace ifolab::experts
