#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ifolab::envs {

enum class EnvKind { cartpole, acrobot, mountaincar, maze };

// Static description of an environment: action set size, encoded state length,
// episode step cap, and (for mazes) the grid size.
struct EnvSpec {
  EnvKind kind = EnvKind::cartpole;
  std::string name = "cartpole";
  int action_count = 2;
  int state_dim = 4;
  int step_cap = 500;
  int maze_size = 0;  // 0 for classic control
};

// Accepts: cartpole, acrobot, mountaincar, maze3, maze5, maze10, or mazeN for
// any N >= 2. Throws ConfigError on anything else.
EnvSpec spec_from_name(const std::string& name);

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

// A single episode simulator. reset(seed) starts a fresh episode whose
// randomness derives entirely from the seed; step advances it. The encoded
// state is available via state() between calls.
class Env {
 public:
  explicit Env(EnvSpec spec) : spec_(std::move(spec)) {}
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }

  virtual void reset(std::uint64_t seed) = 0;
  StepResult step(int action);  // UsageError after done or on a bad action

  const std::vector<double>& state() const { return state_; }
  bool done() const { return done_; }
  int steps() const { return steps_; }
  double episode_reward() const { return reward_sum_; }

  // Whether this episode achieved the environment goal. Meaningful once the
  // episode is over (and monotone: once true it stays true).
  virtual bool goal() const = 0;

 protected:
  virtual StepResult advance(int action) = 0;

  void begin_episode() {
    done_ = false;
    steps_ = 0;
    reward_sum_ = 0.0;
  }

  EnvSpec spec_;
  std::vector<double> state_;

 private:
  bool done_ = true;
  int steps_ = 0;
  double reward_sum_ = 0.0;
};

std::unique_ptr<Env> make_env(const EnvSpec& spec);

// Recomputes the goal predicate from an encoded state sequence s0..sT alone:
// cartpole counts steps, mountaincar and acrobot inspect the final state,
// maze compares the agent and goal channels.
bool goal_reached(const EnvSpec& spec, std::span<const std::vector<double>> states);

}  // namespace ifolab::envs
