#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifolab/common/rng.hpp"
#include "ifolab/envs/env.hpp"

namespace ifolab::envs {

// Grid directions; the order doubles as the maze action order.
enum Direction : int { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3 };
inline constexpr int kRowDelta[4] = {-1, 1, 0, 0};
inline constexpr int kColDelta[4] = {0, 0, 1, -1};
inline constexpr int kOpposite[4] = {kSouth, kNorth, kWest, kEast};

// An N x N grid where walls[r*N + c] holds one bit per direction
// (bit d set = wall on side d of that cell).
struct MazeLayout {
  int size = 0;
  std::vector<std::uint8_t> walls;
  int start_row = 0, start_col = 0;
  int goal_row = 0, goal_col = 0;

  bool wall(int r, int c, int dir) const {
    return (walls[r * size + c] >> dir) & 1;
  }
};

// Perfect maze by randomized depth-first carving; start at (0,0), goal at
// (N-1,N-1). Deterministic per (n, seed).
MazeLayout maze_generate(int n, std::uint64_t seed);

// Checks wall symmetry across shared edges, closed borders, and that every
// cell is reachable from the start. Throws DataError on violation.
void validate_layout(const MazeLayout& layout);

// BFS step counts from (row, col) to every cell; unreachable cells get -1.
std::vector<int> maze_distances(const MazeLayout& layout, int row, int col);

// Plain-text layout file: line `N`, N rows of per-cell wall nibbles in hex,
// then `start r c` and `goal r c`.
void save_layout(const MazeLayout& layout, const std::string& path);
MazeLayout load_layout(const std::string& path);

// Maze episode: 4 move actions, blocked moves keep position, reward
// -0.1/N^2 per step plus +1 on reaching the goal, cap 10*N^2 steps.
// Each reset seed generates its own layout, so distinct seeds exercise
// distinct mazes.
class MazeEnv final : public Env {
 public:
  explicit MazeEnv(EnvSpec spec) : Env(std::move(spec)) {}

  void reset(std::uint64_t seed) override;
  bool goal() const override {
    return agent_row_ == layout_.goal_row && agent_col_ == layout_.goal_col;
  }

  const MazeLayout& layout() const { return layout_; }
  int agent_row() const { return agent_row_; }
  int agent_col() const { return agent_col_; }

 protected:
  StepResult advance(int action) override;

 private:
  void encode();
  MazeLayout layout_;
  int agent_row_ = 0, agent_col_ = 0;
};

}  // namespace ifolab::envs
