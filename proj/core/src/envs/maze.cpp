#include "ifolab/envs/maze.hpp"

#include <deque>
#include <sstream>

#include "ifolab/common/errors.hpp"
#include "ifolab/common/text_io.hpp"

namespace ifolab::envs {

MazeLayout maze_generate(int n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("maze size must be at least 2");
  MazeLayout layout;
  layout.size = n;
  layout.walls.assign(static_cast<std::size_t>(n) * n, 0x0F);
  layout.goal_row = layout.goal_col = n - 1;

  Rng rng = make_rng(seed);
  std::vector<bool> visited(static_cast<std::size_t>(n) * n, false);
  std::vector<int> stack;
  stack.push_back(0);
  visited[0] = true;
  int dirs[4];
  while (!stack.empty()) {
    const int cell = stack.back();
    const int r = cell / n, c = cell % n;
    dirs[0] = 0; dirs[1] = 1; dirs[2] = 2; dirs[3] = 3;
    for (int i = 3; i > 0; --i) std::swap(dirs[i], dirs[uniform_below(rng, i + 1)]);
    bool moved = false;
    for (int d : dirs) {
      const int nr = r + kRowDelta[d], nc = c + kColDelta[d];
      if (nr < 0 || nr >= n || nc < 0 || nc >= n) continue;
      const int next = nr * n + nc;
      if (visited[next]) continue;
      layout.walls[cell] &= static_cast<std::uint8_t>(~(1 << d));
      layout.walls[next] &= static_cast<std::uint8_t>(~(1 << kOpposite[d]));
      visited[next] = true;
      stack.push_back(next);
      moved = true;
      break;
    }
    if (!moved) stack.pop_back();
  }
  return layout;
}

void validate_layout(const MazeLayout& layout) {
  const int n = layout.size;
  if (n < 2 || static_cast<int>(layout.walls.size()) != n * n)
    throw DataError("maze layout has inconsistent size");
  auto in_range = [n](int r, int c) { return r >= 0 && r < n && c >= 0 && c < n; };
  if (!in_range(layout.start_row, layout.start_col) ||
      !in_range(layout.goal_row, layout.goal_col))
    throw DataError("maze start or goal outside the grid");

  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      for (int d = 0; d < 4; ++d) {
        const int nr = r + kRowDelta[d], nc = c + kColDelta[d];
        if (!in_range(nr, nc)) {
          if (!layout.wall(r, c, d))
            throw DataError("maze border open at cell (" + std::to_string(r) + "," +
                            std::to_string(c) + ")");
        } else if (layout.wall(r, c, d) != layout.wall(nr, nc, kOpposite[d])) {
          throw DataError("maze walls asymmetric between (" + std::to_string(r) + "," +
                          std::to_string(c) + ") and (" + std::to_string(nr) + "," +
                          std::to_string(nc) + ")");
        }
      }
    }
  }

  const std::vector<int> dist = maze_distances(layout, layout.start_row, layout.start_col);
  for (int i = 0; i < n * n; ++i)
    if (dist[i] < 0)
      throw DataError("maze cell (" + std::to_string(i / n) + "," +
                      std::to_string(i % n) + ") unreachable from start");
}

std::vector<int> maze_distances(const MazeLayout& layout, int row, int col) {
  const int n = layout.size;
  std::vector<int> dist(static_cast<std::size_t>(n) * n, -1);
  std::deque<int> queue;
  dist[row * n + col] = 0;
  queue.push_back(row * n + col);
  while (!queue.empty()) {
    const int cell = queue.front();
    queue.pop_front();
    const int r = cell / n, c = cell % n;
    for (int d = 0; d < 4; ++d) {
      if (layout.wall(r, c, d)) continue;
      const int nr = r + kRowDelta[d], nc = c + kColDelta[d];
      if (nr < 0 || nr >= n || nc < 0 || nc >= n) continue;
      if (dist[nr * n + nc] >= 0) continue;
      dist[nr * n + nc] = dist[cell] + 1;
      queue.push_back(nr * n + nc);
    }
  }
  return dist;
}

void save_layout(const MazeLayout& layout, const std::string& path) {
  std::ostringstream out;
  out << layout.size << '\n';
  out << std::hex;
  for (int r = 0; r < layout.size; ++r) {
    for (int c = 0; c < layout.size; ++c)
      out << static_cast<int>(layout.walls[r * layout.size + c]);
    out << '\n';
  }
  out << std::dec;
  out << "start " << layout.start_row << ' ' << layout.start_col << '\n';
  out << "goal " << layout.goal_row << ' ' << layout.goal_col << '\n';
  atomic_write_file(path, out.str());
}

MazeLayout load_layout(const std::string& path) {
  std::istringstream in(read_file(path));
  auto fail = [&path](int line, const std::string& msg) -> void {
    throw DataError(path + ":" + std::to_string(line) + ": " + msg);
  };

  MazeLayout layout;
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line)) fail(lineno, "missing size line");
  try {
    layout.size = std::stoi(line);
  } catch (const std::exception&) {
    fail(lineno, "bad size '" + line + "'");
  }
  if (layout.size < 2) fail(lineno, "size must be at least 2");
  layout.walls.assign(static_cast<std::size_t>(layout.size) * layout.size, 0);

  for (int r = 0; r < layout.size; ++r) {
    ++lineno;
    if (!std::getline(in, line)) fail(lineno, "missing wall row");
    if (static_cast<int>(line.size()) != layout.size)
      fail(lineno, "expected " + std::to_string(layout.size) + " wall nibbles");
    for (int c = 0; c < layout.size; ++c) {
      const char ch = line[c];
      int v;
      if (ch >= '0' && ch <= '9') v = ch - '0';
      else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
      else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
      else { fail(lineno, std::string("bad hex nibble '") + ch + "'"); return {}; }
      layout.walls[r * layout.size + c] = static_cast<std::uint8_t>(v);
    }
  }

  auto read_cell = [&](const char* tag, int& row, int& col) {
    ++lineno;
    if (!std::getline(in, line)) fail(lineno, std::string("missing ") + tag + " line");
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word >> row >> col) || word != tag)
      fail(lineno, std::string("expected '") + tag + " r c'");
  };
  read_cell("start", layout.start_row, layout.start_col);
  read_cell("goal", layout.goal_row, layout.goal_col);
  validate_layout(layout);
  return layout;
}

void MazeEnv::reset(std::uint64_t seed) {
  layout_ = maze_generate(spec_.maze_size, seed);
  agent_row_ = layout_.start_row;
  agent_col_ = layout_.start_col;
  begin_episode();
  encode();
}

StepResult MazeEnv::advance(int action) {
  const int n = layout_.size;
  if (!layout_.wall(agent_row_, agent_col_, action)) {
    const int nr = agent_row_ + kRowDelta[action];
    const int nc = agent_col_ + kColDelta[action];
    if (nr >= 0 && nr < n && nc >= 0 && nc < n) {
      agent_row_ = nr;
      agent_col_ = nc;
    }
  }
  encode();
  double reward = -0.1 / (n * n);
  const bool at_goal = goal();
  if (at_goal) reward += 1.0;
  return {reward, at_goal};
}

// Channels: 0 walls (per-cell wall nibble scaled to [0,1]), 1 agent one-hot,
// 2 goal one-hot. The wall channel keeps the full configuration, not just a
// count: distinct layouts must stay distinguishable or a policy provably
// caps out well below reliable solving (aliased cells demand different
// moves in different mazes).
void MazeEnv::encode() {
  const int n = layout_.size;
  const int cells = n * n;
  state_.assign(3 * static_cast<std::size_t>(cells), 0.0);
  for (int i = 0; i < cells; ++i) state_[i] = layout_.walls[i] / 15.0;
  state_[cells + agent_row_ * n + agent_col_] = 1.0;
  state_[2 * cells + layout_.goal_row * n + layout_.goal_col] = 1.0;
}

}  // namespace ifolab::envs
