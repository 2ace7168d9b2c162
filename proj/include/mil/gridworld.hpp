#pragma once

// Deterministic Lava-Crossing style grid: walls block, lava kills, the goal
// ends the episode with a reward.

#include <stdexcept>
#include <string>
#include <string_view>

#include "mil/background.hpp"

namespace mil {

struct GridMap {
  TerrainGrid grid;
  Coord start;
  Coord goal;

  int width() const { return grid.width; }
  int height() const { return grid.height; }
  Terrain at(Coord c) const { return grid.at(c); }
};

class MapError : public std::runtime_error {
 public:
  MapError(const std::string& what, int line, int column)
      : std::runtime_error("map line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Characters: '#' wall, '.' floor, 'L' lava, 'G' goal, '@' start (floor).
// Lines and columns in errors are 1-based.
GridMap parse_map(std::string_view text);
std::string render_map(const GridMap& map);

// Vertical lava river in column width/2 covering rows 1..height-3, crossable
// only through row height-2; start and goal on row height/2-1 at opposite
// sides. generate_lava_map(10, 10) is the canonical map.
GridMap generate_lava_map(int width, int height);
std::string canonical_map_text();

struct EnvConfig {
  double step_penalty = 0.01;
  int step_cap = 200;
};

struct EnvState {
  Coord pos;
  bool alive = true;
  bool done = false;
  int steps = 0;
  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepOutcome {
  EnvState state;
  double reward = 0.0;
  bool done = false;
  bool reached_goal = false;
};

EnvState env_reset(const GridMap& map);
// Throws std::logic_error when env is already done.
StepOutcome env_step(const EnvState& env, const GridMap& map, Direction action, const EnvConfig& cfg = {});

// {at(agent, c(x,y)), alive(agent) | dead(agent)}.
State state_atoms(const EnvState& env);
Atom move_atom(Direction d);

}  // namespace mil
