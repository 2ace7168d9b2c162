#include "mil/gridworld.hpp"

#include <sstream>
#include <vector>

namespace mil {

GridMap parse_map(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw MapError("empty map", 1, 1);
  GridMap map;
  map.grid.width = static_cast<int>(rows[0].size());
  map.grid.height = static_cast<int>(rows.size());
  map.grid.cells.assign(static_cast<std::size_t>(map.grid.width) * map.grid.height, Terrain::floor);
  int starts = 0;
  int goals = 0;
  for (int y = 0; y < map.grid.height; ++y) {
    if (static_cast<int>(rows[y].size()) != map.grid.width) {
      throw MapError("row has " + std::to_string(rows[y].size()) + " cells, expected " + std::to_string(map.grid.width),
                     y + 1, static_cast<int>(std::min(rows[y].size(), rows[0].size())) + 1);
    }
    for (int x = 0; x < map.grid.width; ++x) {
      Terrain t = Terrain::floor;
      switch (rows[y][x]) {
        case '#': t = Terrain::wall; break;
        case '.': break;
        case 'L': t = Terrain::lava; break;
        case 'G':
          t = Terrain::goal;
          map.goal = {x, y};
          if (++goals > 1) throw MapError("second goal", y + 1, x + 1);
          break;
        case '@':
          map.start = {x, y};
          if (++starts > 1) throw MapError("second start", y + 1, x + 1);
          break;
        default:
          throw MapError(std::string("unknown cell character '") + rows[y][x] + "'", y + 1, x + 1);
      }
      bool boundary = x == 0 || y == 0 || x == map.grid.width - 1 || y == map.grid.height - 1;
      if (boundary && t != Terrain::wall) throw MapError("boundary cell is not a wall", y + 1, x + 1);
      map.grid.cells[static_cast<std::size_t>(y) * map.grid.width + x] = t;
    }
  }
  if (goals == 0) throw MapError("map has no goal", map.grid.height, map.grid.width);
  if (starts == 0) throw MapError("map has no start", map.grid.height, map.grid.width);
  return map;
}

std::string render_map(const GridMap& map) {
  std::string out;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      Coord c{x, y};
      char ch = '.';
      switch (map.at(c)) {
        case Terrain::wall: ch = '#'; break;
        case Terrain::lava: ch = 'L'; break;
        case Terrain::goal: ch = 'G'; break;
        case Terrain::floor: ch = c == map.start ? '@' : '.'; break;
      }
      out += ch;
    }
    out += '\n';
  }
  return out;
}

GridMap generate_lava_map(int width, int height) {
  if (width < 6 || height < 5) throw std::invalid_argument("lava map needs at least 6x5 cells");
  GridMap map;
  map.grid.width = width;
  map.grid.height = height;
  map.grid.cells.assign(static_cast<std::size_t>(width) * height, Terrain::floor);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Terrain& t = map.grid.cells[static_cast<std::size_t>(y) * width + x];
      if (x == 0 || y == 0 || x == width - 1 || y == height - 1) t = Terrain::wall;
      else if (x == width / 2 && y <= height - 3) t = Terrain::lava;
    }
  }
  int row = height / 2 - 1;
  map.start = {1, row};
  map.goal = {width - 2, row};
  map.grid.cells[static_cast<std::size_t>(row) * width + width - 2] = Terrain::goal;
  return map;
}

std::string canonical_map_text() { return render_map(generate_lava_map(10, 10)); }

EnvState env_reset(const GridMap& map) { return EnvState{map.start, true, false, 0}; }

StepOutcome env_step(const EnvState& env, const GridMap& map, Direction action, const EnvConfig& cfg) {
  if (env.done) throw std::logic_error("step on a finished episode");
  StepOutcome out;
  out.state = env;
  out.state.steps += 1;
  Coord next = step(env.pos, action);
  Terrain t = map.grid.contains(next) ? map.at(next) : Terrain::wall;
  if (t != Terrain::wall) out.state.pos = next;
  if (t == Terrain::lava) {
    out.state.alive = false;
    out.state.done = true;
  } else if (t == Terrain::goal) {
    out.state.done = true;
    out.reached_goal = true;
    out.reward = 1.0 - cfg.step_penalty * out.state.steps;
  }
  if (out.state.steps >= cfg.step_cap) out.state.done = true;
  out.done = out.state.done;
  return out;
}

State state_atoms(const EnvState& env) {
  Term agent = Term::constant(vocab::agent(), vocab::object());
  State s;
  s.insert(Atom(Symbol("at"), {agent, cell_term(env.pos)}));
  s.insert(Atom(Symbol(env.alive ? "alive" : "dead"), {agent}));
  return s;
}

Atom move_atom(Direction d) { return Atom(Symbol("move"), {direction_term(d)}); }

}  // namespace mil
