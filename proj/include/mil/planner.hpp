#pragma once

// Breadth-first search over states predicted by a learned program.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mil/background.hpp"
#include "mil/gridworld.hpp"
#include "mil/hypothesis.hpp"

namespace mil {

struct Plan {
  std::vector<Direction> actions;
  std::vector<State> predicted_states;  // actions.size() + 1 states, the first is the start
  std::size_t cost() const { return actions.size(); }
};

using GoalTest = std::function<bool(const State&)>;

// Shortest action sequence whose predicted states never contain
// dead(agent) and whose last state passes goal_test. nullopt when the goal
// is unreachable under h or more than `budget` states would be expanded.
std::optional<Plan> plan(const Hypothesis& h, const State& s0, const GoalTest& goal_test, const BackgroundKB& kb,
                         std::size_t budget = 200000, std::uint64_t* expanded = nullptr);

// True when the agent stands on a goal cell according to kb.
GoalTest agent_on_goal(const BackgroundKB& kb);

struct ExplorationMemory {
  std::map<State, int> visits;
  std::set<std::pair<State, Direction>> tried;
};

// Chooses an exploratory action: untried actions with an unknown (empty)
// predicted effect first, then actions leading to predicted states not
// visited yet, then the least visited, then actions predicted to kill the
// agent, and last actions already seen to change nothing. Ties are broken by
// rng.
Direction explore(const Hypothesis& h, const State& s, const BackgroundKB& kb, const ExplorationMemory& memory,
                  std::mt19937_64& rng);

}  // namespace mil
