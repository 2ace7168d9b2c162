#include "mil/planner.hpp"

#include <algorithm>

#include "mil/world_model.hpp"

namespace mil {

namespace {

const Atom& dead_agent() {
  static const Atom a(Symbol("dead"), {Term::constant(vocab::agent(), vocab::object())});
  return a;
}

}  // namespace

std::optional<Plan> plan(const Hypothesis& h, const State& s0, const GoalTest& goal_test, const BackgroundKB& kb,
                         std::size_t budget, std::uint64_t* expanded) {
  struct Node {
    State state;
    std::size_t parent;
    Direction action;
  };
  std::vector<Node> nodes{{s0, 0, Direction::east}};
  std::map<State, std::size_t> seen{{s0, 0}};
  auto finish = [&](std::size_t i) {
    Plan p;
    for (; i != 0; i = nodes[i].parent) {
      p.actions.push_back(nodes[i].action);
      p.predicted_states.push_back(nodes[i].state);
    }
    p.predicted_states.push_back(s0);
    std::reverse(p.actions.begin(), p.actions.end());
    std::reverse(p.predicted_states.begin(), p.predicted_states.end());
    return p;
  };
  if (expanded) *expanded = 0;
  if (goal_test(s0)) return finish(0);
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (head >= budget) return std::nullopt;
    if (expanded) ++*expanded;
    for (Direction d : kDirections) {
      State next = step_model(nodes[head].state, predict(h, nodes[head].state, move_atom(d), kb));
      if (next.count(dead_agent())) continue;
      if (!seen.emplace(next, nodes.size()).second) continue;
      nodes.push_back({std::move(next), head, d});
      if (goal_test(nodes.back().state)) return finish(nodes.size() - 1);
    }
  }
  return std::nullopt;
}

GoalTest agent_on_goal(const BackgroundKB& kb) {
  return [&kb](const State& s) {
    for (const Atom& a : s) {
      if (a.pred.str() != "at" || a.args.size() != 2 || a.args[0].name != vocab::agent()) continue;
      bool goal = false;
      std::vector<Slot> slots{a.args[1]};
      kb.query(Symbol("is_goal"), slots, s, [&](std::span<const Term>) { goal = true; });
      if (goal) return true;
    }
    return false;
  };
}

Direction explore(const Hypothesis& h, const State& s, const BackgroundKB& kb, const ExplorationMemory& memory,
                  std::mt19937_64& rng) {
  // Lower rank is preferred.
  std::vector<std::pair<int, Direction>> ranked;
  for (Direction d : kDirections) {
    Prediction p = predict(h, s, move_atom(d), kb);
    bool tried = memory.tried.count({s, d}) > 0;
    State next = step_model(s, p);
    int rank;
    if (next == s && tried) {
      rank = 1 << 30;
    } else if (p.adds.empty() && p.dels.empty()) {
      rank = 0;
    } else if (next.count(dead_agent())) {
      rank = 1 << 29;
    } else {
      auto seen = memory.visits.find(next);
      rank = seen == memory.visits.end() ? 1 : 2 + seen->second;
    }
    ranked.emplace_back(rank, d);
  }
  int best = std::min_element(ranked.begin(), ranked.end())->first;
  std::vector<Direction> ties;
  for (const auto& [r, d] : ranked) {
    if (r == best) ties.push_back(d);
  }
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

}  // namespace mil
