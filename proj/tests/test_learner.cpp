#include <gtest/gtest.h>

#include <random>

#include "mil/gridworld.hpp"
#include "mil/learner.hpp"
#include "support.hpp"

using namespace mil;
using namespace mil::testing_support;

namespace {

struct Lava {
  GridMap map = generate_lava_map(10, 10);
  BackgroundKB kb = make_grid_kb(map.grid);
};

bool has_rule(const Hypothesis& h, const Rule& r, Provenance p) {
  for (const auto& [k, other] : h.rules(p))
    if (other.unfolded_key == r.unfolded_key) return true;
  return false;
}

}  // namespace

TEST(Learner, NoChangeOnEmptyModelReportsNothing) {
  Lava l;
  OnlineLearner learner(l.kb);
  State s = state_atoms(env_reset(l.map));
  StepReport r = learner.observe_transition(s, move_atom(Direction::west), s);
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(r.added.total(), 0u);
  EXPECT_EQ(r.pruned.total(), 0u);
  EXPECT_EQ(r.model_size.total(), 0u);
  EXPECT_EQ(r.induction_nodes, 0u);
  EXPECT_EQ(r.t, 0);
  EXPECT_EQ(learner.steps(), 1);
}

TEST(Learner, FirstMovementSpikesThenContradictionPrunes) {
  Lava l;
  OnlineLearner learner(l.kb);
  EnvState e = env_reset(l.map);
  StepOutcome o = env_step(e, l.map, Direction::east);
  StepReport first = learner.observe_transition(state_atoms(e), move_atom(Direction::east), state_atoms(o.state));
  EXPECT_GE(first.added.dyn, 10u);
  EXPECT_GT(first.added.abs, 0u);
  EXPECT_EQ(first.errors.fn_add.size(), 1u);
  EXPECT_EQ(first.errors.fn_rem.size(), 1u);
  // Walking back verifies the most general rule, which then absorbs the
  // rest of the family.
  StepOutcome back = env_step(o.state, l.map, Direction::west);
  StepReport second = learner.observe_transition(state_atoms(o.state), move_atom(Direction::west), state_atoms(back.state));
  EXPECT_GE(second.pruned.total(), 5u);
  EXPECT_TRUE(second.errors.empty());
  EXPECT_LT(second.model_size.dyn, first.model_size.dyn);
  // That rule ignores walls, so bumping into the west wall falsifies it.
  StepOutcome bump = env_step(back.state, l.map, Direction::west);
  StepReport third = learner.observe_transition(state_atoms(back.state), move_atom(Direction::west), state_atoms(bump.state));
  EXPECT_FALSE(third.errors.fp_add.empty());
  EXPECT_FALSE(third.falsified_keys.empty());
}

TEST(LearnerProperty, OneShotRepairOnRandomWalk) {
  Lava l;
  OnlineLearner learner(l.kb);
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> pick(0, 3);
  int steps = 0;
  for (int episode = 0; episode < 6 && steps < 120; ++episode) {
    EnvState e = env_reset(l.map);
    while (!e.done && steps < 120) {
      Direction d = kDirections[pick(rng)];
      StepOutcome o = env_step(e, l.map, d);
      State prev = state_atoms(e), next = state_atoms(o.state);
      StepReport r = learner.observe_transition(prev, move_atom(d), next);
      ErrorSignals after = error_signals(learner.predict(prev, move_atom(d)), prev, next);
      std::set<Atom> inexpressible(r.inexpressible.begin(), r.inexpressible.end());
      for (const Atom& a : after.fn_add) EXPECT_TRUE(inexpressible.count(a)) << to_string(a);
      for (const Atom& a : after.fn_rem) EXPECT_TRUE(inexpressible.count(a)) << to_string(a);
      EXPECT_NO_THROW(learner.hypothesis().check_integrity(l.kb));
      e = o.state;
      ++steps;
    }
  }
}

TEST(LearnerProperty, SeededGroundTruthIsNeverPruned) {
  Lava l;
  OnlineLearner learner(l.kb);
  Hypothesis truth = ground_truth(l.kb);
  learner.set_hypothesis(truth);
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int episode = 0; episode < 10; ++episode) {
    EnvState e = env_reset(l.map);
    while (!e.done) {
      Direction d = kDirections[pick(rng)];
      StepOutcome o = env_step(e, l.map, d);
      StepReport r = learner.observe_transition(state_atoms(e), move_atom(d), state_atoms(o.state));
      EXPECT_TRUE(r.errors.empty());
      EXPECT_EQ(r.added.total(), 0u);
      e = o.state;
    }
  }
  for (Provenance p : {Provenance::dynamics, Provenance::constraint})
    for (const auto& [k, rule] : truth.rules(p)) EXPECT_TRUE(has_rule(learner.hypothesis(), rule, p)) << k;
}

TEST(Learner, CountersTrackFiringAndVerification) {
  Lava l;
  OnlineLearner learner(l.kb);
  learner.set_hypothesis(ground_truth(l.kb));
  EnvState e = env_reset(l.map);
  StepOutcome o = env_step(e, l.map, Direction::east);
  learner.observe_transition(state_atoms(e), move_atom(Direction::east), state_atoms(o.state));
  // Rules are verified from the step after the one they were added in.
  for (const auto& [k, r] : learner.hypothesis().dyn()) EXPECT_EQ(r.stats.times_verified, 0u);
  StepOutcome o2 = env_step(o.state, l.map, Direction::south);
  learner.observe_transition(state_atoms(o.state), move_atom(Direction::south), state_atoms(o2.state));
  std::uint64_t fired = 0, verified = 0;
  for (const auto& [k, r] : learner.hypothesis().dyn()) {
    fired += r.stats.times_fired;
    verified += r.stats.times_verified;
  }
  EXPECT_EQ(fired, 2u);
  EXPECT_EQ(verified, 2u);
}
