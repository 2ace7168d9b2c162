#include <gtest/gtest.h>

#include <random>

#include "mil/gridworld.hpp"
#include "mil/harness.hpp"
#include "mil/induction.hpp"
#include "mil/metarule.hpp"
#include "mil/registry.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mil;
using namespace mil::testing_support;

namespace {

struct Fixture {
  GridMap map = generate_lava_map(10, 10);
  BackgroundKB kb = make_grid_kb(map.grid);
  Hypothesis truth = ground_truth(kb);

  std::string truth_key(Provenance p, const char* head_pred) const {
    for (const auto& [k, r] : truth.rules(p))
      if (r.clause.head.pred == Symbol(head_pred)) return r.unfolded_key;
    throw std::logic_error("no rule");
  }
};

std::set<std::string> unfolded_keys(const InductionResult& r, const Atom& goal) {
  std::set<std::string> out;
  for (const Derivation& d : r.derivations) out.insert(goal.pred.str() + "|" + d.unfolded_key);
  return out;
}

}  // namespace

TEST(Metarules, DefaultsParseAndValidate) {
  auto ms = default_metarules();
  EXPECT_EQ(ms.size(), 9u);
  for (const Metarule& m : ms) EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(parse_metarules(read_file(data_path("default.metarules"))).size(), ms.size());
}

TEST(Metarules, RejectMalformedTemplates) {
  EXPECT_THROW(parse_metarule("P(X,Y) :- Q(X,Y)."), ParseError);
  EXPECT_THROW(parse_metarule("bad: P(X,Y) :- Q(X,Z)."), std::invalid_argument);
  EXPECT_THROW(parse_metarule("bad: P(X,Y) :- Q(X,Z), Q(Z,Y)."), std::invalid_argument);
  EXPECT_THROW(parse_metarule("bad: P(X,Y) :- Q(X,a), R(a,Y)."), ParseError);
  EXPECT_THROW(parse_metarule("long: P(X) :- Q(X), R(X), S(X).", 2), std::invalid_argument);
}

TEST(Induction, MovementExplanationMatchesHandWrittenChain) {
  Fixture f;
  State ctx = typed_state("at(agent, c(2,4)), alive(agent), move(east)", f.kb);
  Atom goal = typed_atom("at(agent, c(3,4))", f.kb);
  auto r = metarule_induction(goal, ctx, f.kb, EngineConfig{});
  ASSERT_FALSE(r.derivations.empty());
  EXPECT_TRUE(unfolded_keys(r, goal).count(f.truth_key(Provenance::dynamics, "at")));
}

TEST(Induction, MovementBodyRegistersOnce) {
  Fixture f;
  PredicateRegistry reg;
  State ctx = typed_state("at(agent, c(2,4)), alive(agent), move(east)", f.kb);
  Atom goal = typed_atom("at(agent, c(3,4))", f.kb);
  auto r = metarule_induction(goal, ctx, f.kb, EngineConfig{});
  for (const Derivation& d : r.derivations) materialize(r, d, reg, 0);
  std::size_t before = reg.size();
  // Inducing the same observation again mints nothing.
  auto again = metarule_induction(goal, ctx, f.kb, EngineConfig{});
  for (const Derivation& d : again.derivations) materialize(again, d, reg, 1);
  EXPECT_EQ(reg.size(), before);
  // Nor does an alpha-variant of a registered movement body.
  for (const auto& [sym, e] : reg.entries()) {
    if (e.definition.body.size() != 2 || e.definition.body[0].pred != Symbol("move")) continue;
    std::vector<Atom> body = {e.definition.body[1], e.definition.body[0]};
    std::map<Symbol, Symbol> rename;
    for (Atom& a : body)
      for (Term& t : a.args) t.name = rename.emplace(t.name, Symbol("Q" + std::to_string(rename.size()))).first->second;
    std::vector<Term> head = e.definition.head.args;
    for (Term& t : head) t.name = rename.at(t.name);
    EXPECT_EQ(reg.reuse_or_register(head, body), sym);
  }
  EXPECT_EQ(reg.size(), before);
}

TEST(Induction, DeathRulesReuseMovementAbstractions) {
  Fixture f;
  Hypothesis h;
  EngineConfig cfg;
  State move_ctx = typed_state("at(agent, c(2,4)), alive(agent), move(east)", f.kb);
  std::vector<Atom> moved = {typed_atom("at(agent, c(3,4))", f.kb)};
  generalize(h, moved, Provenance::dynamics, move_ctx, f.kb, cfg, 0);
  std::set<Symbol> from_movement;
  for (const auto& [sym, e] : h.registry().entries()) from_movement.insert(sym);
  State lava_ctx = typed_state("at(agent, c(4,4)), alive(agent), move(east)", f.kb);
  std::vector<Atom> died = {typed_atom("dead(agent)", f.kb)};
  auto rep = generalize(h, died, Provenance::dynamics, lava_ctx, f.kb, cfg, 1);
  ASSERT_GT(rep.rules_added, 0u);
  std::size_t reusing = 0;
  for (const auto& [key, rule] : h.dyn()) {
    if (rule.clause.head.pred != Symbol("dead")) continue;
    bool uses = false;
    for (const Atom& a : rule.clause.body) uses |= from_movement.count(a.pred) > 0;
    reusing += uses;
  }
  EXPECT_GT(reusing, 0u);
}

TEST(Induction, DepthZeroCannotExplainMovement) {
  Fixture f;
  EngineConfig cfg;
  cfg.max_depth = 0;
  State ctx = typed_state("at(agent, c(2,4)), alive(agent), move(east)", f.kb);
  auto r = metarule_induction(typed_atom("at(agent, c(3,4))", f.kb), ctx, f.kb, cfg);
  EXPECT_TRUE(r.derivations.empty());
}

TEST(Induction, NonGroundGoalThrows) {
  Fixture f;
  EXPECT_THROW(metarule_induction(typed_atom("at(agent, X)", f.kb), {}, f.kb, EngineConfig{}), std::invalid_argument);
}

TEST(Induction, MovementNodeCountIndependentOfGridSize) {
  GridMap small = generate_lava_map(10, 10);
  GridMap large = embed_map(small, 100, 100);
  auto count = [](const GridMap& m) {
    BackgroundKB kb = make_grid_kb(m.grid);
    State ctx = typed_state("at(agent, c(2,4)), alive(agent), move(east)", kb);
    return metarule_induction(typed_atom("at(agent, c(3,4))", kb), ctx, kb, EngineConfig{}).nodes_expanded;
  };
  EXPECT_EQ(count(small), count(large));
}

TEST(Induction, CacheIsTransparent) {
  Fixture f;
  State ctx = typed_state("at(agent, c(4,4)), alive(agent), move(east)", f.kb);
  Atom goal = typed_atom("dead(agent)", f.kb);
  EngineConfig cached;
  cached.max_depth = 3;
  EngineConfig uncached = cached;
  uncached.use_cache = false;
  auto a = metarule_induction(goal, ctx, f.kb, cached);
  auto b = metarule_induction(goal, ctx, f.kb, uncached);
  std::vector<std::string> ka, kb;
  for (const auto& d : a.derivations) ka.push_back(d.key);
  for (const auto& d : b.derivations) kb.push_back(d.key);
  EXPECT_EQ(ka, kb);
  EXPECT_GT(a.cache_hits, 0u);
  EXPECT_LE(a.nodes_expanded, b.nodes_expanded);
}

TEST(Induction, EqualsBruteForceTopProgramAtDepthOne) {
  auto d = oracle::micro_domain();
  EngineConfig cfg;
  cfg.max_depth = 1;
  cfg.max_solutions_per_subgoal = 0;
  cfg.max_solutions_per_goal = 0;
  auto r = metarule_induction(d.goal, d.context, d.kb, cfg);
  std::set<std::string> got;
  for (const Derivation& x : r.derivations) got.insert(x.unfolded_key);
  oracle::TopProgramEnumerator brute(d.kb, d.context, default_metarules(), 1);
  EXPECT_EQ(got, brute.solve(d.goal));
  EXPECT_FALSE(got.empty());
}

// ---- registry ----------------------------------------------------------

TEST(Registry, FreshBodyMintsSymbol) {
  Fixture f;
  PredicateRegistry reg;
  std::vector<Term> head = {Term::var("A", "object"), Term::var("B", "cell")};
  auto body = std::vector<Atom>{typed_atom("at(A,B)", f.kb), typed_atom("alive(A)", f.kb)};
  bool created = false;
  Symbol s = reg.reuse_or_register(head, body, 0, &created);
  EXPECT_TRUE(created);
  EXPECT_EQ(reg.size(), 1u);
  EXPECT_EQ(reg.reuse_or_register(head, body, 0, &created), s);
  EXPECT_FALSE(created);
  EXPECT_EQ(reg.size(), 1u);
}

TEST(RegistryProperty, AlphaVariantsNeverGrowTheRegistry) {
  Fixture f;
  PredicateRegistry reg;
  std::vector<std::pair<std::vector<Term>, std::vector<Atom>>> bodies;
  auto sorted = [&](const char* head, const char* body) {
    Clause c = parse_clause(std::string("h(") + head + ") :- " + body + ".");
    std::map<Symbol, Symbol> sorts;
    for (Atom& a : c.body) {
      assign_sorts(a, f.kb.sort_lookup());
      for (const Term& t : a.args) sorts[t.name] = t.sort;
    }
    for (Term& t : c.head.args) t.sort = sorts.at(t.name);
    bodies.push_back({c.head.args, c.body});
  };
  sorted("A,B", "at(A,B), alive(A)");
  sorted("A", "at(A,B), is_lava(B)");
  sorted("A,B", "adjacent(A,C,B), move(C)");
  sorted("B", "adjacent(A,C,B), not_wall(A), wall(B)");
  for (auto& [h, b] : bodies) reg.reuse_or_register(h, b);
  std::size_t n = reg.size();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    auto [head, body] = bodies[i % bodies.size()];
    std::map<Symbol, Symbol> rename;
    auto fresh = [&](Symbol s) {
      auto [it, ins] = rename.emplace(s, Symbol());
      if (ins) it->second = Symbol("R" + std::to_string(rng() % 100000) + "_" + std::to_string(rename.size()));
      return it->second;
    };
    for (Term& t : head) t.name = fresh(t.name);
    for (Atom& a : body)
      for (Term& t : a.args)
        if (t.is_var()) t.name = fresh(t.name);
    std::shuffle(body.begin(), body.end(), rng);
    reg.reuse_or_register(head, body);
    ASSERT_EQ(reg.size(), n);
  }
}

TEST(RegistryProperty, InductionKeepsAbstractionGraphAcyclicAndUnique) {
  Fixture f;
  Hypothesis h;
  EngineConfig cfg;
  const char* goals[][2] = {
      {"at(agent, c(3,4))", "at(agent, c(2,4)), alive(agent), move(east)"},
      {"dead(agent)", "at(agent, c(4,4)), alive(agent), move(east)"},
      {"at(agent, c(2,3))", "at(agent, c(2,4)), alive(agent), move(north)"},
  };
  for (auto& g : goals) {
    State ctx = typed_state(g[1], f.kb);
    Atom goal = typed_atom(g[0], f.kb);
    std::vector<Atom> fn = {goal};
    generalize(h, fn, Provenance::dynamics, ctx, f.kb, cfg, 0);
  }
  EXPECT_NO_THROW(h.check_integrity(f.kb));
  std::set<std::string> keys;
  for (const auto& [sym, e] : h.registry().entries()) EXPECT_TRUE(keys.insert(e.key).second) << e.key;
}

TEST(Induction, RepeatedInventedLiteralCountsOnce) {
  // Precondition with Q = R reduces to one literal, matching the oracle.
  auto d = oracle::micro_domain();
  EngineConfig cfg;
  cfg.max_depth = 2;
  cfg.max_solutions_per_subgoal = 0;
  cfg.max_solutions_per_goal = 0;
  Atom goal("alive", {Term::constant("agent", "object")});
  auto r = metarule_induction(goal, d.context, d.kb, cfg);
  std::set<std::string> got;
  for (const Derivation& x : r.derivations) got.insert(x.unfolded_key);
  for (const DraftDefinition& def : r.drafts)
    for (std::size_t i = 0; i < def.clause.body.size(); ++i)
      for (std::size_t k = i + 1; k < def.clause.body.size(); ++k) EXPECT_NE(def.clause.body[i], def.clause.body[k]);
  oracle::TopProgramEnumerator brute(d.kb, d.context, default_metarules(), 2);
  EXPECT_EQ(got, brute.solve(goal));
}
