#pragma once

// Metarule-guided abduction with recursive predicate invention.
//
// A goal atom is explained by instantiating a metarule whose head matches
// it. Each body literal is either resolved against the context and the
// background knowledge through a primitive predicate, or abduced as an
// invented predicate one level deeper. Every derivation within the depth
// budget is returned (Top Program semantics). Explanations of a sub-goal
// that inline to the same clause are merged, keeping the smallest. Sub-goals
// are memoised per (goal pattern, depth) for the duration of one call.

#include <cstdint>
#include <string>
#include <vector>

#include "mil/background.hpp"
#include "mil/logic.hpp"
#include "mil/metarule.hpp"
#include "mil/registry.hpp"

namespace mil {

struct EngineConfig {
  int max_depth = 4;
  std::vector<Metarule> metarules = default_metarules();
  // Derivations merged per unexplained atom; 0 means uncapped.
  std::size_t max_solutions_per_goal = 64;
  // Allow single-literal metarules (identity) below the top level. Such
  // abstractions only rename another predicate.
  bool unit_abstractions = false;
  // Alternative explanations kept per invented sub-goal, smallest first;
  // 0 means uncapped.
  std::size_t max_solutions_per_subgoal = 8;
  bool use_cache = true;
};

// An abstraction found during one induction call, not yet registered.
// Invented literals in its body use placeholder predicates `$<index>`
// referring to other drafts of the same result.
struct DraftDefinition {
  Clause clause;
  std::string key;
  std::string unfolded_key;  // canonical form after inlining every invented literal
  std::vector<std::size_t> children;
  std::size_t size = 1;  // number of distinct drafts in the tree rooted here
};

struct Derivation {
  Clause top;                     // lifted clause headed by the goal predicate
  std::vector<std::size_t> defs;  // drafts used, dependencies first
  std::string key;                // canonical form of top with drafts rendered structurally
  std::string unfolded_key;       // canonical form of the fully inlined clause
  std::size_t size() const { return 1 + defs.size(); }
};

struct InductionResult {
  std::vector<DraftDefinition> drafts;
  std::vector<Derivation> derivations;  // ordered by (size, key)
  std::uint64_t nodes_expanded = 0;
  std::uint64_t cache_hits = 0;
};

// Every derivation of `goal` (ground) from `context` and `kb` within
// cfg.max_depth levels of invention. An empty result means the atom is not
// expressible under the configured metarules.
InductionResult metarule_induction(const Atom& goal, const State& context, const BackgroundKB& kb,
                                   const EngineConfig& cfg);

// Placeholder rendering used for draft keys.
bool is_placeholder(Symbol pred);
std::string draft_render(const InductionResult& r, Symbol pred);

// Registers the abstractions of a derivation bottom-up (reusing equivalent
// registered predicates) and returns the top clause with real predicate
// names. Newly minted predicates are appended to `minted`.
Clause materialize(const InductionResult& r, const Derivation& d, PredicateRegistry& registry, int step,
                   std::vector<Symbol>* minted = nullptr);

// Renames variables to A, B, C, ... in order of first occurrence, head first.
Clause normalize_variables(const Clause& c);

}  // namespace mil
