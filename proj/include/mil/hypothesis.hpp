#pragma once

// The learned program H = <Abs, Dyn, Con>. Abstractions live in the
// predicate registry (one defining clause per invented predicate); dynamics
// are add-rules and constraints are del-rules, both headed by an observable
// state predicate.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mil/background.hpp"
#include "mil/induction.hpp"
#include "mil/logic.hpp"
#include "mil/registry.hpp"

namespace mil {

struct ClauseStats {
  std::uint64_t times_fired = 0;
  std::uint64_t times_contradicted = 0;
  // Steps the clause took part in a prediction without being contradicted.
  std::uint64_t times_verified = 0;
};

struct Rule {
  Clause clause;
  std::string key;           // canonical form, invented predicates rendered structurally
  std::string unfolded_key;  // canonical form after inlining abstractions
  std::size_t size = 1;      // clauses in the rule's derivation tree
  ClauseStats stats;
};

// Rules keyed by canonical form.
using RuleSet = std::map<std::string, Rule>;

// A rule dropped by compression, with the abstractions it relies on
// (dependencies first) so it can be reinstated.
struct ParkedRule {
  Rule rule;
  std::vector<Clause> definitions;
};

class Hypothesis {
 public:
  PredicateRegistry& registry() { return registry_; }
  const PredicateRegistry& registry() const { return registry_; }

  const RuleSet& dyn() const { return dyn_; }
  const RuleSet& con() const { return con_; }
  RuleSet& rules(Provenance p);
  const RuleSet& rules(Provenance p) const;

  std::size_t abs_size() const { return registry_.size(); }
  std::size_t dyn_size() const { return dyn_.size(); }
  std::size_t con_size() const { return con_.size(); }
  std::size_t size() const { return abs_size() + dyn_size() + con_size(); }

  // Canonical keys of a top-level clause under the current registry.
  std::string rule_key(const Clause& c) const;
  Clause unfold_rule(const Clause& c) const;

  // Adds a dynamics or constraint clause whose invented predicates are
  // registered. Returns false when an equivalent rule (same canonical form
  // or same unfolding) is already present.
  bool add_rule(Clause c);
  bool remove_rule(Provenance p, const std::string& key);
  const Rule* find_rule(Provenance p, const std::string& key) const;

  // Removes a rule absorbed by the rule `absorber`, keeping it (and the
  // rules it had absorbed) aside until the absorber is falsified.
  void park(Provenance p, const std::string& key, const std::string& absorber);
  // Reinstates the rules parked under `absorber` that have not been pruned
  // since, re-registering their abstractions. Returns their keys.
  std::vector<std::string> unpark(Provenance p, const std::string& absorber);
  const std::map<std::pair<Provenance, std::string>, std::vector<ParkedRule>>& parked() const { return parked_; }

  // How often a rule with this key has been pruned.
  const std::map<std::string, std::uint64_t>& tombstones() const { return tombstones_; }
  void add_tombstone(const std::string& key) { ++tombstones_[key]; }

  // Throws std::logic_error when a body predicate is neither declared in kb
  // nor defined in the registry, or when the abstraction graph has a cycle.
  void check_integrity(const BackgroundKB& kb) const;

 private:
  std::size_t tree_size(const Clause& c) const;

  PredicateRegistry registry_;
  RuleSet dyn_;
  RuleSet con_;
  std::map<std::string, std::uint64_t> tombstones_;
  std::map<std::pair<Provenance, std::string>, std::vector<ParkedRule>> parked_;
};

struct GeneralizeReport {
  std::size_t rules_added = 0;
  std::size_t abs_added = 0;
  std::vector<Atom> inexpressible;
  std::uint64_t nodes_expanded = 0;
  std::vector<std::string> added_keys;
};

// Merges the induced explanations of every atom in fn_atoms into dyn
// (target = dynamics) or con (target = constraint). Only the
// cfg.max_solutions_per_goal smallest derivations of each atom are
// considered; those already present or pruned earlier are skipped, so a
// repeated call adds nothing.
// Throws std::invalid_argument on an empty atom set.
GeneralizeReport generalize(Hypothesis& h, std::span<const Atom> fn_atoms, Provenance target, const State& context,
                            const BackgroundKB& kb, const EngineConfig& cfg, int step = 0);

// Atom -> keys of the top-level rules that derived it.
using FiringTrace = std::map<Atom, std::set<std::string>>;

struct SpecializeReport {
  std::size_t rules_pruned = 0;
  std::vector<std::string> pruned_keys;
};

// Removes every rule of the target set blamed for a false positive. Throws
// std::logic_error when a false positive has no trace entry.
SpecializeReport specialize(Hypothesis& h, std::span<const Atom> fp_atoms, const FiringTrace& trace,
                            Provenance target);

struct CompressReport {
  std::size_t dyn_removed = 0;
  std::size_t con_removed = 0;
  std::size_t abs_removed = 0;
  std::vector<std::string> removed_keys;
};

// Parks rules subsumed by a verified, strictly more general rule with the
// same head predicate (equivalent rules keep the older, then smaller one),
// then removes abstractions no longer reachable from any rule and retires
// them from the registry.
CompressReport compress_gc(Hypothesis& h);

// Text dump with `% abstractions`, `% dynamics` and `% constraints`
// sections, each ordered by canonical hash.
std::string dump_program(const Hypothesis& h);
// Reads a dump. Sorts come from kb and the dumped abstractions.
Hypothesis load_program(std::string_view text, const BackgroundKB& kb);

}  // namespace mil
