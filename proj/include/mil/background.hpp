#pragma once

// Background knowledge: the typed predicate catalog plus procedural
// evaluators for intensional predicates such as adjacent/3.

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mil/logic.hpp"

namespace mil {

// A world state: a finite set of ground atoms.
using State = std::set<Atom>;

enum class PredicateSource : std::uint8_t { state, background, action, invented };

const char* to_string(PredicateSource s);

struct Signature {
  Symbol pred;
  std::vector<Symbol> arg_sorts;
  PredicateSource source = PredicateSource::state;
  // Whether the predicate may head a dynamics/constraint rule.
  bool head_allowed = false;

  std::size_t arity() const { return arg_sorts.size(); }
};

// One argument of a query: bound to a constant or free.
using Slot = std::optional<Term>;
using Emit = std::function<void(std::span<const Term>)>;

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  // True when solve() can answer without touching a number of entries that
  // grows with the domain (e.g. the grid area).
  virtual bool bounded(std::span<const Slot> args) const = 0;
  // Emits every ground tuple consistent with args, in a fixed order.
  virtual void solve(std::span<const Slot> args, const Emit& emit) const = 0;
};

// Extensional relation given as a list of facts.
class FactEvaluator : public Evaluator {
 public:
  void add(std::vector<Term> tuple) { facts_.insert(std::move(tuple)); }
  bool bounded(std::span<const Slot>) const override { return true; }
  void solve(std::span<const Slot> args, const Emit& emit) const override;

 private:
  std::set<std::vector<Term>> facts_;
};

enum class Terrain : std::uint8_t { floor, wall, lava, goal };

struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(Coord a, Coord b) { return a.x == b.x && a.y == b.y; }
  friend bool operator!=(Coord a, Coord b) { return !(a == b); }
  friend bool operator<(Coord a, Coord b) { return a.y != b.y ? a.y < b.y : a.x < b.x; }
};

struct TerrainGrid {
  int width = 0;
  int height = 0;
  std::vector<Terrain> cells;  // row-major

  bool contains(Coord c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  Terrain at(Coord c) const { return cells[static_cast<std::size_t>(c.y) * width + c.x]; }
};

// Sorts and constants of the shipped gridworld vocabulary.
namespace vocab {
inline const Symbol& object() { static const Symbol s("object"); return s; }
inline const Symbol& cell() { static const Symbol s("cell"); return s; }
inline const Symbol& direction() { static const Symbol s("direction"); return s; }
inline const Symbol& agent() { static const Symbol s("agent"); return s; }
}  // namespace vocab

enum class Direction : std::uint8_t { north, south, east, west };
inline constexpr Direction kDirections[] = {Direction::east, Direction::north, Direction::south, Direction::west};

const char* to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view name);
Coord step(Coord c, Direction d);

Term cell_term(Coord c);
std::optional<Coord> parse_cell(Symbol name);
Term direction_term(Direction d);

class BackgroundKB {
 public:
  // Throws std::invalid_argument on a duplicate predicate.
  void declare(Signature sig);
  void attach(Symbol pred, std::shared_ptr<const Evaluator> evaluator);
  // Adds an extensional background fact (creating a FactEvaluator on demand).
  void add_fact(const Atom& fact);

  const Signature* signature(Symbol pred) const;
  const std::map<Symbol, Signature>& signatures() const { return signatures_; }
  // Declared signatures in name order.
  std::vector<const Signature*> catalog() const;
  SortLookup sort_lookup() const;

  bool bounded(Symbol pred, std::span<const Slot> args) const;
  // Ground tuples of pred consistent with args, read from state for state and
  // action predicates and from the evaluator for background ones. Throws
  // std::invalid_argument for predicates without a signature or evaluator.
  void query(Symbol pred, std::span<const Slot> args, const State& state, const Emit& emit) const;

  // Counts grid cells inspected by the built-in evaluators.
  std::uint64_t probe() const { return probe_->load(); }
  void reset_probe() const { probe_->store(0); }
  std::shared_ptr<std::atomic<std::uint64_t>> probe_handle() const { return probe_; }

 private:
  std::map<Symbol, Signature> signatures_;
  std::map<Symbol, std::shared_ptr<const Evaluator>> evaluators_;
  std::map<Symbol, std::shared_ptr<FactEvaluator>> facts_;
  std::shared_ptr<std::atomic<std::uint64_t>> probe_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

// All substitutions grounding query to an atom true in state plus background.
std::vector<Substitution> eval_primitive(const Atom& query, const State& state, const BackgroundKB& kb);

// Predicates whose signature equals sorts exactly, in name order. Extra
// signatures (typically invented predicates) are searched as well.
std::vector<Symbol> compatible_predicates(std::span<const Symbol> sorts, const BackgroundKB& kb,
                                          std::span<const Signature> extra = {});

// Parses the domain declaration format: one `pred/arity : s1, s2 [kind]`
// per line, kind one of state, background, action, optionally followed by
// `head` or `body`. `%` starts a comment.
std::vector<Signature> parse_domain(std::string_view text);
std::string default_domain_text();

// Domain declarations plus grid evaluators for adjacent/3, wall/1,
// not_wall/1, is_lava/1 and is_goal/1.
BackgroundKB make_grid_kb(const TerrainGrid& grid, std::string_view domain_text = {});

}  // namespace mil
