#pragma once

// First-order substrate: flat terms, atoms, clauses, substitutions,
// unification, canonical hashing and theta-subsumption.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mil/symbol.hpp"

namespace mil {

enum class TermKind : std::uint8_t { variable, constant };

// Terms are flat: a variable or a constant, each tagged with a sort.
struct Term {
  TermKind kind = TermKind::constant;
  Symbol name;
  Symbol sort;

  static Term var(Symbol name, Symbol sort = {}) { return {TermKind::variable, name, sort}; }
  static Term constant(Symbol name, Symbol sort = {}) { return {TermKind::constant, name, sort}; }
  static Term var(std::string_view name, std::string_view sort = {}) {
    return var(Symbol(name), sort.empty() ? Symbol() : Symbol(sort));
  }
  static Term constant(std::string_view name, std::string_view sort = {}) {
    return constant(Symbol(name), sort.empty() ? Symbol() : Symbol(sort));
  }

  bool is_var() const { return kind == TermKind::variable; }
  bool is_const() const { return kind == TermKind::constant; }

  friend bool operator==(const Term& a, const Term& b) {
    return a.kind == b.kind && a.name == b.name && a.sort == b.sort;
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.name != b.name) return a.name < b.name;
    return a.sort < b.sort;
  }
};

struct Atom {
  Symbol pred;
  std::vector<Term> args;

  Atom() = default;
  Atom(Symbol p, std::vector<Term> a) : pred(p), args(std::move(a)) {}
  Atom(std::string_view p, std::vector<Term> a) : pred(Symbol(p)), args(std::move(a)) {}

  std::size_t arity() const { return args.size(); }
  bool is_ground() const;

  friend bool operator==(const Atom& a, const Atom& b) { return a.pred == b.pred && a.args == b.args; }
  friend bool operator!=(const Atom& a, const Atom& b) { return !(a == b); }
  friend bool operator<(const Atom& a, const Atom& b) {
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.args < b.args;
  }
};

enum class Provenance : std::uint8_t { abstraction, dynamics, constraint };

const char* to_string(Provenance p);

// Definite clause. Dynamics clauses read as add(head) <- body, constraint
// clauses as del(head) <- body.
struct Clause {
  Atom head;
  std::vector<Atom> body;
  Provenance provenance = Provenance::abstraction;
  int origin_step = 0;

  bool range_restricted() const;
};

// Idempotent variable bindings. Keys are variable names.
class Substitution {
 public:
  const Term* find(Symbol var) const;
  // Binds var to t, resolving t first and rewriting existing bindings so the
  // map stays idempotent. Returns false on a sort clash or a cyclic binding.
  bool bind(const Term& var, const Term& t);

  Term apply(const Term& t) const;
  Atom apply(const Atom& a) const;
  Clause apply(const Clause& c) const;

  std::size_t size() const { return bindings_.size(); }
  bool empty() const { return bindings_.empty(); }
  const std::map<Symbol, Term>& bindings() const { return bindings_; }

  friend bool operator==(const Substitution& a, const Substitution& b) { return a.bindings_ == b.bindings_; }

 private:
  std::map<Symbol, Term> bindings_;
};

// Most general unifier of two atoms, sort-checked. Untyped (empty-sort)
// terms are compatible with every sort.
std::optional<Substitution> unify(const Atom& a, const Atom& b);
Atom apply(const Substitution& s, const Atom& a);

bool sorts_compatible(Symbol a, Symbol b);

// Maps a predicate symbol to the text used for it inside canonical forms.
// Lets callers replace invented predicate names by structural keys.
using PredRender = std::function<std::string(Symbol)>;

// Canonical text of a clause body (and optional head) that is invariant
// under variable renaming and body reordering. Sorts are part of the text.
std::string canonical_form(std::span<const Atom> body, const Atom* head = nullptr,
                           const PredRender& render = {});
std::uint64_t canonical_hash(std::span<const Atom> body);
std::uint64_t canonical_hash(const Clause& c, const PredRender& render = {});

// True when some theta maps general's head onto specific's head and every
// body literal of general onto a body literal of specific.
bool subsumes(const Clause& general, const Clause& specific);

// Inlines invented predicates: every body literal whose predicate has a
// definition (a single clause) is replaced by that clause's body, renamed
// apart, recursively. The result mentions primitive predicates only.
using DefinitionLookup = std::function<const Clause*(Symbol pred)>;
Clause unfold(const Clause& c, const DefinitionLookup& definition_of);

// ---- text syntax -------------------------------------------------------

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Clause& c);
std::ostream& operator<<(std::ostream& os, const Term& t);
std::ostream& operator<<(std::ostream& os, const Atom& a);
std::ostream& operator<<(std::ostream& os, const Clause& c);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parsers produce untyped terms; see assign_sorts.
Atom parse_atom(std::string_view text);
std::vector<Atom> parse_atom_list(std::string_view text);
Clause parse_clause(std::string_view text);

// Looks up the declared argument sorts of a predicate.
using SortLookup = std::function<const std::vector<Symbol>*(Symbol pred, std::size_t arity)>;

// Fills in every term's sort from predicate signatures; throws ParseError on
// unknown predicates or a variable used at two different sorts.
void assign_sorts(Atom& a, const SortLookup& lookup);
void assign_sorts(Clause& c, const SortLookup& lookup);

}  // namespace mil
