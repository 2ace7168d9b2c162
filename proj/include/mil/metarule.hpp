#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mil/logic.hpp"

namespace mil {

// Second-order literal: a predicate variable over first-order variables.
struct MetaAtom {
  Symbol pred_var;
  std::vector<std::size_t> args;  // indices into Metarule::vars
};

// Second-order clause template, e.g. chain: P(X,Y) :- Q(X,Z), R(Z,Y).
struct Metarule {
  Symbol name;
  MetaAtom head;
  std::vector<MetaAtom> body;
  std::vector<Symbol> vars;        // first-order variables, head variables first
  std::vector<Symbol> var_sorts;   // empty symbol = any sort
  std::size_t arity_bound = 2;

  std::size_t head_arity() const { return head.args.size(); }
  // Throws std::invalid_argument when a head variable is missing from the
  // body, the body exceeds arity_bound, or a predicate variable repeats.
  void validate() const;
};

// `name: P(X,Y) :- Q(X,Z), R(Z,Y).` with optional `X:sort` annotations.
Metarule parse_metarule(std::string_view line, std::size_t arity_bound = 2);
// One metarule per line; `%` comments and blank lines ignored. Sorted by name.
std::vector<Metarule> parse_metarules(std::string_view text, std::size_t arity_bound = 2);
std::string default_metarules_text();
std::vector<Metarule> default_metarules();

std::string to_string(const Metarule& m);

}  // namespace mil
