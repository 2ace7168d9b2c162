#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mil/background.hpp"
#include "mil/logic.hpp"

namespace mil {

// Global registry of invented predicates, keyed by the canonical form of
// their defining clause. Two alpha-equivalent definitions map to one symbol.
class PredicateRegistry {
 public:
  struct Entry {
    Symbol pred;
    Clause definition;
    Signature signature;
    std::string key;
    std::uint64_t hash = 0;
  };

  // Structural key of an abstraction with the given head arguments and body.
  // Invented predicates in the body are rendered by their own keys, so the
  // result does not depend on the names the registry handed out.
  std::string key_of(std::span<const Term> head_args, std::span<const Atom> body) const;

  // Returns the existing symbol for an equivalent definition, or mints
  // p<n>, records the definition and returns it. `created` reports which.
  Symbol reuse_or_register(std::span<const Term> head_args, std::span<const Atom> body, int step = 0,
                           bool* created = nullptr);

  // Re-registers a definition under a fixed name, as read from a dump.
  // Throws std::invalid_argument if the name or definition is taken.
  void restore(const Clause& definition);

  const Entry* find(Symbol pred) const;
  std::optional<Symbol> find_key(const std::string& key) const;
  bool contains(Symbol pred) const { return find(pred) != nullptr; }
  void retire(Symbol pred);

  std::size_t size() const { return by_symbol_.size(); }
  const std::map<Symbol, Entry>& entries() const { return by_symbol_; }
  std::vector<Signature> signatures() const;

  // Renders invented predicates as `#<hash of key>`, everything else by name.
  PredRender render() const;
  std::string render_pred(Symbol pred) const;

 private:
  std::map<std::string, Symbol> by_key_;
  std::map<Symbol, Entry> by_symbol_;
  unsigned next_index_ = 1;
};

// Head atom used in keys of invented predicates.
Atom invented_head_pattern(std::span<const Term> head_args);

}  // namespace mil
