#include "mil/registry.hpp"

#include <stdexcept>

namespace mil {

Atom invented_head_pattern(std::span<const Term> head_args) {
  static const Symbol placeholder("$");
  return Atom(placeholder, std::vector<Term>(head_args.begin(), head_args.end()));
}

std::string PredicateRegistry::render_pred(Symbol pred) const {
  auto it = by_symbol_.find(pred);
  if (it == by_symbol_.end()) return pred.str();
  return "#" + hex64(it->second.hash);
}

PredRender PredicateRegistry::render() const {
  return [this](Symbol p) { return render_pred(p); };
}

std::string PredicateRegistry::key_of(std::span<const Term> head_args, std::span<const Atom> body) const {
  Atom head = invented_head_pattern(head_args);
  return canonical_form(body, &head, render());
}

Symbol PredicateRegistry::reuse_or_register(std::span<const Term> head_args, std::span<const Atom> body, int step,
                                            bool* created) {
  std::string key = key_of(head_args, body);
  if (auto it = by_key_.find(key); it != by_key_.end()) {
    if (created) *created = false;
    return it->second;
  }
  Symbol pred;
  do {
    pred = Symbol("p" + std::to_string(next_index_++));
  } while (by_symbol_.count(pred));
  Entry e;
  e.pred = pred;
  e.definition.head = Atom(pred, std::vector<Term>(head_args.begin(), head_args.end()));
  e.definition.body.assign(body.begin(), body.end());
  e.definition.provenance = Provenance::abstraction;
  e.definition.origin_step = step;
  e.signature.pred = pred;
  for (const Term& t : head_args) e.signature.arg_sorts.push_back(t.sort);
  e.signature.source = PredicateSource::invented;
  e.key = key;
  e.hash = fnv1a(key);
  by_key_.emplace(key, pred);
  by_symbol_.emplace(pred, std::move(e));
  if (created) *created = true;
  return pred;
}

void PredicateRegistry::restore(const Clause& definition) {
  Symbol pred = definition.head.pred;
  if (by_symbol_.count(pred)) throw std::invalid_argument("invented predicate " + pred.str() + " defined twice");
  std::string key = key_of(definition.head.args, definition.body);
  if (by_key_.count(key)) {
    throw std::invalid_argument("invented predicate " + pred.str() + " duplicates " + by_key_.at(key).str());
  }
  Entry e;
  e.pred = pred;
  e.definition = definition;
  e.definition.provenance = Provenance::abstraction;
  e.signature.pred = pred;
  for (const Term& t : definition.head.args) e.signature.arg_sorts.push_back(t.sort);
  e.signature.source = PredicateSource::invented;
  e.key = key;
  e.hash = fnv1a(key);
  by_key_.emplace(key, pred);
  by_symbol_.emplace(pred, std::move(e));
  const std::string& name = pred.str();
  if (name.size() > 1 && name[0] == 'p') {
    try {
      unsigned n = static_cast<unsigned>(std::stoul(name.substr(1)));
      if (n >= next_index_) next_index_ = n + 1;
    } catch (const std::exception&) {
    }
  }
}

const PredicateRegistry::Entry* PredicateRegistry::find(Symbol pred) const {
  auto it = by_symbol_.find(pred);
  return it == by_symbol_.end() ? nullptr : &it->second;
}

std::optional<Symbol> PredicateRegistry::find_key(const std::string& key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

void PredicateRegistry::retire(Symbol pred) {
  auto it = by_symbol_.find(pred);
  if (it == by_symbol_.end()) return;
  by_key_.erase(it->second.key);
  by_symbol_.erase(it);
}

std::vector<Signature> PredicateRegistry::signatures() const {
  std::vector<Signature> out;
  for (const auto& [p, e] : by_symbol_) out.push_back(e.signature);
  return out;
}

}  // namespace mil
