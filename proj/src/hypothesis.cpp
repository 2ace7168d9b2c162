#include "mil/hypothesis.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mil {

namespace {

std::string unfolded_form(const Clause& flat) {
  Atom head = flat.head;
  head.pred = Symbol("$");
  return flat.head.pred.str() + "|" + canonical_form(flat.body, &head);
}

}  // namespace

RuleSet& Hypothesis::rules(Provenance p) {
  if (p == Provenance::dynamics) return dyn_;
  if (p == Provenance::constraint) return con_;
  throw std::invalid_argument("abstractions are not rules");
}

const RuleSet& Hypothesis::rules(Provenance p) const { return const_cast<Hypothesis*>(this)->rules(p); }

std::string Hypothesis::rule_key(const Clause& c) const {
  return canonical_form(c.body, &c.head, registry_.render());
}

Clause Hypothesis::unfold_rule(const Clause& c) const {
  return unfold(c, [this](Symbol pred) -> const Clause* {
    const auto* e = registry_.find(pred);
    return e ? &e->definition : nullptr;
  });
}

std::size_t Hypothesis::tree_size(const Clause& c) const {
  std::set<Symbol> seen;
  std::vector<Symbol> todo;
  for (const Atom& a : c.body) todo.push_back(a.pred);
  while (!todo.empty()) {
    Symbol p = todo.back();
    todo.pop_back();
    const auto* e = registry_.find(p);
    if (!e || !seen.insert(p).second) continue;
    for (const Atom& a : e->definition.body) todo.push_back(a.pred);
  }
  return 1 + seen.size();
}

bool Hypothesis::add_rule(Clause c) {
  RuleSet& set = rules(c.provenance);
  Rule r;
  r.key = rule_key(c);
  if (set.count(r.key)) return false;
  r.unfolded_key = unfolded_form(unfold_rule(c));
  for (const auto& [k, other] : set) {
    if (other.unfolded_key == r.unfolded_key) return false;
  }
  r.size = tree_size(c);
  r.clause = std::move(c);
  set.emplace(r.key, std::move(r));
  return true;
}

void Hypothesis::park(Provenance p, const std::string& key, const std::string& absorber) {
  RuleSet& set = rules(p);
  auto it = set.find(key);
  if (it == set.end()) return;
  ParkedRule parked{it->second, {}};
  std::set<Symbol> seen;
  std::function<void(Symbol)> visit = [&](Symbol pred) {
    const auto* e = registry_.find(pred);
    if (!e || !seen.insert(pred).second) return;
    for (const Atom& a : e->definition.body) visit(a.pred);
    parked.definitions.push_back(e->definition);
  };
  for (const Atom& a : it->second.clause.body) visit(a.pred);
  set.erase(it);
  auto& dest = parked_[{p, absorber}];
  dest.push_back(std::move(parked));
  if (auto own = parked_.find({p, key}); own != parked_.end()) {
    for (ParkedRule& r : own->second) dest.push_back(std::move(r));
    parked_.erase(own);
  }
}

std::vector<std::string> Hypothesis::unpark(Provenance p, const std::string& absorber) {
  std::vector<std::string> keys;
  auto it = parked_.find({p, absorber});
  if (it == parked_.end()) return keys;
  std::vector<ParkedRule> list = std::move(it->second);
  parked_.erase(it);
  for (const ParkedRule& r : list) {
    if (tombstones_.count(r.rule.key)) continue;
    std::map<Symbol, Symbol> renamed;
    auto rename = [&](std::vector<Atom> body) {
      for (Atom& a : body)
        if (auto n = renamed.find(a.pred); n != renamed.end()) a.pred = n->second;
      return body;
    };
    for (const Clause& d : r.definitions) {
      std::vector<Atom> body = rename(d.body);
      renamed[d.head.pred] = registry_.reuse_or_register(d.head.args, body, d.origin_step);
    }
    Clause c = r.rule.clause;
    c.body = rename(c.body);
    std::string key = rule_key(c);
    if (!add_rule(std::move(c))) continue;
    rules(p).at(key).stats = r.rule.stats;
    keys.push_back(key);
  }
  return keys;
}

bool Hypothesis::remove_rule(Provenance p, const std::string& key) { return rules(p).erase(key) > 0; }

const Rule* Hypothesis::find_rule(Provenance p, const std::string& key) const {
  const RuleSet& set = rules(p);
  auto it = set.find(key);
  return it == set.end() ? nullptr : &it->second;
}

void Hypothesis::check_integrity(const BackgroundKB& kb) const {
  auto check_body = [&](const Clause& c) {
    for (const Atom& a : c.body) {
      if (!registry_.contains(a.pred) && !kb.signature(a.pred)) {
        throw std::logic_error("dangling predicate " + a.pred.str() + " in " + to_string(c));
      }
    }
  };
  for (const auto& [k, r] : dyn_) check_body(r.clause);
  for (const auto& [k, r] : con_) check_body(r.clause);
  // Depth-first search for cycles among abstractions.
  std::map<Symbol, int> colour;
  std::function<void(Symbol)> visit = [&](Symbol p) {
    const auto* e = registry_.find(p);
    if (!e) return;
    int& c = colour[p];
    if (c == 2) return;
    if (c == 1) throw std::logic_error("cycle among abstractions through " + p.str());
    c = 1;
    check_body(e->definition);
    for (const Atom& a : e->definition.body) visit(a.pred);
    colour[p] = 2;
  };
  for (const auto& [p, e] : registry_.entries()) visit(p);
}

GeneralizeReport generalize(Hypothesis& h, std::span<const Atom> fn_atoms, Provenance target, const State& context,
                            const BackgroundKB& kb, const EngineConfig& cfg, int step) {
  if (fn_atoms.empty()) throw std::invalid_argument("generalize needs at least one unexplained atom");
  GeneralizeReport report;
  for (const Atom& goal : fn_atoms) {
    InductionResult r = metarule_induction(goal, context, kb, cfg);
    report.nodes_expanded += r.nodes_expanded;
    if (r.derivations.empty()) {
      report.inexpressible.push_back(goal);
      continue;
    }
    const RuleSet& set = h.rules(target);
    // The window is the smallest derivations, present or pruned ones
    // included, so repeating a call adds nothing.
    std::size_t taken = 0;
    std::size_t window = 0;
    for (const Derivation& d : r.derivations) {
      if (cfg.max_solutions_per_goal > 0 && window++ == cfg.max_solutions_per_goal) break;
      if (set.count(d.key) || h.tombstones().count(d.key)) continue;
      std::string ukey = goal.pred.str() + "|" + d.unfolded_key;
      bool dup = std::any_of(set.begin(), set.end(), [&](const auto& kv) { return kv.second.unfolded_key == ukey; });
      if (dup) continue;
      std::vector<Symbol> minted;
      Clause top = materialize(r, d, h.registry(), step, &minted);
      top.provenance = target;
      top.origin_step = step;
      if (h.add_rule(top)) {
        ++taken;
        report.added_keys.push_back(d.key);
      }
      report.abs_added += minted.size();
    }
    report.rules_added += taken;
  }
  return report;
}

SpecializeReport specialize(Hypothesis& h, std::span<const Atom> fp_atoms, const FiringTrace& trace,
                            Provenance target) {
  SpecializeReport report;
  for (const Atom& a : fp_atoms) {
    auto it = trace.find(a);
    if (it == trace.end() || it->second.empty()) {
      throw std::logic_error("false positive " + to_string(a) + " has no firing rule");
    }
    for (const std::string& key : it->second) {
      if (!h.remove_rule(target, key)) continue;
      h.add_tombstone(key);
      ++report.rules_pruned;
      report.pruned_keys.push_back(key);
    }
  }
  return report;
}

CompressReport compress_gc(Hypothesis& h) {
  CompressReport report;
  for (Provenance p : {Provenance::dynamics, Provenance::constraint}) {
    RuleSet& set = h.rules(p);
    std::vector<const Rule*> rules;
    std::vector<Clause> flat;
    for (const auto& [k, r] : set) {
      rules.push_back(&r);
      flat.push_back(h.unfold_rule(r.clause));
    }
    auto better = [&](std::size_t a, std::size_t b) {
      const Rule& x = *rules[a];
      const Rule& y = *rules[b];
      if (x.clause.origin_step != y.clause.origin_step) return x.clause.origin_step < y.clause.origin_step;
      if (x.size != y.size) return x.size < y.size;
      return x.key < y.key;
    };
    std::vector<std::pair<std::string, std::string>> doomed;  // (absorbed, absorber)
    for (std::size_t s = 0; s < rules.size(); ++s) {
      for (std::size_t g = 0; g < rules.size(); ++g) {
        if (g == s || rules[g]->stats.times_verified == 0) continue;
        if (rules[g]->clause.head.pred != rules[s]->clause.head.pred) continue;
        if (!subsumes(flat[g], flat[s])) continue;
        if (subsumes(flat[s], flat[g]) && !better(g, s)) continue;
        doomed.emplace_back(rules[s]->key, rules[g]->key);
        break;
      }
    }
    for (const auto& [k, absorber] : doomed) {
      h.park(p, k, absorber);
      report.removed_keys.push_back(k);
    }
    (p == Provenance::dynamics ? report.dyn_removed : report.con_removed) = doomed.size();
  }

  // Abstractions reachable from some rule survive.
  std::set<Symbol> live;
  std::vector<Symbol> todo;
  for (const RuleSet* set : {&h.dyn(), &h.con()}) {
    for (const auto& [k, r] : *set) {
      for (const Atom& a : r.clause.body) todo.push_back(a.pred);
    }
  }
  while (!todo.empty()) {
    Symbol p = todo.back();
    todo.pop_back();
    const auto* e = h.registry().find(p);
    if (!e || !live.insert(p).second) continue;
    for (const Atom& a : e->definition.body) todo.push_back(a.pred);
  }
  std::vector<Symbol> dead;
  for (const auto& [p, e] : h.registry().entries()) {
    if (!live.count(p)) dead.push_back(p);
  }
  for (Symbol p : dead) h.registry().retire(p);
  report.abs_removed = dead.size();
  return report;
}

std::string dump_program(const Hypothesis& h) {
  std::ostringstream os;
  os << "% abstractions\n";
  std::vector<std::pair<std::uint64_t, std::string>> lines;
  for (const auto& [p, e] : h.registry().entries()) lines.emplace_back(e.hash, to_string(e.definition));
  std::sort(lines.begin(), lines.end());
  for (const auto& [hash, line] : lines) os << line << '\n';
  for (Provenance p : {Provenance::dynamics, Provenance::constraint}) {
    os << (p == Provenance::dynamics ? "% dynamics\n" : "% constraints\n");
    lines.clear();
    for (const auto& [k, r] : h.rules(p)) lines.emplace_back(fnv1a(k), to_string(r.clause));
    std::sort(lines.begin(), lines.end());
    for (const auto& [hash, line] : lines) os << line << '\n';
  }
  return os.str();
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Hypothesis load_program(std::string_view text, const BackgroundKB& kb) {
  Hypothesis h;
  std::vector<Clause> abs;
  std::vector<Clause> rules;
  Provenance section = Provenance::abstraction;
  bool in_section = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '%') {
      if (t.find("abstractions") != std::string::npos) section = Provenance::abstraction, in_section = true;
      else if (t.find("dynamics") != std::string::npos) section = Provenance::dynamics, in_section = true;
      else if (t.find("constraints") != std::string::npos) section = Provenance::constraint, in_section = true;
      continue;
    }
    if (!in_section) throw ParseError("clause before any section header: " + t);
    Clause c = parse_clause(t);
    c.provenance = section;
    (section == Provenance::abstraction ? abs : rules).push_back(std::move(c));
  }

  SortLookup base = kb.sort_lookup();
  SortLookup lookup = [&](Symbol pred, std::size_t arity) -> const std::vector<Symbol>* {
    if (const auto* e = h.registry().find(pred)) {
      return e->signature.arg_sorts.size() == arity ? &e->signature.arg_sorts : nullptr;
    }
    return base(pred, arity);
  };
  // Restore abstractions once every invented predicate they use is known.
  std::vector<bool> done(abs.size(), false);
  for (std::size_t restored = 0; restored < abs.size();) {
    std::size_t before = restored;
    for (std::size_t i = 0; i < abs.size(); ++i) {
      if (done[i]) continue;
      bool ready = std::all_of(abs[i].body.begin(), abs[i].body.end(), [&](const Atom& a) {
        return h.registry().contains(a.pred) || std::none_of(abs.begin(), abs.end(), [&](const Clause& d) {
                 return d.head.pred == a.pred;
               });
      });
      if (!ready) continue;
      Clause def = abs[i];
      for (Atom& a : def.body) assign_sorts(a, lookup);
      for (Term& t : def.head.args) {
        for (const Atom& a : def.body) {
          for (const Term& b : a.args) {
            if (b.is_var() && b.name == t.name) t.sort = b.sort;
          }
        }
        if (t.sort.empty()) throw ParseError("head variable " + t.name.str() + " not in body: " + to_string(def));
      }
      h.registry().restore(def);
      done[i] = true;
      ++restored;
    }
    if (restored == before) throw ParseError("abstractions form a cycle or use undefined predicates");
  }
  for (Clause& c : rules) {
    assign_sorts(c, lookup);
    if (!h.add_rule(c)) throw ParseError("duplicate rule: " + to_string(c));
  }
  h.check_integrity(kb);
  return h;
}

}  // namespace mil
