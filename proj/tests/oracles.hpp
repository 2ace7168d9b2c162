#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of them share code paths with the engine beyond the term
// types and canonical_form.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mil/background.hpp"
#include "mil/logic.hpp"
#include "mil/metarule.hpp"

namespace mil::oracle {

using Tuple = std::vector<Term>;
using Extension = std::set<Tuple>;

// An abstraction written out over primitives only, with its full extension.
struct FlatDef {
  std::vector<Term> head;  // distinct sorted variables
  std::vector<Atom> body;
  Extension ext;
  std::string key;  // canonical form with a `$` head
};

inline std::string flat_key(const std::vector<Term>& head, const std::vector<Atom>& body) {
  Atom h(Symbol("$"), head);
  return canonical_form(body, &h);
}

// Bottom-up enumeration of every metarule instantiation over the primitives
// of kb (plus the state), nested up to max_depth levels of invention, each
// written out over primitives and evaluated by trying every assignment of
// constants. Returns the canonical keys of the top-level instantiations
// that entail goal. Single-literal metarules invent only at the top unless
// unit_abstractions is set.
class TopProgramEnumerator {
 public:
  TopProgramEnumerator(const BackgroundKB& kb, const State& context, std::vector<Metarule> metarules,
                       int max_depth, bool unit_abstractions = false)
      : metarules_(std::move(metarules)), max_depth_(max_depth), unit_(unit_abstractions) {
    for (const Signature* s : kb.catalog()) {
      if (s->source == PredicateSource::invented) continue;
      std::vector<Slot> free(s->arity());
      Extension ext;
      kb.query(s->pred, free, context, [&](std::span<const Term> t) { ext.emplace(t.begin(), t.end()); });
      prims_.push_back({s, std::move(ext)});
      for (const Tuple& t : prims_.back().ext) constants_.insert(t.begin(), t.end());
    }
  }

  std::set<std::string> solve(const Atom& goal) {
    for (const Term& t : goal.args) constants_.insert(t);
    // levels[d]: definitions rooted at invention depth d (d >= 1).
    std::vector<std::vector<FlatDef>> levels(max_depth_ + 2);
    for (int d = max_depth_; d >= 1; --d) levels[d] = level(d, d < max_depth_ ? &levels[d + 1] : nullptr, nullptr);
    Tuple want(goal.args.begin(), goal.args.end());
    auto tops = level(0, max_depth_ >= 1 ? &levels[1] : nullptr, &want);
    std::set<std::string> keys;
    for (const FlatDef& f : tops) keys.insert(f.key);
    return keys;
  }

  std::size_t instances_tried() const { return tried_; }

 private:
  struct Prim {
    const Signature* sig;
    Extension ext;
  };
  // A literal choice: a primitive or a nested definition.
  struct Option {
    const Prim* prim = nullptr;
    const FlatDef* def = nullptr;
    std::size_t arity() const { return prim ? prim->sig->arity() : def->head.size(); }
    const Extension& ext() const { return prim ? prim->ext : def->ext; }
  };

  std::vector<FlatDef> level(int depth, const std::vector<FlatDef>* below, const Tuple* goal) {
    std::map<std::string, FlatDef> out;
    for (const Metarule& m : metarules_) {
      if (goal && m.head_arity() != goal->size()) continue;
      bool may_invent = below && (m.body.size() > 1 || depth == 0 || unit_);
      std::vector<std::vector<Option>> options(m.body.size());
      for (std::size_t j = 0; j < m.body.size(); ++j) {
        for (const Prim& p : prims_)
          if (p.sig->arity() == m.body[j].args.size()) options[j].push_back({&p, nullptr});
        if (may_invent)
          for (const FlatDef& f : *below)
            if (f.head.size() == m.body[j].args.size()) options[j].push_back({nullptr, &f});
      }
      std::vector<std::size_t> pick(m.body.size(), 0);
      bool any = std::all_of(options.begin(), options.end(), [](const auto& o) { return !o.empty(); });
      while (any) {
        std::vector<const Option*> chosen;
        for (std::size_t j = 0; j < m.body.size(); ++j) chosen.push_back(&options[j][pick[j]]);
        instantiate(m, chosen, goal, out);
        std::size_t j = 0;
        while (j < pick.size() && ++pick[j] == options[j].size()) pick[j++] = 0;
        if (j == pick.size()) break;
      }
    }
    std::vector<FlatDef> v;
    for (auto& [k, f] : out) v.push_back(std::move(f));
    return v;
  }

  void instantiate(const Metarule& m, const std::vector<const Option*>& chosen, const Tuple* goal,
                   std::map<std::string, FlatDef>& out) {
    ++tried_;
    std::vector<Term> values(m.vars.size());
    std::vector<bool> set(m.vars.size(), false);
    Extension ext;
    std::vector<Term> consts(constants_.begin(), constants_.end());
    std::function<void(std::size_t)> assign = [&](std::size_t v) {
      if (v == m.vars.size()) {
        for (std::size_t j = 0; j < m.body.size(); ++j) {
          Tuple t;
          for (std::size_t a : m.body[j].args) t.push_back(values[a]);
          if (!chosen[j]->ext().count(t)) return;
        }
        Tuple head;
        for (std::size_t a : m.head.args) head.push_back(values[a]);
        ext.insert(head);
        return;
      }
      for (const Term& c : consts) {
        if (!m.var_sorts[v].empty() && m.var_sorts[v] != c.sort) continue;
        values[v] = c;
        assign(v + 1);
      }
    };
    if (goal) {
      // Only the goal tuple matters at the top.
      for (std::size_t i = 0; i < m.head.args.size(); ++i) {
        std::size_t v = m.head.args[i];
        if (set[v] && values[v] != (*goal)[i]) return;
        values[v] = (*goal)[i];
        set[v] = true;
      }
      std::function<void(std::size_t)> assign_rest = [&](std::size_t v) {
        if (v == m.vars.size()) {
          for (std::size_t j = 0; j < m.body.size(); ++j) {
            Tuple t;
            for (std::size_t a : m.body[j].args) t.push_back(values[a]);
            if (!chosen[j]->ext().count(t)) return;
          }
          ext.insert(*goal);
          return;
        }
        if (set[v]) return assign_rest(v + 1);
        for (const Term& c : consts) {
          values[v] = c;
          assign_rest(v + 1);
        }
      };
      assign_rest(0);
    } else {
      assign(0);
    }
    if (ext.empty()) return;
    // Write the instance out over primitives.
    std::vector<Symbol> sorts(m.vars.size());
    for (std::size_t j = 0; j < m.body.size(); ++j) {
      for (std::size_t a = 0; a < m.body[j].args.size(); ++a) {
        Symbol s = chosen[j]->prim ? chosen[j]->prim->sig->arg_sorts[a] : chosen[j]->def->head[a].sort;
        if (!sorts[m.body[j].args[a]].empty() && sorts[m.body[j].args[a]] != s) return;
        sorts[m.body[j].args[a]] = s;
      }
    }
    auto var = [&](std::size_t v) { return Term::var("V" + std::to_string(v), sorts[v].str()); };
    FlatDef f;
    for (std::size_t a : m.head.args) f.head.push_back(var(a));
    std::set<Atom> body;
    // A clause body is a set: a repeated literal is inlined once.
    std::set<std::pair<const FlatDef*, std::vector<Term>>> inlined;
    for (std::size_t j = 0; j < m.body.size(); ++j) {
      std::vector<Term> args;
      for (std::size_t a : m.body[j].args) args.push_back(var(a));
      if (chosen[j]->prim) {
        body.insert(Atom(chosen[j]->prim->sig->pred, args));
        continue;
      }
      const FlatDef& d = *chosen[j]->def;
      if (!inlined.insert({&d, args}).second) continue;
      std::map<Symbol, Term> rename;
      for (std::size_t a = 0; a < d.head.size(); ++a) rename[d.head[a].name] = args[a];
      std::string prefix = "L" + std::to_string(j) + "_";
      for (Atom b : d.body) {
        for (Term& t : b.args) {
          auto it = rename.find(t.name);
          if (it != rename.end()) t = it->second;
          else t = Term::var(Symbol(prefix + t.name.str()), t.sort);
        }
        body.insert(b);
      }
    }
    f.body.assign(body.begin(), body.end());
    f.key = flat_key(f.head, f.body);
    f.ext = std::move(ext);
    auto [it, fresh] = out.try_emplace(f.key, f);
    if (!fresh) it->second.ext.insert(f.ext.begin(), f.ext.end());
  }

  std::vector<Prim> prims_;
  std::set<Term> constants_;
  std::vector<Metarule> metarules_;
  int max_depth_;
  bool unit_;
  std::size_t tried_ = 0;
};

// A micro-domain with two sorts, extensional background facts and a
// one-object state.
struct MicroDomain {
  BackgroundKB kb;
  State context;
  Atom goal;
};

inline MicroDomain micro_domain() {
  MicroDomain d;
  Symbol obj("object"), place("place");
  d.kb.declare({Symbol("at"), {obj, place}, PredicateSource::state, true});
  d.kb.declare({Symbol("alive"), {obj}, PredicateSource::state, true});
  d.kb.declare({Symbol("edge"), {place, place}, PredicateSource::background, false});
  d.kb.declare({Symbol("safe"), {place}, PredicateSource::background, false});
  auto p = [&](const char* n) { return Term::constant(n, "place"); };
  Term agent = Term::constant("agent", "object");
  d.kb.add_fact(Atom("edge", {p("p1"), p("p2")}));
  d.kb.add_fact(Atom("edge", {p("p2"), p("p3")}));
  d.kb.add_fact(Atom("edge", {p("p3"), p("p4")}));
  d.kb.add_fact(Atom("safe", {p("p2")}));
  d.kb.add_fact(Atom("safe", {p("p4")}));
  d.context = {Atom("at", {agent, p("p1")}), Atom("alive", {agent})};
  d.goal = Atom("at", {agent, p("p2")});
  return d;
}

}  // namespace mil::oracle
