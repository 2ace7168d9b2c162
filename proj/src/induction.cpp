#include "mil/induction.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>

namespace mil {

bool is_placeholder(Symbol pred) {
  const std::string& s = pred.str();
  return s.size() > 1 && s[0] == '$';
}

namespace {

std::size_t placeholder_index(Symbol pred) { return static_cast<std::size_t>(std::stoul(pred.str().substr(1))); }

Symbol placeholder(std::size_t index) { return Symbol("$" + std::to_string(index)); }

struct Choice {
  bool invented = false;
  Symbol pred;
  std::size_t node = 0;
};

// Goal pattern for a sub-abduction: bound constants and free slots. Free
// slots sharing a group id stand for the same variable.
struct Pattern {
  std::vector<Slot> slots;
  std::vector<int> group;

  std::string key(int depth) const {
    std::string k;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i]) {
        k += slots[i]->name.str();
        k += ':';
        k += slots[i]->sort.str();
      } else {
        k += '?';
        k += std::to_string(group[i]);
      }
      k += ',';
    }
    k += '@';
    k += std::to_string(depth);
    return k;
  }
};

struct SubResult {
  std::size_t node;
  std::vector<std::vector<Term>> tuples;
};
using SubResults = std::vector<SubResult>;
using Collected = std::map<std::size_t, std::set<std::vector<Term>>>;

class Engine {
 public:
  Engine(const State& context, const BackgroundKB& kb, const EngineConfig& cfg)
      : context_(context), kb_(kb), cfg_(cfg) {
    for (const Signature* s : kb.catalog()) {
      if (s->source == PredicateSource::invented) continue;
      if (prims_by_arity_.size() <= s->arity()) prims_by_arity_.resize(s->arity() + 1);
      prims_by_arity_[s->arity()].push_back(s);
    }
  }

  InductionResult run(const Atom& goal) {
    Pattern p;
    for (const Term& t : goal.args) {
      p.slots.emplace_back(t);
      p.group.push_back(-1);
    }
    auto top = solve(p, 0);
    for (const SubResult& r : *top) {
      Derivation d;
      d.top = result_.drafts[r.node].clause;
      d.top.head.pred = goal.pred;
      collect_defs(r.node, d.defs);
      d.defs.pop_back();  // the top node itself
      d.key = canonical_form(d.top.body, &d.top.head, render());
      d.unfolded_key = result_.drafts[r.node].unfolded_key;
      result_.derivations.push_back(std::move(d));
    }
    std::sort(result_.derivations.begin(), result_.derivations.end(), [](const Derivation& a, const Derivation& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a.key < b.key;
    });
    return std::move(result_);
  }

 private:
  PredRender render() const {
    return [this](Symbol p) { return draft_render(result_, p); };
  }

  void collect_defs(std::size_t node, std::vector<std::size_t>& out) const {
    if (std::find(out.begin(), out.end(), node) != out.end()) return;
    for (std::size_t c : result_.drafts[node].children) collect_defs(c, out);
    out.push_back(node);
  }

  std::shared_ptr<const SubResults> solve(const Pattern& p, int depth) {
    static const auto empty = std::make_shared<const SubResults>();
    if (depth > cfg_.max_depth) return empty;
    std::string key = p.key(depth);
    if (cfg_.use_cache) {
      if (auto it = memo_.find(key); it != memo_.end()) {
        ++result_.cache_hits;
        return it->second;
      }
    }
    ++result_.nodes_expanded;
    Collected found;
    for (std::size_t mi = 0; mi < cfg_.metarules.size(); ++mi) {
      const Metarule& m = cfg_.metarules[mi];
      if (m.head_arity() == p.slots.size()) expand(m, mi, p, depth, found);
    }
    // Merge explanations that inline to the same clause.
    auto smaller = [&](std::size_t a, std::size_t b) {
      const DraftDefinition& x = result_.drafts[a];
      const DraftDefinition& y = result_.drafts[b];
      if (x.size != y.size) return x.size < y.size;
      return x.key < y.key;
    };
    std::map<std::string, std::pair<std::size_t, std::set<std::vector<Term>>>> merged;
    for (auto& [node, tuples] : found) {
      auto [it, fresh] = merged.try_emplace(result_.drafts[node].unfolded_key, node, std::set<std::vector<Term>>());
      if (!fresh && smaller(node, it->second.first)) it->second.first = node;
      it->second.second.insert(tuples.begin(), tuples.end());
    }
    auto out = std::make_shared<SubResults>();
    for (auto& [ukey, entry] : merged) out->push_back({entry.first, {entry.second.begin(), entry.second.end()}});
    std::sort(out->begin(), out->end(), [&](const SubResult& a, const SubResult& b) { return smaller(a.node, b.node); });
    if (depth > 0 && cfg_.max_solutions_per_subgoal > 0 && out->size() > cfg_.max_solutions_per_subgoal) {
      out->resize(cfg_.max_solutions_per_subgoal);
    }
    if (cfg_.use_cache) memo_.emplace(std::move(key), out);
    return out;
  }

  struct Join {
    const Metarule* m;
    std::size_t mi;
    int depth;
    const Pattern* goal;
    std::vector<Slot> values;
    std::vector<Choice> choices;
    std::vector<bool> done;
    Collected* out;
  };

  void expand(const Metarule& m, std::size_t mi, const Pattern& p, int depth, Collected& out) {
    std::vector<Slot> values(m.vars.size());
    for (std::size_t i = 0; i < p.slots.size(); ++i) {
      std::size_t v = m.head.args[i];
      if (!p.slots[i]) continue;
      if (!m.var_sorts[v].empty() && m.var_sorts[v] != p.slots[i]->sort) return;
      if (values[v] && *values[v] != *p.slots[i]) return;
      values[v] = p.slots[i];
    }
    const bool may_invent =
        depth + 1 <= cfg_.max_depth && (m.body.size() > 1 || depth == 0 || cfg_.unit_abstractions);
    std::vector<std::vector<Choice>> options(m.body.size());
    for (std::size_t j = 0; j < m.body.size(); ++j) {
      const MetaAtom& lit = m.body[j];
      if (lit.args.size() < prims_by_arity_.size()) {
        for (const Signature* sig : prims_by_arity_[lit.args.size()]) {
          bool ok = true;
          for (std::size_t a = 0; a < lit.args.size() && ok; ++a) {
            std::size_t v = lit.args[a];
            if (values[v] && values[v]->sort != sig->arg_sorts[a]) ok = false;
            if (!m.var_sorts[v].empty() && m.var_sorts[v] != sig->arg_sorts[a]) ok = false;
          }
          if (ok) options[j].push_back({false, sig->pred, 0});
        }
      }
      if (may_invent) options[j].push_back({true, Symbol(), 0});
      if (options[j].empty()) return;
    }

    Join js{&m, mi, depth, &p, values, std::vector<Choice>(m.body.size()), std::vector<bool>(m.body.size(), false),
            &out};
    std::vector<std::size_t> pick(m.body.size(), 0);
    while (true) {
      for (std::size_t j = 0; j < m.body.size(); ++j) js.choices[j] = options[j][pick[j]];
      if (primitive_sorts_agree(m, js.choices, values)) {
        js.values = values;
        std::fill(js.done.begin(), js.done.end(), false);
        step(js);
      }
      std::size_t j = 0;
      while (j < pick.size() && ++pick[j] == options[j].size()) pick[j++] = 0;
      if (j == pick.size()) break;
    }
  }

  bool primitive_sorts_agree(const Metarule& m, const std::vector<Choice>& choices, const std::vector<Slot>&) const {
    std::vector<Symbol> want(m.vars.size());
    for (std::size_t j = 0; j < m.body.size(); ++j) {
      if (choices[j].invented) continue;
      const Signature* sig = kb_.signature(choices[j].pred);
      for (std::size_t a = 0; a < m.body[j].args.size(); ++a) {
        Symbol& w = want[m.body[j].args[a]];
        if (w.empty()) w = sig->arg_sorts[a];
        else if (w != sig->arg_sorts[a]) return false;
      }
    }
    return true;
  }

  std::vector<Slot> literal_slots(const Join& js, std::size_t j) const {
    std::vector<Slot> slots;
    for (std::size_t v : js.m->body[j].args) slots.push_back(js.values[v]);
    return slots;
  }

  // Binds the free variables of literal j to tuple; false on a clash.
  bool bind(Join& js, std::size_t j, std::span<const Term> tuple, std::vector<std::size_t>& newly) const {
    const MetaAtom& lit = js.m->body[j];
    for (std::size_t a = 0; a < lit.args.size(); ++a) {
      std::size_t v = lit.args[a];
      if (js.values[v]) {
        if (*js.values[v] != tuple[a]) return false;
        continue;
      }
      if (!js.m->var_sorts[v].empty() && js.m->var_sorts[v] != tuple[a].sort) return false;
      js.values[v] = tuple[a];
      newly.push_back(v);
    }
    return true;
  }

  void unbind(Join& js, const std::vector<std::size_t>& newly) const {
    for (std::size_t v : newly) js.values[v].reset();
  }

  void step(Join& js) {
    ++result_.nodes_expanded;
    const Metarule& m = *js.m;
    std::optional<std::size_t> next;
    for (std::size_t j = 0; j < m.body.size() && !next; ++j) {
      if (js.done[j] || js.choices[j].invented) continue;
      if (kb_.bounded(js.choices[j].pred, literal_slots(js, j))) next = j;
    }
    if (!next) {
      int best_bound = -1;
      for (std::size_t j = 0; j < m.body.size(); ++j) {
        if (js.done[j] || !js.choices[j].invented) continue;
        auto slots = literal_slots(js, j);
        int bound = static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const Slot& s) { return s.has_value(); }));
        if (bound > best_bound) {
          best_bound = bound;
          next = j;
        }
      }
    }
    if (!next) {
      if (std::all_of(js.done.begin(), js.done.end(), [](bool d) { return d; })) complete(js);
      // Otherwise only unbounded background literals remain: the branch
      // would have to enumerate the whole domain, so it is dropped.
      return;
    }
    std::size_t j = *next;
    js.done[j] = true;
    auto slots = literal_slots(js, j);
    if (!js.choices[j].invented) {
      std::vector<std::vector<Term>> answers;
      kb_.query(js.choices[j].pred, slots, context_, [&](std::span<const Term> t) { answers.emplace_back(t.begin(), t.end()); });
      for (const auto& t : answers) {
        std::vector<std::size_t> newly;
        if (bind(js, j, t, newly)) step(js);
        unbind(js, newly);
      }
    } else {
      Pattern sub;
      std::vector<std::size_t> free_vars;
      for (std::size_t v : m.body[j].args) {
        sub.slots.push_back(js.values[v]);
        if (js.values[v]) {
          sub.group.push_back(-1);
        } else {
          auto it = std::find(free_vars.begin(), free_vars.end(), v);
          sub.group.push_back(static_cast<int>(it - free_vars.begin()));
          if (it == free_vars.end()) free_vars.push_back(v);
        }
      }
      auto results = solve(sub, js.depth + 1);
      for (const SubResult& r : *results) {
        js.choices[j].node = r.node;
        for (const auto& t : r.tuples) {
          std::vector<std::size_t> newly;
          if (bind(js, j, t, newly)) step(js);
          unbind(js, newly);
        }
      }
      js.choices[j].node = 0;
    }
    js.done[j] = false;
  }

  void complete(Join& js) {
    const Pattern& p = *js.goal;
    std::vector<Term> head;
    for (std::size_t i = 0; i < p.slots.size(); ++i) head.push_back(*js.values[js.m->head.args[i]]);
    // Free goal slots that share a variable must agree.
    for (std::size_t i = 0; i < p.slots.size(); ++i) {
      for (std::size_t k = i + 1; k < p.slots.size(); ++k) {
        if (p.group[i] >= 0 && p.group[i] == p.group[k] && head[i] != head[k]) return;
      }
    }
    std::size_t node = intern(js);
    (*js.out)[node].insert(std::move(head));
  }

  std::size_t intern(const Join& js) {
    const Metarule& m = *js.m;
    auto var = [&](std::size_t v) { return Term::var(m.vars[v], js.values[v]->sort); };
    Clause c;
    c.provenance = Provenance::abstraction;
    c.head.pred = Symbol("$");
    for (std::size_t v : m.head.args) c.head.args.push_back(var(v));
    std::vector<std::size_t> children;
    for (std::size_t j = 0; j < m.body.size(); ++j) {
      Atom a;
      if (js.choices[j].invented) {
        a.pred = placeholder(js.choices[j].node);
        if (std::find(children.begin(), children.end(), js.choices[j].node) == children.end()) {
          children.push_back(js.choices[j].node);
        }
      } else {
        a.pred = js.choices[j].pred;
      }
      for (std::size_t v : m.body[j].args) a.args.push_back(var(v));
      // Bodies are sets; a repeated literal is kept once.
      if (std::find(c.body.begin(), c.body.end(), a) == c.body.end()) c.body.push_back(std::move(a));
    }
    std::string key = canonical_form(c.body, &c.head, render());
    if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
    std::size_t index = result_.drafts.size();
    c.head.pred = placeholder(index);
    DraftDefinition draft{normalize_variables(c), key, "", std::move(children), 1};
    std::vector<std::size_t> tree;
    for (std::size_t ch : draft.children) collect_defs(ch, tree);
    draft.size = 1 + tree.size();
    Clause flat = unfold(draft.clause, [this](Symbol pred) -> const Clause* {
      return is_placeholder(pred) ? &result_.drafts[placeholder_index(pred)].clause : nullptr;
    });
    flat.head.pred = Symbol("$");
    draft.unfolded_key = canonical_form(flat.body, &flat.head);
    result_.drafts.push_back(std::move(draft));
    by_key_.emplace(std::move(key), index);
    return index;
  }

  const State& context_;
  const BackgroundKB& kb_;
  const EngineConfig& cfg_;
  std::vector<std::vector<const Signature*>> prims_by_arity_;
  InductionResult result_;
  std::unordered_map<std::string, std::size_t> by_key_;
  std::unordered_map<std::string, std::shared_ptr<const SubResults>> memo_;
};

}  // namespace

std::string draft_render(const InductionResult& r, Symbol pred) {
  if (!is_placeholder(pred)) return pred.str();
  return "#" + hex64(fnv1a(r.drafts[placeholder_index(pred)].key));
}

InductionResult metarule_induction(const Atom& goal, const State& context, const BackgroundKB& kb,
                                   const EngineConfig& cfg) {
  if (!goal.is_ground()) throw std::invalid_argument("metarule_induction expects a ground goal: " + to_string(goal));
  Engine engine(context, kb, cfg);
  return engine.run(goal);
}

Clause normalize_variables(const Clause& c) {
  std::map<Symbol, Symbol> rename;
  auto name_for = [&](std::size_t i) {
    std::string s;
    do {
      s.insert(s.begin(), static_cast<char>('A' + i % 26));
      i /= 26;
    } while (i-- > 0);
    return Symbol(s);
  };
  auto visit = [&](Atom& a) {
    for (Term& t : a.args) {
      if (!t.is_var()) continue;
      auto [it, fresh] = rename.emplace(t.name, Symbol());
      if (fresh) it->second = name_for(rename.size() - 1);
      t.name = it->second;
    }
  };
  Clause out = c;
  visit(out.head);
  for (Atom& b : out.body) visit(b);
  return out;
}

Clause materialize(const InductionResult& r, const Derivation& d, PredicateRegistry& registry, int step,
                   std::vector<Symbol>* minted) {
  std::map<std::size_t, Symbol> names;
  auto resolve = [&](std::vector<Atom> body) {
    for (Atom& a : body) {
      if (is_placeholder(a.pred)) a.pred = names.at(placeholder_index(a.pred));
    }
    return body;
  };
  for (std::size_t idx : d.defs) {
    const DraftDefinition& draft = r.drafts[idx];
    bool created = false;
    Symbol s = registry.reuse_or_register(draft.clause.head.args, resolve(draft.clause.body), step, &created);
    if (created && minted) minted->push_back(s);
    names[idx] = s;
  }
  Clause top = d.top;
  top.body = resolve(top.body);
  top.origin_step = step;
  return top;
}

}  // namespace mil
