#include "mil/world_model.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace mil {

namespace {

using Env = std::map<Symbol, Term>;
using Tuples = std::vector<std::vector<Term>>;

class Prover {
 public:
  Prover(const Hypothesis& h, const State& context, const BackgroundKB& kb) : h_(h), context_(context), kb_(kb) {}

  std::uint64_t calls() const { return calls_; }

  void solve(std::span<const Atom> body, Env& env, const std::function<void(const Env&)>& yield) {
    std::vector<bool> done(body.size(), false);
    conj(body, done, env, yield);
  }

 private:
  std::vector<Slot> slots_of(const Atom& a, const Env& env) const {
    std::vector<Slot> slots;
    for (const Term& t : a.args) {
      if (!t.is_var()) {
        slots.emplace_back(t);
      } else if (auto it = env.find(t.name); it != env.end()) {
        slots.emplace_back(it->second);
      } else {
        slots.emplace_back(std::nullopt);
      }
    }
    return slots;
  }

  // Higher is cheaper to evaluate next.
  int score(const Atom& a, const std::vector<Slot>& slots) const {
    if (h_.registry().contains(a.pred)) {
      return std::any_of(slots.begin(), slots.end(), [](const Slot& s) { return s.has_value(); }) ? 2 : 1;
    }
    const Signature* sig = kb_.signature(a.pred);
    if (sig && sig->source != PredicateSource::background) return 3;
    return kb_.bounded(a.pred, slots) ? 3 : 0;
  }

  void conj(std::span<const Atom> body, std::vector<bool>& done, Env& env,
            const std::function<void(const Env&)>& yield) {
    std::size_t best = body.size();
    int best_score = -1;
    std::vector<Slot> best_slots;
    for (std::size_t j = 0; j < body.size(); ++j) {
      if (done[j]) continue;
      auto slots = slots_of(body[j], env);
      int s = score(body[j], slots);
      if (s > best_score) {
        best_score = s;
        best = j;
        best_slots = std::move(slots);
      }
    }
    if (best == body.size()) {
      yield(env);
      return;
    }
    const Atom& lit = body[best];
    ++calls_;
    Tuples answers;
    if (h_.registry().contains(lit.pred)) {
      answers = table(lit.pred, best_slots);
    } else {
      kb_.query(lit.pred, best_slots, context_, [&](std::span<const Term> t) { answers.emplace_back(t.begin(), t.end()); });
    }
    done[best] = true;
    for (const auto& tuple : answers) {
      std::vector<Symbol> newly;
      bool ok = true;
      for (std::size_t a = 0; a < lit.args.size() && ok; ++a) {
        const Term& t = lit.args[a];
        if (!t.is_var()) {
          ok = t == tuple[a];
          continue;
        }
        auto [it, fresh] = env.emplace(t.name, tuple[a]);
        if (fresh) newly.push_back(t.name);
        else ok = it->second == tuple[a];
      }
      if (ok) conj(body, done, env, yield);
      for (Symbol v : newly) env.erase(v);
    }
    done[best] = false;
  }

  const Tuples& table(Symbol pred, const std::vector<Slot>& slots) {
    std::string key = pred.str();
    for (const Slot& s : slots) {
      key += ',';
      key += s ? s->name.str() : "?";
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (!active_.insert(pred).second) throw std::logic_error("cycle among abstractions through " + pred.str());
    const Clause& def = h_.registry().find(pred)->definition;
    Env env;
    bool consistent = true;
    for (std::size_t i = 0; i < slots.size() && consistent; ++i) {
      if (!slots[i]) continue;
      const Term& t = def.head.args[i];
      if (!t.is_var()) {
        consistent = t == *slots[i];
        continue;
      }
      auto [it, fresh] = env.emplace(t.name, *slots[i]);
      if (!fresh) consistent = it->second == *slots[i];
    }
    std::set<std::vector<Term>> found;
    if (consistent) {
      solve(def.body, env, [&](const Env& e) {
        std::vector<Term> tuple;
        for (const Term& t : def.head.args) {
          if (!t.is_var()) {
            tuple.push_back(t);
            continue;
          }
          auto it = e.find(t.name);
          if (it == e.end()) throw std::logic_error("head variable not bound by body in " + to_string(def));
          tuple.push_back(it->second);
        }
        found.insert(std::move(tuple));
      });
    }
    active_.erase(pred);
    return memo_.emplace(std::move(key), Tuples(found.begin(), found.end())).first->second;
  }

  const Hypothesis& h_;
  const State& context_;
  const BackgroundKB& kb_;
  std::unordered_map<std::string, Tuples> memo_;
  std::set<Symbol> active_;
  std::uint64_t calls_ = 0;
};

Atom ground_head(const Clause& c, const Env& env) {
  Atom head = c.head;
  for (Term& t : head.args) {
    if (!t.is_var()) continue;
    auto it = env.find(t.name);
    if (it == env.end()) throw std::logic_error("rule is not range restricted: " + to_string(c));
    t = it->second;
  }
  return head;
}

}  // namespace

Prediction predict(const Hypothesis& h, const State& state, const Atom& action, const BackgroundKB& kb) {
  State context = state;
  context.insert(action);
  Prover prover(h, context, kb);
  Prediction p;
  for (Provenance prov : {Provenance::dynamics, Provenance::constraint}) {
    State& out = prov == Provenance::dynamics ? p.adds : p.dels;
    FiringTrace& trace = prov == Provenance::dynamics ? p.add_trace : p.del_trace;
    for (const auto& [key, rule] : h.rules(prov)) {
      Env env;
      prover.solve(rule.clause.body, env, [&](const Env& e) {
        Atom head = ground_head(rule.clause, e);
        trace[head].insert(key);
        out.insert(std::move(head));
      });
    }
  }
  p.calls = prover.calls();
  return p;
}

State step_model(const State& state, const Prediction& p) {
  State next;
  for (const Atom& a : state) {
    if (!p.dels.count(a)) next.insert(a);
  }
  next.insert(p.adds.begin(), p.adds.end());
  return next;
}

namespace {

State difference(const State& a, const State& b) {
  State out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

ErrorSignals error_signals(const Prediction& p, const State& prev, const State& next) {
  State e_plus = difference(next, prev);
  State e_minus = difference(prev, next);
  ErrorSignals e;
  e.fp_add = difference(p.adds, e_plus);
  e.fn_add = difference(e_plus, p.adds);
  e.fp_rem = difference(p.dels, e_minus);
  e.fn_rem = difference(e_minus, p.dels);
  return e;
}

std::vector<Substitution> solve_query(const Hypothesis& h, std::span<const Atom> body, const State& context,
                                      const BackgroundKB& kb) {
  Prover prover(h, context, kb);
  std::vector<Substitution> out;
  Env env;
  prover.solve(body, env, [&](const Env& e) {
    Substitution s;
    for (const Atom& a : body) {
      for (const Term& t : a.args) {
        if (t.is_var() && !s.find(t.name)) s.bind(t, e.at(t.name));
      }
    }
    out.push_back(std::move(s));
  });
  return out;
}

}  // namespace mil
