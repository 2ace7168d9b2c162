#include "mil/learner.hpp"

namespace mil {

OnlineLearner::OnlineLearner(const BackgroundKB& kb, EngineConfig cfg) : kb_(&kb), cfg_(std::move(cfg)) {}

Prediction OnlineLearner::predict(const State& state, const Atom& action) const {
  return mil::predict(h_, state, action, *kb_);
}

StepReport OnlineLearner::observe_transition(const State& prev, const Atom& action, const State& next) {
  StepReport report;
  report.t = t_++;
  Prediction p = predict(prev, action);
  report.errors = error_signals(p, prev, next);
  const ErrorSignals& e = report.errors;

  for (auto [trace, set] : {std::pair{&p.add_trace, &h_.rules(Provenance::dynamics)},
                            std::pair{&p.del_trace, &h_.rules(Provenance::constraint)}}) {
    for (const auto& [atom, keys] : *trace) {
      for (const std::string& k : keys) {
        if (auto it = set->find(k); it != set->end()) ++it->second.stats.times_fired;
      }
    }
  }

  std::size_t abs_before = h_.abs_size();
  // Rules absorbed by a falsified rule are reinstated and the transition is
  // checked again, until nothing is falsified.
  ErrorSignals current = e;
  Prediction current_p = std::move(p);
  while (!current.fp_add.empty() || !current.fp_rem.empty()) {
    std::vector<Atom> fp_add(current.fp_add.begin(), current.fp_add.end());
    std::vector<Atom> fp_rem(current.fp_rem.begin(), current.fp_rem.end());
    auto s1 = specialize(h_, fp_add, current_p.add_trace, Provenance::dynamics);
    auto s2 = specialize(h_, fp_rem, current_p.del_trace, Provenance::constraint);
    report.pruned.dyn += s1.rules_pruned;
    report.pruned.con += s2.rules_pruned;
    report.falsified_keys.insert(report.falsified_keys.end(), s1.pruned_keys.begin(), s1.pruned_keys.end());
    report.falsified_keys.insert(report.falsified_keys.end(), s2.pruned_keys.begin(), s2.pruned_keys.end());
    std::size_t restored = 0;
    for (auto [keys, prov] : {std::pair{&s1.pruned_keys, Provenance::dynamics}, std::pair{&s2.pruned_keys, Provenance::constraint}}) {
      for (const std::string& k : *keys) {
        std::size_t n = h_.unpark(prov, k).size();
        (prov == Provenance::dynamics ? report.added.dyn : report.added.con) += n;
        restored += n;
      }
    }
    if (restored == 0) break;
    current_p = predict(prev, action);
    current = error_signals(current_p, prev, next);
  }

  // Every surviving rule took part in this prediction without being blamed.
  for (Provenance prov : {Provenance::dynamics, Provenance::constraint}) {
    for (auto& [k, rule] : h_.rules(prov)) {
      if (rule.clause.origin_step < report.t) ++rule.stats.times_verified;
    }
  }

  State context = prev;
  context.insert(action);
  for (auto [atoms, target] :
       {std::pair{&current.fn_add, Provenance::dynamics}, std::pair{&current.fn_rem, Provenance::constraint}}) {
    if (atoms->empty()) continue;
    std::vector<Atom> goals(atoms->begin(), atoms->end());
    GeneralizeReport g = generalize(h_, goals, target, context, *kb_, cfg_, report.t);
    (target == Provenance::dynamics ? report.added.dyn : report.added.con) += g.rules_added;
    report.induction_nodes += g.nodes_expanded;
    report.inexpressible.insert(report.inexpressible.end(), g.inexpressible.begin(), g.inexpressible.end());
  }
  report.added.abs = h_.abs_size() - abs_before;

  CompressReport c = compress_gc(h_);
  report.pruned.dyn += c.dyn_removed;
  report.pruned.con += c.con_removed;
  report.pruned.abs += c.abs_removed;
  report.model_size = {h_.abs_size(), h_.dyn_size(), h_.con_size()};
  return report;
}

}  // namespace mil
