#pragma once

// Predict, verify, refine: one call per observed transition.

#include <cstdint>
#include <vector>

#include "mil/background.hpp"
#include "mil/hypothesis.hpp"
#include "mil/induction.hpp"
#include "mil/world_model.hpp"

namespace mil {

struct ProvenanceCounts {
  std::size_t abs = 0;
  std::size_t dyn = 0;
  std::size_t con = 0;
  std::size_t total() const { return abs + dyn + con; }
};

struct StepReport {
  int t = 0;
  ErrorSignals errors;
  ProvenanceCounts added;
  // Rules removed by falsification plus rules and abstractions dropped by
  // compression and garbage collection.
  ProvenanceCounts pruned;
  ProvenanceCounts model_size;
  std::uint64_t induction_nodes = 0;
  std::vector<Atom> inexpressible;
  std::vector<std::string> falsified_keys;  // rules removed because they predicted a false positive
};

class OnlineLearner {
 public:
  OnlineLearner(const BackgroundKB& kb, EngineConfig cfg = {});

  // Predict, compute errors, prune rules behind false positives, induce
  // rules for false negatives, then compress and collect garbage.
  StepReport observe_transition(const State& prev, const Atom& action, const State& next);

  Prediction predict(const State& state, const Atom& action) const;

  const Hypothesis& hypothesis() const { return h_; }
  Hypothesis& hypothesis() { return h_; }
  void set_hypothesis(Hypothesis h) { h_ = std::move(h); }
  // Swaps the background (e.g. a different map with the same vocabulary).
  void set_kb(const BackgroundKB& kb) { kb_ = &kb; }
  const BackgroundKB& kb() const { return *kb_; }
  const EngineConfig& config() const { return cfg_; }
  int steps() const { return t_; }

 private:
  const BackgroundKB* kb_;
  EngineConfig cfg_;
  Hypothesis h_;
  int t_ = 0;
};

}  // namespace mil
