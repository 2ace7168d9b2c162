#pragma once

// Forward prediction with a learned program and the error signals that drive
// its repair.

#include <cstdint>

#include "mil/background.hpp"
#include "mil/hypothesis.hpp"

namespace mil {

struct Prediction {
  State adds;
  State dels;
  FiringTrace add_trace;  // atom -> dynamics rules that derived it
  FiringTrace del_trace;  // atom -> constraint rules that derived it
  std::uint64_t calls = 0;  // literal evaluations, a cost measure
};

// Evaluates every dynamics and constraint rule against state plus the action
// plus the background, resolving invented predicates goal-directed through
// their definitions. Throws std::logic_error on a cycle among abstractions.
Prediction predict(const Hypothesis& h, const State& state, const Atom& action, const BackgroundKB& kb);

// (state \ dels) U adds.
State step_model(const State& state, const Prediction& p);

struct ErrorSignals {
  State fp_add;
  State fn_add;
  State fp_rem;
  State fn_rem;

  std::size_t total() const { return fp_add.size() + fn_add.size() + fp_rem.size() + fn_rem.size(); }
  bool empty() const { return total() == 0; }
};

// With E+ = next \ prev and E- = prev \ next: fp_add = adds \ E+,
// fn_add = E+ \ adds, fp_rem = dels \ E-, fn_rem = E- \ dels. Atoms that did
// not change are never inspected.
ErrorSignals error_signals(const Prediction& p, const State& prev, const State& next);

// All answers of a conjunctive query (variables bound in order of first
// occurrence) against state plus background, with invented predicates
// resolved through h. Exposed for tests and tools.
std::vector<Substitution> solve_query(const Hypothesis& h, std::span<const Atom> body, const State& context,
                                      const BackgroundKB& kb);

}  // namespace mil
