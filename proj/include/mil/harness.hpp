#pragma once

// Experiment driver: environment -> learner -> planner, with CSV logging.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mil/gridworld.hpp"
#include "mil/hypothesis.hpp"
#include "mil/induction.hpp"
#include "mil/learner.hpp"

namespace mil {

enum class Policy { plan, explore };

struct ExperimentConfig {
  std::string map_file;  // empty: generated lava map of gen_width x gen_height
  int gen_width = 10;
  int gen_height = 10;
  // When positive, the map is embedded into a larger grid (see embed_map).
  int embed_width = 0;
  int embed_height = 0;
  int episodes = 120;
  int d_max = 4;
  std::string metarules_file;  // empty: default metarules
  std::string domain_file;     // empty: default gridworld vocabulary
  std::size_t solution_cap = 64;
  std::size_t subgoal_cap = 8;
  EnvConfig env;
  std::uint64_t seed = 1;
  Policy policy = Policy::plan;
  std::size_t plan_budget = 200000;
  std::string program_file;  // start from a dumped program instead of the empty one
  bool learn = true;
  std::string out_dir;  // empty: nothing written
};

struct StepRecord {
  int episode = 0;
  StepReport report;
  double seconds = 0.0;  // wall-clock of observe_transition
  State prev;
  Atom action;
  State next;
};

struct EpisodeRecord {
  int episode = 0;
  double reward = 0.0;
  bool success = false;
  bool died = false;
  int steps = 0;
  bool planned = false;  // a plan was found at some point during the episode
};

struct ExperimentResult {
  std::vector<StepRecord> steps;
  std::vector<EpisodeRecord> episodes;
  Hypothesis hypothesis;
  std::optional<int> first_success;  // 1-based episode
  int convergence_step = 0;          // first t after which errors are zero and the model size is constant
};

GridMap load_map(const ExperimentConfig& cfg);
EngineConfig engine_config(const ExperimentConfig& cfg);
BackgroundKB make_kb(const ExperimentConfig& cfg, const GridMap& map);

// Runs cfg.episodes episodes. Writes steps.csv, episodes.csv,
// trajectory.txt, program.pl and summary.txt when cfg.out_dir is set;
// throws std::runtime_error up front if that directory is not writable.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string steps_csv(const ExperimentResult& r);
std::string episodes_csv(const ExperimentResult& r);
std::string summary_text(const ExperimentResult& r);
std::string trajectory_text(const ExperimentResult& r);

struct Transition {
  State prev;
  Atom action;
  State next;
};

// One `atoms | action | atoms` transition per line; `%` starts a comment.
std::vector<Transition> parse_trajectory(std::string_view text, const BackgroundKB& kb);
std::string format_transition(const Transition& t);
std::vector<StepReport> replay(OnlineLearner& learner, const std::vector<Transition>& trajectory);

// The pattern map copied into the top-left corner of a width x height map
// whose other cells are floor inside boundary walls.
GridMap embed_map(const GridMap& pattern, int width, int height);

struct ScaleSample {
  int t = 0;
  std::uint64_t small_nodes = 0;
  std::uint64_t large_nodes = 0;
  double small_seconds = 0.0;
  double large_seconds = 0.0;
};

struct ScaleReport {
  std::vector<ScaleSample> samples;  // one per step with a generalization in either run
  bool same_trajectory = false;
  double node_ratio = 0.0;   // large / small, summed over samples
  double time_ratio = 0.0;   // large / small, summed over samples
};

// Runs the same experiment on `small` and on `large`, pairing the
// generalization events step by step.
ScaleReport benchmark_scaling(const ExperimentConfig& small, const ExperimentConfig& large);
std::string scale_report_text(const ScaleReport& r);

}  // namespace mil
