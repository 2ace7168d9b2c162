// Command line front end: run, replay, transfer, bench-scale, dump-program.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mil/harness.hpp"

using namespace mil;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool parse_size(const std::string& text, int& w, int& h) {
  return std::sscanf(text.c_str(), "%dx%d", &w, &h) == 2 && w > 0 && h > 0;
}

void add_common(CLI::App* app, ExperimentConfig& cfg, std::string& gen) {
  app->add_option("--map", cfg.map_file, "Map file (# . L G @)");
  app->add_option("--gen", gen, "Generate a lava map of WxH cells instead of reading one");
  app->add_option("--episodes", cfg.episodes, "Episodes to run")->check(CLI::NonNegativeNumber);
  app->add_option("--d-max", cfg.d_max, "Maximum abstraction depth")->check(CLI::PositiveNumber);
  app->add_option("--metarules", cfg.metarules_file, "Metarule file");
  app->add_option("--domain", cfg.domain_file, "Domain declaration file");
  app->add_option("--seed", cfg.seed, "Random seed");
  app->add_option("--out-dir", cfg.out_dir, "Directory for CSVs, dumps and summary");
  app->add_option("--step-penalty", cfg.env.step_penalty, "Reward penalty per step");
  app->add_option("--step-cap", cfg.env.step_cap, "Steps per episode before truncation")->check(CLI::PositiveNumber);
  app->add_option("--solution-cap", cfg.solution_cap, "New rules per unexplained atom (0 = all)");
  app->add_option("--subgoal-cap", cfg.subgoal_cap, "Explanations kept per invented sub-goal (0 = all)");
}

void apply_gen(ExperimentConfig& cfg, const std::string& gen) {
  if (gen.empty()) return;
  if (!parse_size(gen, cfg.gen_width, cfg.gen_height)) throw CLI::ValidationError("--gen", "expected WxH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online world-model learning by metarule-guided abduction"};
  app.require_subcommand(1);

  ExperimentConfig run_cfg;
  std::string run_gen;
  std::string policy = "plan";
  auto* run = app.add_subcommand("run", "Run episodes with the online learner");
  add_common(run, run_cfg, run_gen);
  run->add_option("--policy", policy, "plan (planner with exploration fallback) or explore")
      ->check(CLI::IsMember({"plan", "explore"}));

  ExperimentConfig replay_cfg;
  std::string replay_gen;
  std::string trajectory_file;
  auto* replay_cmd = app.add_subcommand("replay", "Feed a trajectory file through a fresh learner");
  add_common(replay_cmd, replay_cfg, replay_gen);
  replay_cmd->add_option("--trajectory", trajectory_file, "Trajectory file (atoms | action | atoms)")->required();

  ExperimentConfig transfer_cfg;
  std::string transfer_gen;
  auto* transfer = app.add_subcommand("transfer", "Evaluate a dumped program on another map");
  add_common(transfer, transfer_cfg, transfer_gen);
  transfer->add_option("--program", transfer_cfg.program_file, "Program dump to start from")->required();
  transfer_cfg.episodes = 1;

  ExperimentConfig bench_cfg;
  std::string bench_gen;
  std::string scale = "100x100";
  auto* bench = app.add_subcommand("bench-scale", "Compare learning cost on a map and on the same map embedded in a larger grid");
  add_common(bench, bench_cfg, bench_gen);
  bench->add_option("--scale", scale, "Size of the larger grid, WxH");
  bench_cfg.episodes = 3;

  std::string dump_file;
  std::string dump_domain;
  auto* dump = app.add_subcommand("dump-program", "Parse a program dump and print it in canonical order");
  dump->add_option("--program", dump_file, "Program dump")->required();
  dump->add_option("--domain", dump_domain, "Domain declaration file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      apply_gen(run_cfg, run_gen);
      run_cfg.policy = policy == "explore" ? Policy::explore : Policy::plan;
      ExperimentResult r = run_experiment(run_cfg);
      std::cout << summary_text(r);
    } else if (*replay_cmd) {
      apply_gen(replay_cfg, replay_gen);
      GridMap map = load_map(replay_cfg);
      BackgroundKB kb = make_kb(replay_cfg, map);
      OnlineLearner learner(kb, engine_config(replay_cfg));
      auto reports = replay(learner, parse_trajectory(slurp(trajectory_file), kb));
      ExperimentResult r;
      for (const StepReport& x : reports) r.steps.push_back({0, x, 0.0, {}, {}, {}});
      r.hypothesis = learner.hypothesis();
      std::cout << steps_csv(r);
      if (!replay_cfg.out_dir.empty()) {
        std::ofstream(replay_cfg.out_dir + "/program.pl") << dump_program(r.hypothesis);
      }
    } else if (*transfer) {
      apply_gen(transfer_cfg, transfer_gen);
      ExperimentResult r = run_experiment(transfer_cfg);
      std::size_t added = 0, pruned = 0;
      for (const StepRecord& s : r.steps) {
        added += s.report.added.total();
        pruned += s.report.pruned.total();
      }
      std::cout << summary_text(r) << "clauses_added: " << added << "\nclauses_pruned: " << pruned << '\n';
    } else if (*bench) {
      apply_gen(bench_cfg, bench_gen);
      ExperimentConfig large = bench_cfg;
      if (!parse_size(scale, large.embed_width, large.embed_height)) throw CLI::ValidationError("--scale", "expected WxH");
      std::cout << scale_report_text(benchmark_scaling(bench_cfg, large));
    } else if (*dump) {
      ExperimentConfig cfg;
      cfg.domain_file = dump_domain;
      GridMap map = generate_lava_map(10, 10);
      BackgroundKB kb = make_kb(cfg, map);
      std::cout << dump_program(load_program(slurp(dump_file), kb));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
