#include "mil/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "mil/planner.hpp"
#include "mil/world_model.hpp"

namespace mil {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto probe = std::filesystem::path(dir) / ".write_test";
  std::ofstream out(probe);
  if (!out) throw std::runtime_error("output directory is not writable: " + dir);
  out.close();
  std::filesystem::remove(probe, ec);
}

std::string atoms_text(const State& s) {
  std::string out;
  for (const Atom& a : s) {
    if (!out.empty()) out += ", ";
    out += to_string(a);
  }
  return out;
}

}  // namespace

GridMap load_map(const ExperimentConfig& cfg) {
  GridMap map = cfg.map_file.empty() ? generate_lava_map(cfg.gen_width, cfg.gen_height)
                                     : parse_map(read_file(cfg.map_file));
  if (cfg.embed_width > 0 || cfg.embed_height > 0) {
    map = embed_map(map, std::max(cfg.embed_width, map.width()), std::max(cfg.embed_height, map.height()));
  }
  return map;
}

EngineConfig engine_config(const ExperimentConfig& cfg) {
  EngineConfig e;
  e.max_depth = cfg.d_max;
  if (!cfg.metarules_file.empty()) e.metarules = parse_metarules(read_file(cfg.metarules_file));
  e.max_solutions_per_goal = cfg.solution_cap;
  e.max_solutions_per_subgoal = cfg.subgoal_cap;
  return e;
}

BackgroundKB make_kb(const ExperimentConfig& cfg, const GridMap& map) {
  std::string domain = cfg.domain_file.empty() ? std::string() : read_file(cfg.domain_file);
  return make_grid_kb(map.grid, domain);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.episodes < 0) throw std::invalid_argument("episodes must not be negative");
  if (cfg.d_max < 1) throw std::invalid_argument("d-max must be at least 1");
  if (!cfg.out_dir.empty()) prepare_out_dir(cfg.out_dir);

  GridMap map = load_map(cfg);
  BackgroundKB kb = make_kb(cfg, map);
  OnlineLearner learner(kb, engine_config(cfg));
  if (!cfg.program_file.empty()) learner.set_hypothesis(load_program(read_file(cfg.program_file), kb));
  GoalTest goal_test = agent_on_goal(kb);
  std::mt19937_64 rng(cfg.seed);
  ExplorationMemory memory;

  ExperimentResult result;
  const Hypothesis& h0 = learner.hypothesis();
  ProvenanceCounts last{h0.abs_size(), h0.dyn_size(), h0.con_size()};
  for (int ep = 1; ep <= cfg.episodes; ++ep) {
    EnvState env = env_reset(map);
    EpisodeRecord rec;
    rec.episode = ep;
    std::optional<Plan> current;
    std::size_t next_action = 0;
    while (!env.done) {
      State s = state_atoms(env);
      ++memory.visits[s];
      if (cfg.policy == Policy::plan && !current) {
        current = plan(learner.hypothesis(), s, goal_test, kb, cfg.plan_budget);
        next_action = 0;
        if (current) rec.planned = true;
        if (current && current->actions.empty()) current.reset();
      }
      Direction d = current ? current->actions[next_action] : explore(learner.hypothesis(), s, kb, memory, rng);
      memory.tried.insert({s, d});
      StepOutcome out = env_step(env, map, d, cfg.env);
      State s_next = state_atoms(out.state);
      StepRecord step;
      step.episode = ep;
      step.prev = s;
      step.action = move_atom(d);
      step.next = s_next;
      if (cfg.learn) {
        auto t0 = std::chrono::steady_clock::now();
        step.report = learner.observe_transition(s, step.action, s_next);
        step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      } else {
        Prediction p = learner.predict(s, step.action);
        step.report.t = static_cast<int>(result.steps.size());
        step.report.errors = error_signals(p, s, s_next);
        const Hypothesis& h = learner.hypothesis();
        step.report.model_size = {h.abs_size(), h.dyn_size(), h.con_size()};
      }
      if (current) {
        bool on_track = current->predicted_states[next_action + 1] == s_next;
        ++next_action;
        if (!on_track || !step.report.errors.empty() || next_action == current->actions.size()) current.reset();
      }
      result.steps.push_back(std::move(step));
      env = out.state;
      rec.reward += out.reward;
      if (out.reached_goal) rec.success = true;
    }
    rec.died = !env.alive;
    rec.steps = env.steps;
    if (rec.success && !result.first_success) result.first_success = ep;
    result.episodes.push_back(rec);
  }

  for (const StepRecord& s : result.steps) {
    const StepReport& r = s.report;
    bool changed = r.model_size.abs != last.abs || r.model_size.dyn != last.dyn || r.model_size.con != last.con;
    if (!r.errors.empty() || changed) result.convergence_step = r.t + 1;
    last = r.model_size;
  }
  result.hypothesis = learner.hypothesis();

  if (!cfg.out_dir.empty()) {
    std::filesystem::path dir(cfg.out_dir);
    write_file(dir / "steps.csv", steps_csv(result));
    write_file(dir / "episodes.csv", episodes_csv(result));
    write_file(dir / "trajectory.txt", trajectory_text(result));
    write_file(dir / "program.pl", dump_program(result.hypothesis));
    write_file(dir / "summary.txt", summary_text(result));
  }
  return result;
}

std::string steps_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "t,episode,abstractions,dynamics,constraints,fp_add,fn_add,fp_rem,fn_rem,clauses_added,clauses_pruned,"
        "induction_nodes\n";
  for (const StepRecord& s : r.steps) {
    const StepReport& x = s.report;
    os << x.t << ',' << s.episode << ',' << x.model_size.abs << ',' << x.model_size.dyn << ',' << x.model_size.con
       << ',' << x.errors.fp_add.size() << ',' << x.errors.fn_add.size() << ',' << x.errors.fp_rem.size() << ','
       << x.errors.fn_rem.size() << ',' << x.added.total() << ',' << x.pruned.total() << ',' << x.induction_nodes
       << '\n';
  }
  return os.str();
}

std::string episodes_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "episode,reward,success,steps,planned\n";
  for (const EpisodeRecord& e : r.episodes) {
    os << e.episode << ',' << std::fixed << std::setprecision(4) << e.reward << ',' << (e.success ? 1 : 0) << ','
       << e.steps << ',' << (e.planned ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string summary_text(const ExperimentResult& r) {
  std::size_t successes = 0;
  for (const EpisodeRecord& e : r.episodes) successes += e.success ? 1 : 0;
  std::ostringstream os;
  os << "episodes: " << r.episodes.size() << '\n';
  os << "steps: " << r.steps.size() << '\n';
  os << "first_success_episode: " << (r.first_success ? std::to_string(*r.first_success) : "none") << '\n';
  os << "successes: " << successes << '\n';
  os << "convergence_step: " << r.convergence_step << '\n';
  os << "abstractions: " << r.hypothesis.abs_size() << '\n';
  os << "dynamics: " << r.hypothesis.dyn_size() << '\n';
  os << "constraints: " << r.hypothesis.con_size() << '\n';
  return os.str();
}

std::string format_transition(const Transition& t) {
  return atoms_text(t.prev) + " | " + to_string(t.action) + " | " + atoms_text(t.next);
}

std::string trajectory_text(const ExperimentResult& r) {
  std::string out;
  for (const StepRecord& s : r.steps) out += format_transition({s.prev, s.action, s.next}) + '\n';
  return out;
}

std::vector<Transition> parse_trajectory(std::string_view text, const BackgroundKB& kb) {
  SortLookup lookup = kb.sort_lookup();
  auto atoms = [&](std::string_view part) {
    State s;
    for (Atom a : parse_atom_list(part)) {
      assign_sorts(a, lookup);
      s.insert(std::move(a));
    }
    return s;
  };
  std::vector<Transition> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto c = line.find('%'); c != std::string::npos) line.erase(c);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t a = line.find('|');
    std::size_t b = a == std::string::npos ? a : line.find('|', a + 1);
    if (b == std::string::npos) throw ParseError("trajectory line " + std::to_string(number) + ": expected two '|'");
    Transition t;
    t.prev = atoms(std::string_view(line).substr(0, a));
    Atom action = parse_atom(std::string_view(line).substr(a + 1, b - a - 1));
    assign_sorts(action, lookup);
    t.action = std::move(action);
    t.next = atoms(std::string_view(line).substr(b + 1));
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<StepReport> replay(OnlineLearner& learner, const std::vector<Transition>& trajectory) {
  std::vector<StepReport> out;
  for (const Transition& t : trajectory) out.push_back(learner.observe_transition(t.prev, t.action, t.next));
  return out;
}

GridMap embed_map(const GridMap& pattern, int width, int height) {
  GridMap map = pattern;
  map.grid.width = width;
  map.grid.height = height;
  map.grid.cells.assign(static_cast<std::size_t>(width) * height, Terrain::floor);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Terrain t = Terrain::floor;
      if (pattern.grid.contains({x, y})) t = pattern.at({x, y});
      else if (x == 0 || y == 0 || x == width - 1 || y == height - 1) t = Terrain::wall;
      map.grid.cells[static_cast<std::size_t>(y) * width + x] = t;
    }
  }
  return map;
}

ScaleReport benchmark_scaling(const ExperimentConfig& small, const ExperimentConfig& large) {
  ExperimentConfig a = small;
  ExperimentConfig b = large;
  a.out_dir.clear();
  b.out_dir.clear();
  ExperimentResult rs = run_experiment(a);
  ExperimentResult rl = run_experiment(b);
  ScaleReport report;
  report.same_trajectory = rs.steps.size() == rl.steps.size();
  for (std::size_t i = 0; report.same_trajectory && i < rs.steps.size(); ++i) {
    report.same_trajectory = rs.steps[i].prev == rl.steps[i].prev && rs.steps[i].action == rl.steps[i].action &&
                             rs.steps[i].next == rl.steps[i].next;
  }
  double ns = 0, nl = 0, ts = 0, tl = 0;
  for (std::size_t i = 0; i < std::min(rs.steps.size(), rl.steps.size()); ++i) {
    const StepRecord& x = rs.steps[i];
    const StepRecord& y = rl.steps[i];
    if (x.report.induction_nodes == 0 && y.report.induction_nodes == 0) continue;
    report.samples.push_back({x.report.t, x.report.induction_nodes, y.report.induction_nodes, x.seconds, y.seconds});
    ns += static_cast<double>(x.report.induction_nodes);
    nl += static_cast<double>(y.report.induction_nodes);
    ts += x.seconds;
    tl += y.seconds;
  }
  report.node_ratio = ns > 0 ? nl / ns : 0.0;
  report.time_ratio = ts > 0 ? tl / ts : 0.0;
  return report;
}

std::string scale_report_text(const ScaleReport& r) {
  std::ostringstream os;
  os << "t,small_nodes,large_nodes,small_seconds,large_seconds\n";
  for (const ScaleSample& s : r.samples) {
    os << s.t << ',' << s.small_nodes << ',' << s.large_nodes << ',' << std::setprecision(6) << s.small_seconds << ','
       << s.large_seconds << '\n';
  }
  os << "# same_trajectory=" << (r.same_trajectory ? "yes" : "no") << " node_ratio=" << std::setprecision(6)
     << r.node_ratio << " time_ratio=" << r.time_ratio << '\n';
  return os.str();
}

}  // namespace mil
