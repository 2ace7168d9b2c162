#include "mil/background.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace mil {

const char* to_string(PredicateSource s) {
  switch (s) {
    case PredicateSource::state: return "state";
    case PredicateSource::background: return "background";
    case PredicateSource::action: return "action";
    case PredicateSource::invented: return "invented";
  }
  return "?";
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::north: return "north";
    case Direction::south: return "south";
    case Direction::east: return "east";
    case Direction::west: return "west";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view name) {
  for (Direction d : kDirections) {
    if (name == to_string(d)) return d;
  }
  return std::nullopt;
}

Coord step(Coord c, Direction d) {
  switch (d) {
    case Direction::north: return {c.x, c.y - 1};
    case Direction::south: return {c.x, c.y + 1};
    case Direction::east: return {c.x + 1, c.y};
    case Direction::west: return {c.x - 1, c.y};
  }
  return c;
}

Term cell_term(Coord c) {
  return Term::constant(Symbol("c(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"), vocab::cell());
}

std::optional<Coord> parse_cell(Symbol name) {
  const std::string& s = name.str();
  if (s.size() < 6 || s[0] != 'c' || s[1] != '(' || s.back() != ')') return std::nullopt;
  auto comma = s.find(',');
  if (comma == std::string::npos) return std::nullopt;
  Coord c;
  auto r1 = std::from_chars(s.data() + 2, s.data() + comma, c.x);
  auto r2 = std::from_chars(s.data() + comma + 1, s.data() + s.size() - 1, c.y);
  if (r1.ec != std::errc() || r1.ptr != s.data() + comma) return std::nullopt;
  if (r2.ec != std::errc() || r2.ptr != s.data() + s.size() - 1) return std::nullopt;
  return c;
}

Term direction_term(Direction d) { return Term::constant(Symbol(to_string(d)), vocab::direction()); }

void FactEvaluator::solve(std::span<const Slot> args, const Emit& emit) const {
  for (const auto& tuple : facts_) {
    if (tuple.size() != args.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < args.size() && ok; ++i) ok = !args[i] || *args[i] == tuple[i];
    if (ok) emit(tuple);
  }
}

namespace {

using Probe = std::shared_ptr<std::atomic<std::uint64_t>>;

std::optional<Coord> bound_cell(const Slot& s, Symbol sort) {
  if (!s || s->sort != sort) return std::nullopt;
  return parse_cell(s->name);
}

// Unary terrain test over cells. Scans the grid only when the argument is free.
class TerrainEvaluator : public Evaluator {
 public:
  TerrainEvaluator(const TerrainGrid& grid, Probe probe, std::function<bool(Terrain)> test)
      : grid_(grid), probe_(std::move(probe)), test_(std::move(test)) {}

  bool bounded(std::span<const Slot> args) const override { return args.size() == 1 && args[0].has_value(); }

  void solve(std::span<const Slot> args, const Emit& emit) const override {
    if (args.size() != 1) return;
    if (args[0]) {
      auto c = bound_cell(args[0], vocab::cell());
      if (!c || !grid_.contains(*c)) return;
      probe_->fetch_add(1, std::memory_order_relaxed);
      if (test_(grid_.at(*c))) emit(std::span<const Term>(&*args[0], 1));
      return;
    }
    for (int y = 0; y < grid_.height; ++y) {
      for (int x = 0; x < grid_.width; ++x) {
        probe_->fetch_add(1, std::memory_order_relaxed);
        if (test_(grid_.at({x, y}))) {
          Term t = cell_term({x, y});
          emit(std::span<const Term>(&t, 1));
        }
      }
    }
  }

 private:
  TerrainGrid grid_;
  Probe probe_;
  std::function<bool(Terrain)> test_;
};

// adjacent(From, Dir, To): To is the in-bounds neighbour of From in Dir.
class AdjacentEvaluator : public Evaluator {
 public:
  AdjacentEvaluator(const TerrainGrid& grid, Probe probe) : grid_(grid), probe_(std::move(probe)) {}

  bool bounded(std::span<const Slot> args) const override {
    return args.size() == 3 && (args[0].has_value() || args[2].has_value());
  }

  void solve(std::span<const Slot> args, const Emit& emit) const override {
    if (args.size() != 3) return;
    std::optional<Direction> only;
    if (args[1]) {
      if (args[1]->sort != vocab::direction()) return;
      only = parse_direction(args[1]->name.str());
      if (!only) return;
    }
    auto emit_pair = [&](Coord from, Direction d, Coord to) {
      probe_->fetch_add(1, std::memory_order_relaxed);
      if (!grid_.contains(from) || !grid_.contains(to)) return;
      Term tuple[3] = {cell_term(from), direction_term(d), cell_term(to)};
      if (args[0] && *args[0] != tuple[0]) return;
      if (args[2] && *args[2] != tuple[2]) return;
      emit(tuple);
    };
    auto for_dirs = [&](auto&& fn) {
      if (only) {
        fn(*only);
      } else {
        for (Direction d : kDirections) fn(d);
      }
    };
    if (args[0]) {
      auto from = bound_cell(args[0], vocab::cell());
      if (!from) return;
      for_dirs([&](Direction d) { emit_pair(*from, d, step(*from, d)); });
    } else if (args[2]) {
      auto to = bound_cell(args[2], vocab::cell());
      if (!to) return;
      for_dirs([&](Direction d) {
        // The cell whose d-neighbour is `to`.
        Coord ahead = step(*to, d);
        emit_pair({2 * to->x - ahead.x, 2 * to->y - ahead.y}, d, *to);
      });
    } else {
      for (int y = 0; y < grid_.height; ++y) {
        for (int x = 0; x < grid_.width; ++x) {
          for_dirs([&](Direction d) { emit_pair({x, y}, d, step({x, y}, d)); });
        }
      }
    }
  }

 private:
  TerrainGrid grid_;
  Probe probe_;
};

}  // namespace

void BackgroundKB::declare(Signature sig) {
  if (signatures_.count(sig.pred)) throw std::invalid_argument("duplicate signature for " + sig.pred.str());
  signatures_.emplace(sig.pred, std::move(sig));
}

void BackgroundKB::attach(Symbol pred, std::shared_ptr<const Evaluator> evaluator) {
  evaluators_[pred] = std::move(evaluator);
}

void BackgroundKB::add_fact(const Atom& fact) {
  if (!fact.is_ground()) throw std::invalid_argument("background fact must be ground: " + to_string(fact));
  auto& fe = facts_[fact.pred];
  if (!fe) {
    fe = std::make_shared<FactEvaluator>();
    evaluators_[fact.pred] = fe;
  }
  fe->add(fact.args);
}

const Signature* BackgroundKB::signature(Symbol pred) const {
  auto it = signatures_.find(pred);
  return it == signatures_.end() ? nullptr : &it->second;
}

std::vector<const Signature*> BackgroundKB::catalog() const {
  std::vector<const Signature*> out;
  for (const auto& [p, s] : signatures_) out.push_back(&s);
  std::sort(out.begin(), out.end(), [](const Signature* a, const Signature* b) { return a->pred.str() < b->pred.str(); });
  return out;
}

SortLookup BackgroundKB::sort_lookup() const {
  return [this](Symbol pred, std::size_t arity) -> const std::vector<Symbol>* {
    const Signature* s = signature(pred);
    return s && s->arity() == arity ? &s->arg_sorts : nullptr;
  };
}

bool BackgroundKB::bounded(Symbol pred, std::span<const Slot> args) const {
  const Signature* sig = signature(pred);
  if (!sig) return false;
  if (sig->source != PredicateSource::background) return true;
  auto it = evaluators_.find(pred);
  return it != evaluators_.end() && it->second->bounded(args);
}

void BackgroundKB::query(Symbol pred, std::span<const Slot> args, const State& state, const Emit& emit) const {
  const Signature* sig = signature(pred);
  if (!sig) throw std::invalid_argument("unknown predicate " + pred.str());
  if (sig->arity() != args.size()) return;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] && !sorts_compatible(args[i]->sort, sig->arg_sorts[i])) return;
  }
  if (sig->source == PredicateSource::background) {
    auto it = evaluators_.find(pred);
    if (it == evaluators_.end()) throw std::invalid_argument("no evaluator for background predicate " + pred.str());
    it->second->solve(args, emit);
    return;
  }
  for (auto it = state.lower_bound(Atom(pred, {})); it != state.end() && it->pred == pred; ++it) {
    if (it->arity() != args.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < args.size() && ok; ++i) ok = !args[i] || *args[i] == it->args[i];
    if (ok) emit(it->args);
  }
}

std::vector<Substitution> eval_primitive(const Atom& query, const State& state, const BackgroundKB& kb) {
  if (!kb.signature(query.pred)) throw std::invalid_argument("unknown predicate " + query.pred.str());
  std::vector<Slot> slots;
  for (const Term& t : query.args) slots.push_back(t.is_var() ? Slot() : Slot(t));
  std::vector<Substitution> out;
  kb.query(query.pred, slots, state, [&](std::span<const Term> tuple) {
    Substitution s;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (query.args[i].is_var() && !s.bind(query.args[i], tuple[i])) return;
    }
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  });
  return out;
}

std::vector<Symbol> compatible_predicates(std::span<const Symbol> sorts, const BackgroundKB& kb,
                                          std::span<const Signature> extra) {
  std::vector<Symbol> out;
  auto consider = [&](const Signature& s) {
    if (s.arg_sorts.size() == sorts.size() && std::equal(sorts.begin(), sorts.end(), s.arg_sorts.begin())) {
      out.push_back(s.pred);
    }
  };
  for (const auto& [p, s] : kb.signatures()) consider(s);
  for (const auto& s : extra) consider(s);
  std::sort(out.begin(), out.end(), [](Symbol a, Symbol b) { return a.str() < b.str(); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Signature> parse_domain(std::string_view text) {
  std::vector<Signature> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pct = line.find('%'); pct != std::string::npos) line.resize(pct);
    line = trim(line);
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw ParseError("domain line " + std::to_string(lineno) + ": " + what);
    };
    auto slash = line.find('/');
    auto colon = line.find(':');
    auto lb = line.find('[');
    auto rb = line.find(']');
    if (slash == std::string::npos || colon == std::string::npos || lb == std::string::npos ||
        rb == std::string::npos || !(slash < colon && colon < lb && lb < rb)) {
      fail("expected `pred/arity : sort, ... [kind]`");
    }
    Signature sig;
    sig.pred = Symbol(trim(line.substr(0, slash)));
    int arity = 0;
    std::string ar = trim(line.substr(slash + 1, colon - slash - 1));
    if (std::from_chars(ar.data(), ar.data() + ar.size(), arity).ec != std::errc() || arity < 0) fail("bad arity");
    std::istringstream sorts(line.substr(colon + 1, lb - colon - 1));
    std::string s;
    while (std::getline(sorts, s, ',')) {
      s = trim(s);
      if (!s.empty()) sig.arg_sorts.emplace_back(s);
    }
    if (static_cast<int>(sig.arg_sorts.size()) != arity) fail("arity does not match sort list");
    std::istringstream kinds(line.substr(lb + 1, rb - lb - 1));
    std::string kind;
    kinds >> kind;
    if (kind == "state") {
      sig.source = PredicateSource::state;
      sig.head_allowed = true;
    } else if (kind == "background") {
      sig.source = PredicateSource::background;
    } else if (kind == "action") {
      sig.source = PredicateSource::action;
    } else {
      fail("unknown kind '" + kind + "'");
    }
    std::string flag;
    while (kinds >> flag) {
      if (flag == "head") sig.head_allowed = true;
      else if (flag == "body") sig.head_allowed = false;
      else fail("unknown flag '" + flag + "'");
    }
    out.push_back(std::move(sig));
  }
  return out;
}

std::string default_domain_text() {
  return "% Lava crossing vocabulary\n"
         "at/2 : object, cell [state]\n"
         "alive/1 : object [state]\n"
         "dead/1 : object [state]\n"
         "move/1 : direction [action]\n"
         "adjacent/3 : cell, direction, cell [background]\n"
         "wall/1 : cell [background]\n"
         "not_wall/1 : cell [background]\n"
         "is_lava/1 : cell [background]\n"
         "is_goal/1 : cell [background]\n";
}

BackgroundKB make_grid_kb(const TerrainGrid& grid, std::string_view domain_text) {
  BackgroundKB kb;
  for (auto& sig : parse_domain(domain_text.empty() ? default_domain_text() : std::string(domain_text))) {
    kb.declare(std::move(sig));
  }
  auto probe = kb.probe_handle();
  auto terrain = [&](const char* name, std::function<bool(Terrain)> test) {
    kb.attach(Symbol(name), std::make_shared<TerrainEvaluator>(grid, probe, std::move(test)));
  };
  kb.attach(Symbol("adjacent"), std::make_shared<AdjacentEvaluator>(grid, probe));
  terrain("wall", [](Terrain t) { return t == Terrain::wall; });
  terrain("not_wall", [](Terrain t) { return t != Terrain::wall; });
  terrain("is_lava", [](Terrain t) { return t == Terrain::lava; });
  terrain("is_goal", [](Terrain t) { return t == Terrain::goal; });
  return kb;
}

}  // namespace mil
