#include "mil/logic.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace mil {

bool Atom::is_ground() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_const(); });
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::abstraction: return "abstraction";
    case Provenance::dynamics: return "dynamics";
    case Provenance::constraint: return "constraint";
  }
  return "?";
}

bool Clause::range_restricted() const {
  for (const Term& t : head.args) {
    if (!t.is_var()) continue;
    bool found = false;
    for (const Atom& b : body) {
      if (std::find(b.args.begin(), b.args.end(), t) != b.args.end()) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// ---- substitution ------------------------------------------------------

bool sorts_compatible(Symbol a, Symbol b) { return a.empty() || b.empty() || a == b; }

const Term* Substitution::find(Symbol var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const {
  if (!t.is_var()) return t;
  const Term* b = find(t.name);
  return b ? *b : t;
}

Atom Substitution::apply(const Atom& a) const {
  Atom out = a;
  for (Term& t : out.args) t = apply(t);
  return out;
}

Clause Substitution::apply(const Clause& c) const {
  Clause out = c;
  out.head = apply(c.head);
  for (Atom& b : out.body) b = apply(b);
  return out;
}

bool Substitution::bind(const Term& var, const Term& t) {
  if (!var.is_var()) return false;
  Term target = apply(t);
  if (const Term* existing = find(var.name)) return *existing == target;
  if (target.is_var() && target.name == var.name) return true;
  if (!sorts_compatible(var.sort, target.sort)) return false;
  for (auto& [name, value] : bindings_) {
    if (value.is_var() && value.name == var.name) value = target;
  }
  bindings_.emplace(var.name, target);
  return true;
}

std::optional<Substitution> unify(const Atom& a, const Atom& b) {
  if (a.pred != b.pred || a.arity() != b.arity()) return std::nullopt;
  Substitution s;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    Term x = s.apply(a.args[i]);
    Term y = s.apply(b.args[i]);
    if (x == y) continue;
    if (!sorts_compatible(x.sort, y.sort)) return std::nullopt;
    if (x.is_var()) {
      if (!s.bind(x, y)) return std::nullopt;
    } else if (y.is_var()) {
      if (!s.bind(y, x)) return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  return s;
}

Atom apply(const Substitution& s, const Atom& a) { return s.apply(a); }

// ---- canonical form ----------------------------------------------------

namespace {

struct CanonInput {
  std::vector<const Atom*> lits;  // body, deduplicated
  const Atom* head = nullptr;
  std::vector<Symbol> vars;       // distinct variable names
  std::unordered_map<Symbol, std::size_t> var_index;
};

std::string pred_text(Symbol p, const PredRender& render) { return render ? render(p) : p.str(); }

std::string term_shape(const Term& t) {
  // Constants keep their names; variables contribute only their sort here.
  if (t.is_var()) return "_:" + t.sort.str();
  return t.name.str() + ":" + t.sort.str();
}

std::string literal_shape(const Atom& a, const PredRender& render) {
  std::string s = pred_text(a.pred, render);
  s += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ',';
    s += term_shape(a.args[i]);
  }
  s += ')';
  return s;
}

std::string render_in_order(const CanonInput& in, const std::vector<std::size_t>& order,
                            const PredRender& render) {
  std::vector<int> rename(in.vars.size(), -1);
  int next = 0;
  std::string out;
  auto emit = [&](const Atom& a) {
    out += pred_text(a.pred, render);
    out += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) out += ',';
      const Term& t = a.args[i];
      if (t.is_var()) {
        auto& r = rename[in.var_index.at(t.name)];
        if (r < 0) r = next++;
        out += 'V';
        out += std::to_string(r);
        out += ':';
        out += t.sort.str();
      } else {
        out += t.name.str();
        out += ':';
        out += t.sort.str();
      }
    }
    out += ')';
  };
  if (in.head) {
    out += "H|";
    emit(*in.head);
    out += '|';
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k) out += ';';
    emit(*in.lits[order[k]]);
  }
  return out;
}

}  // namespace

std::string canonical_form(std::span<const Atom> body, const Atom* head, const PredRender& render) {
  CanonInput in;
  in.head = head;
  for (const Atom& a : body) {
    bool dup = std::any_of(in.lits.begin(), in.lits.end(), [&](const Atom* b) { return *b == a; });
    if (!dup) in.lits.push_back(&a);
  }
  auto note_vars = [&](const Atom& a) {
    for (const Term& t : a.args) {
      if (t.is_var() && !in.var_index.count(t.name)) {
        in.var_index.emplace(t.name, in.vars.size());
        in.vars.push_back(t.name);
      }
    }
  };
  if (head) note_vars(*head);
  for (const Atom* a : in.lits) note_vars(*a);

  const std::size_t n = in.lits.size();
  std::vector<std::uint64_t> base(n);
  for (std::size_t i = 0; i < n; ++i) base[i] = fnv1a(literal_shape(*in.lits[i], render));

  // Colour refinement: a variable's colour summarises where it occurs; a
  // literal's signature combines its shape with its arguments' colours.
  std::vector<std::uint64_t> color(in.vars.size(), 0);
  if (head) {
    for (std::size_t p = 0; p < head->args.size(); ++p) {
      const Term& t = head->args[p];
      if (t.is_var()) {
        auto& c = color[in.var_index.at(t.name)];
        c = fnv1a(std::to_string(c) + "h" + std::to_string(p));
      }
    }
  }
  std::vector<std::uint64_t> sig(n);
  auto compute_sigs = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      std::string s = std::to_string(base[i]);
      for (const Term& t : in.lits[i]->args) {
        s += ',';
        s += t.is_var() ? std::to_string(color[in.var_index.at(t.name)]) : "c";
      }
      sig[i] = fnv1a(s);
    }
  };
  auto count_distinct = [](std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };
  compute_sigs();
  std::size_t classes = count_distinct(sig) + count_distinct(color);
  for (std::size_t round = 0; round <= in.vars.size() + 1; ++round) {
    std::vector<std::vector<std::string>> occ(in.vars.size());
    for (std::size_t i = 0; i < n; ++i) {
      const Atom& a = *in.lits[i];
      for (std::size_t p = 0; p < a.args.size(); ++p) {
        if (a.args[p].is_var()) {
          occ[in.var_index.at(a.args[p].name)].push_back(std::to_string(sig[i]) + "@" + std::to_string(p));
        }
      }
    }
    std::vector<std::uint64_t> next(in.vars.size());
    for (std::size_t v = 0; v < in.vars.size(); ++v) {
      std::sort(occ[v].begin(), occ[v].end());
      std::string s = std::to_string(color[v]);
      for (auto& o : occ[v]) s += "|" + o;
      next[v] = fnv1a(s);
    }
    color = std::move(next);
    compute_sigs();
    std::size_t now = count_distinct(sig) + count_distinct(color);
    if (now == classes) break;
    classes = now;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sig[a] < sig[b];
  });

  // Literals that refinement could not separate are tried in every order;
  // the lexicographically smallest rendering wins.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sig[order[j]] == sig[order[i]]) ++j;
    if (j - i > 1) {
      groups.emplace_back(i, j);
      for (std::size_t k = 2; k <= j - i && combos <= 5040; ++k) combos *= k;
    }
    i = j;
  }
  if (groups.empty() || combos > 5040) return render_in_order(in, order, render);

  for (auto [b, e] : groups) std::sort(order.begin() + b, order.begin() + e);
  std::string best = render_in_order(in, order, render);
  std::function<void(std::size_t)> walk = [&](std::size_t g) {
    if (g == groups.size()) {
      std::string cand = render_in_order(in, order, render);
      if (cand < best) best = std::move(cand);
      return;
    }
    auto [b, e] = groups[g];
    std::sort(order.begin() + b, order.begin() + e);
    do {
      walk(g + 1);
    } while (std::next_permutation(order.begin() + b, order.begin() + e));
  };
  walk(0);
  return best;
}

std::uint64_t canonical_hash(std::span<const Atom> body) { return fnv1a(canonical_form(body)); }

std::uint64_t canonical_hash(const Clause& c, const PredRender& render) {
  return fnv1a(canonical_form(c.body, &c.head, render));
}

// ---- subsumption -------------------------------------------------------

namespace {

bool match_term(const Term& g, const Term& s, std::vector<std::pair<Symbol, Term>>& theta) {
  if (!g.is_var()) return g == s;
  if (!sorts_compatible(g.sort, s.sort)) return false;
  for (auto& [v, t] : theta) {
    if (v == g.name) return t == s;
  }
  theta.emplace_back(g.name, s);
  return true;
}

bool match_atom(const Atom& g, const Atom& s, std::vector<std::pair<Symbol, Term>>& theta) {
  if (g.pred != s.pred || g.arity() != s.arity()) return false;
  for (std::size_t i = 0; i < g.arity(); ++i) {
    if (!match_term(g.args[i], s.args[i], theta)) return false;
  }
  return true;
}

bool subsume_rest(const std::vector<const Atom*>& general, std::size_t k, const std::vector<Atom>& specific,
                  std::vector<std::pair<Symbol, Term>>& theta) {
  if (k == general.size()) return true;
  for (const Atom& s : specific) {
    std::size_t mark = theta.size();
    if (match_atom(*general[k], s, theta) && subsume_rest(general, k + 1, specific, theta)) return true;
    theta.resize(mark);
  }
  return false;
}

}  // namespace

bool subsumes(const Clause& general, const Clause& specific) {
  std::vector<std::pair<Symbol, Term>> theta;
  if (!match_atom(general.head, specific.head, theta)) return false;
  std::vector<const Atom*> lits;
  for (const Atom& a : general.body) lits.push_back(&a);
  // Rarest predicates first keeps the backtracking shallow.
  auto freq = [&](const Atom* a) {
    return std::count_if(specific.body.begin(), specific.body.end(),
                         [&](const Atom& s) { return s.pred == a->pred; });
  };
  std::stable_sort(lits.begin(), lits.end(), [&](const Atom* a, const Atom* b) { return freq(a) < freq(b); });
  return subsume_rest(lits, 0, specific.body, theta);
}

// ---- unfolding ---------------------------------------------------------

namespace {

void unfold_into(const Atom& lit, const DefinitionLookup& definition_of, Substitution& theta,
                 std::vector<Atom>& out, int& fresh, int depth) {
  const Clause* def = definition_of(lit.pred);
  if (!def) {
    out.push_back(lit);
    return;
  }
  if (depth > 64) throw std::runtime_error("cyclic definition while unfolding " + lit.pred.str());
  // Rename the definition apart.
  int tag = fresh++;
  auto renamed = [&](const Term& t) {
    if (!t.is_var()) return t;
    return Term::var(Symbol("_G" + std::to_string(tag) + "_" + t.name.str()), t.sort);
  };
  Atom head = def->head;
  for (Term& t : head.args) t = renamed(t);
  // Bind the definition's head to the literal.
  for (std::size_t i = 0; i < head.args.size(); ++i) {
    Term h = theta.apply(head.args[i]);
    Term a = theta.apply(lit.args[i]);
    if (h == a) continue;
    bool ok = h.is_var() ? theta.bind(h, a) : (a.is_var() ? theta.bind(a, h) : false);
    if (!ok) throw std::runtime_error("definition of " + lit.pred.str() + " does not match " + to_string(lit));
  }
  for (const Atom& b : def->body) {
    Atom r = b;
    for (Term& t : r.args) t = renamed(t);
    unfold_into(r, definition_of, theta, out, fresh, depth + 1);
  }
}

}  // namespace

Clause unfold(const Clause& c, const DefinitionLookup& definition_of) {
  Substitution theta;
  std::vector<Atom> body;
  int fresh = 0;
  for (const Atom& b : c.body) unfold_into(b, definition_of, theta, body, fresh, 0);
  Clause out = c;
  out.head = theta.apply(c.head);
  out.body.clear();
  for (const Atom& b : body) {
    Atom a = theta.apply(b);
    if (std::find(out.body.begin(), out.body.end(), a) == out.body.end()) out.body.push_back(std::move(a));
  }
  return out;
}

// ---- text --------------------------------------------------------------

std::string to_string(const Term& t) { return t.name.str(); }

std::string to_string(const Atom& a) {
  std::string s = a.pred.str();
  if (a.args.empty()) return s;
  s += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ',';
    s += a.args[i].name.str();
  }
  s += ')';
  return s;
}

std::string to_string(const Clause& c) {
  std::string s = to_string(c.head);
  if (!c.body.empty()) {
    s += " :- ";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (i) s += ", ";
      s += to_string(c.body[i]);
    }
  }
  s += '.';
  return s;
}

std::ostream& operator<<(std::ostream& os, const Term& t) { return os << to_string(t); }
std::ostream& operator<<(std::ostream& os, const Atom& a) { return os << to_string(a); }
std::ostream& operator<<(std::ostream& os, const Clause& c) { return os << to_string(c); }

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }
  std::string_view identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }
  // A compound constant such as c(2,4) is read back as a single name.
  std::string_view balanced_suffix() {
    std::size_t start = pos_;
    if (pos_ >= text_.size() || text_[pos_] != '(') return {};
    int depth = 0;
    do {
      if (text_[pos_] == '(') ++depth;
      if (text_[pos_] == ')') --depth;
      ++pos_;
    } while (pos_ < text_.size() && depth > 0);
    if (depth != 0) fail("unbalanced parentheses");
    return text_.substr(start, pos_ - start);
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

Term parse_term(Lexer& lx) {
  std::string name(lx.identifier());
  std::string_view suffix = lx.balanced_suffix();
  if (!suffix.empty()) {
    std::string compact;
    for (char c : suffix) {
      if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    }
    return Term::constant(Symbol(name + compact));
  }
  bool is_var = std::isupper(static_cast<unsigned char>(name[0])) || name[0] == '_';
  return is_var ? Term::var(Symbol(name)) : Term::constant(Symbol(name));
}

Atom parse_atom(Lexer& lx) {
  Atom a;
  a.pred = Symbol(lx.identifier());
  if (lx.accept("(")) {
    if (!lx.peek(')')) {
      do {
        a.args.push_back(parse_term(lx));
      } while (lx.accept(","));
    }
    lx.expect(")");
  }
  return a;
}

}  // namespace

Atom parse_atom(std::string_view text) {
  Lexer lx(text);
  Atom a = parse_atom(lx);
  if (!lx.at_end()) lx.fail("trailing input");
  return a;
}

std::vector<Atom> parse_atom_list(std::string_view text) {
  Lexer lx(text);
  std::vector<Atom> out;
  if (lx.at_end()) return out;
  do {
    out.push_back(parse_atom(lx));
  } while (lx.accept(",") || (!lx.at_end() && !lx.peek('.')));
  lx.accept(".");
  if (!lx.at_end()) lx.fail("trailing input");
  return out;
}

Clause parse_clause(std::string_view text) {
  Lexer lx(text);
  Clause c;
  c.head = parse_atom(lx);
  if (lx.accept(":-")) {
    do {
      c.body.push_back(parse_atom(lx));
    } while (lx.accept(","));
  }
  lx.accept(".");
  if (!lx.at_end()) lx.fail("trailing input");
  return c;
}

namespace {

void sort_atom(Atom& a, const SortLookup& lookup, std::map<Symbol, Symbol>& var_sorts) {
  const std::vector<Symbol>* sig = lookup(a.pred, a.arity());
  if (!sig) throw ParseError("unknown predicate " + a.pred.str() + "/" + std::to_string(a.arity()));
  for (std::size_t i = 0; i < a.arity(); ++i) {
    Term& t = a.args[i];
    Symbol want = (*sig)[i];
    if (t.is_var()) {
      auto [it, fresh] = var_sorts.emplace(t.name, want);
      if (!fresh && it->second != want) {
        throw ParseError("variable " + t.name.str() + " used as both " + it->second.str() + " and " + want.str());
      }
    }
    t.sort = want;
  }
}

}  // namespace

void assign_sorts(Atom& a, const SortLookup& lookup) {
  std::map<Symbol, Symbol> var_sorts;
  sort_atom(a, lookup, var_sorts);
}

void assign_sorts(Clause& c, const SortLookup& lookup) {
  std::map<Symbol, Symbol> var_sorts;
  for (Atom& b : c.body) sort_atom(b, lookup, var_sorts);
  sort_atom(c.head, lookup, var_sorts);
}

}  // namespace mil
