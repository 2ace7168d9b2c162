#include "mil/metarule.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mil {

void Metarule::validate() const {
  if (body.empty()) throw std::invalid_argument("metarule " + name.str() + " has an empty body");
  if (body.size() > arity_bound) {
    throw std::invalid_argument("metarule " + name.str() + " body longer than the arity bound");
  }
  for (std::size_t v : head.args) {
    bool found = std::any_of(body.begin(), body.end(), [&](const MetaAtom& b) {
      return std::find(b.args.begin(), b.args.end(), v) != b.args.end();
    });
    if (!found) throw std::invalid_argument("metarule " + name.str() + " head variable " + vars[v].str() + " not in body");
  }
  std::set<Symbol> preds{head.pred_var};
  for (const MetaAtom& b : body) {
    if (!preds.insert(b.pred_var).second) {
      throw std::invalid_argument("metarule " + name.str() + " repeats predicate variable " + b.pred_var.str());
    }
  }
}

Metarule parse_metarule(std::string_view line, std::size_t arity_bound) {
  auto colon = line.find(':');
  auto neck = line.find(":-");
  if (colon == std::string_view::npos || colon == neck) throw ParseError("metarule needs `name:` prefix");
  Metarule m;
  m.arity_bound = arity_bound;
  std::string name(line.substr(0, colon));
  name.erase(0, name.find_first_not_of(" \t"));
  name.erase(name.find_last_not_of(" \t") + 1);
  m.name = Symbol(name);

  // Strip `Var:sort` annotations before handing the clause to the parser.
  std::string rest(line.substr(colon + 1));
  std::string clean;
  std::vector<std::pair<std::string, std::string>> annotations;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest[i] == ':' && i + 1 < rest.size() && rest[i + 1] != '-') {
      std::size_t b = clean.size();
      while (b > 0 && (std::isalnum(static_cast<unsigned char>(clean[b - 1])) || clean[b - 1] == '_')) --b;
      std::string var = clean.substr(b);
      std::size_t j = i + 1;
      while (j < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[j])) || rest[j] == '_')) ++j;
      annotations.emplace_back(var, rest.substr(i + 1, j - i - 1));
      i = j - 1;
      continue;
    }
    clean += rest[i];
  }
  Clause c = parse_clause(clean);
  auto index_of = [&](const Term& t) {
    if (!t.is_var()) throw ParseError("metarule " + name + " contains a constant");
    auto it = std::find(m.vars.begin(), m.vars.end(), t.name);
    if (it != m.vars.end()) return static_cast<std::size_t>(it - m.vars.begin());
    m.vars.push_back(t.name);
    return m.vars.size() - 1;
  };
  auto convert = [&](const Atom& a) {
    MetaAtom ma;
    ma.pred_var = a.pred;
    for (const Term& t : a.args) ma.args.push_back(index_of(t));
    return ma;
  };
  m.head = convert(c.head);
  for (const Atom& b : c.body) m.body.push_back(convert(b));
  m.var_sorts.assign(m.vars.size(), Symbol());
  for (auto& [var, sort] : annotations) {
    auto it = std::find(m.vars.begin(), m.vars.end(), Symbol(var));
    if (it == m.vars.end()) throw ParseError("annotation for unknown variable " + var);
    m.var_sorts[it - m.vars.begin()] = Symbol(sort);
  }
  m.validate();
  return m;
}

std::vector<Metarule> parse_metarules(std::string_view text, std::size_t arity_bound) {
  std::vector<Metarule> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto pct = line.find('%'); pct != std::string::npos) line.resize(pct);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_metarule(line, arity_bound));
  }
  std::sort(out.begin(), out.end(), [](const Metarule& a, const Metarule& b) { return a.name.str() < b.name.str(); });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].name == out[i - 1].name) throw ParseError("duplicate metarule " + out[i].name.str());
  }
  return out;
}

std::string default_metarules_text() {
  return "identity: P(X,Y) :- Q(X,Y).\n"
         "identity1: P(X) :- Q(X).\n"
         "absorption: P(X,Y) :- Q(X,Y), R(Y).\n"
         "absorption_left: P(X,Y) :- Q(X,Y), R(X).\n"
         "chain: P(X,Y) :- Q(X,Z), R(Z,Y).\n"
         "monadic_chain: P(X) :- Q(X,Y), R(Y).\n"
         "precondition: P(X) :- Q(X), R(X).\n"
         "projection3: P(X,Y) :- Q(Z), R(X,Z,Y).\n"
         "chain3: P(X,Y,Z) :- Q(X,W), R(W,Y,Z).\n";
}

std::vector<Metarule> default_metarules() { return parse_metarules(default_metarules_text()); }

std::string to_string(const Metarule& m) {
  auto render = [&](const MetaAtom& a) {
    std::string s = a.pred_var.str() + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) s += ",";
      s += m.vars[a.args[i]].str();
      if (!m.var_sorts[a.args[i]].empty()) s += ":" + m.var_sorts[a.args[i]].str();
    }
    return s + ")";
  };
  std::string s = m.name.str() + ": " + render(m.head) + " :- ";
  for (std::size_t i = 0; i < m.body.size(); ++i) {
    if (i) s += ", ";
    s += render(m.body[i]);
  }
  return s + ".";
}

}  // namespace mil
