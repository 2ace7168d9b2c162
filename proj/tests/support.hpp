#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "mil/background.hpp"
#include "mil/gridworld.hpp"
#include "mil/hypothesis.hpp"
#include "mil/logic.hpp"

namespace mil::testing_support {

inline std::string data_path(const std::string& name) { return std::string(MIL_DATA_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Atom typed_atom(std::string_view text, const BackgroundKB& kb) {
  Atom a = parse_atom(text);
  assign_sorts(a, kb.sort_lookup());
  return a;
}

inline State typed_state(std::string_view text, const BackgroundKB& kb) {
  State s;
  for (Atom a : parse_atom_list(text)) {
    assign_sorts(a, kb.sort_lookup());
    s.insert(a);
  }
  return s;
}

inline Hypothesis ground_truth(const BackgroundKB& kb) {
  return load_program(read_file(data_path("lava_ground_truth.pl")), kb);
}

inline GridMap map_from(std::string_view text) { return parse_map(text); }

}  // namespace mil::testing_support
