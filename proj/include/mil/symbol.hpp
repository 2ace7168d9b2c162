#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace mil {

// Interned name. Ids are process-wide; comparisons and hashing are O(1).
// Ordering by id follows interning order, so anything written to disk is
// sorted by str() instead.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view name);

  const std::string& str() const;
  std::uint32_t id() const { return id_; }
  bool empty() const { return id_ == 0; }

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend bool operator!=(Symbol a, Symbol b) { return a.id_ != b.id_; }
  friend bool operator<(Symbol a, Symbol b) { return a.id_ < b.id_; }

 private:
  std::uint32_t id_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Symbol s) { return os << s.str(); }

// 64-bit FNV-1a, used for every persisted hash so values are stable across runs.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t v);

}  // namespace mil

template <>
struct std::hash<mil::Symbol> {
  std::size_t operator()(mil::Symbol s) const noexcept { return s.id(); }
};
