#include "mil/symbol.hpp"

#include <cstdio>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace mil {
namespace {

struct SymbolTable {
  std::shared_mutex mutex;
  std::deque<std::string> names{std::string()};
  std::unordered_map<std::string_view, std::uint32_t> ids{{std::string_view(names.front()), 0}};

  std::uint32_t intern(std::string_view name) {
    {
      std::shared_lock lock(mutex);
      if (auto it = ids.find(name); it != ids.end()) return it->second;
    }
    std::unique_lock lock(mutex);
    if (auto it = ids.find(name); it != ids.end()) return it->second;
    names.emplace_back(name);
    auto id = static_cast<std::uint32_t>(names.size() - 1);
    ids.emplace(std::string_view(names.back()), id);
    return id;
  }

  const std::string& lookup(std::uint32_t id) {
    std::shared_lock lock(mutex);
    return names[id];
  }
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

}  // namespace

Symbol::Symbol(std::string_view name) : id_(table().intern(name)) {}

const std::string& Symbol::str() const { return table().lookup(id_); }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace mil
