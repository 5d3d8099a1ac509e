#include "rdsym/symbol.hpp"

#include <mutex>
#include <unordered_map>
#include <vector>

#include "rdsym/errors.hpp"

namespace rdsym {

namespace {

struct Table {
  std::mutex m;
  std::vector<std::string> names;
  std::vector<SymbolKind> kinds;
  std::unordered_map<std::string, std::uint32_t> index;
};

Table& table() {
  static Table t;
  return t;
}

}  // namespace

Symbol Symbol::intern(std::string_view name, SymbolKind kind) {
  Table& t = table();
  std::lock_guard<std::mutex> lock(t.m);
  auto it = t.index.find(std::string(name));
  if (it != t.index.end()) {
    if (t.kinds[it->second] != kind)
      throw KindConflictError("symbol '" + std::string(name) + "' already interned with a different kind");
    return Symbol(it->second);
  }
  std::uint32_t id = static_cast<std::uint32_t>(t.names.size());
  t.names.emplace_back(name);
  t.kinds.push_back(kind);
  t.index.emplace(t.names.back(), id);
  return Symbol(id);
}

std::optional<Symbol> Symbol::lookup(std::string_view name) {
  Table& t = table();
  std::lock_guard<std::mutex> lock(t.m);
  auto it = t.index.find(std::string(name));
  if (it == t.index.end()) return std::nullopt;
  return Symbol(it->second);
}

const std::string& Symbol::name() const { return table().names[id_]; }

SymbolKind Symbol::kind() const { return table().kinds[id_]; }

const Vars& vars() {
  static const Vars v = [] {
    auto ind = [](const char* n) { return Symbol::intern(n, SymbolKind::Independent); };
    auto jet = [](const char* n) { return Symbol::intern(n, SymbolKind::Jet); };
    return Vars{ind("t"),    ind("x"),    jet("u"),    jet("v"),    jet("u_t"),  jet("v_t"),  jet("u_x"),
                jet("v_x"),  jet("u_xx"), jet("v_xx"), jet("u_xt"), jet("v_xt"), jet("u_tt"), jet("v_tt")};
  }();
  return v;
}

bool is_reserved(Symbol s) {
  vars();
  return s.id() < 14;
}

}  // namespace rdsym
