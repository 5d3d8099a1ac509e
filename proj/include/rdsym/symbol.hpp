#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rdsym {

enum class SymbolKind : std::uint8_t {
  Independent,  // t, x
  Jet,          // u, v and their derivatives up to second order
  Parameter,
  OpaqueFn,
};

/// Interned identifier. Names are unique in the workspace and the kind is
/// fixed at first interning; re-interning with a different kind throws.
class Symbol {
 public:
  static Symbol intern(std::string_view name, SymbolKind kind);
  static std::optional<Symbol> lookup(std::string_view name);

  const std::string& name() const;
  SymbolKind kind() const;
  std::uint32_t id() const { return id_; }

  bool operator==(Symbol o) const { return id_ == o.id_; }
  bool operator!=(Symbol o) const { return id_ != o.id_; }
  bool operator<(Symbol o) const { return id_ < o.id_; }

  /// Rehydrates a symbol from an id previously obtained via id().
  static Symbol from_id(std::uint32_t id) { return Symbol(id); }

 private:
  explicit Symbol(std::uint32_t id) : id_(id) {}
  std::uint32_t id_;
};

struct SymbolHash {
  std::size_t operator()(Symbol s) const { return s.id(); }
};

/// The fixed prolonged-space variables (t, x and the jet coordinates of u, v).
struct Vars {
  Symbol t, x, u, v;
  Symbol u_t, v_t, u_x, v_x, u_xx, v_xx, u_xt, v_xt, u_tt, v_tt;
};

/// Reserved symbols, interned once per process.
const Vars& vars();

bool is_reserved(Symbol s);

}  // namespace rdsym
