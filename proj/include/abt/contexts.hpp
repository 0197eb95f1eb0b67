#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abt/error.hpp"
#include "abt/sorts.hpp"

namespace abt {

namespace detail {

template <typename Payload>
class NamedCtx {
 public:
  using Binding = std::pair<std::string, Payload>;

  NamedCtx() = default;

  const std::vector<Binding>& bindings() const { return bindings_; }
  std::size_t size() const { return bindings_.size(); }
  bool empty() const { return bindings_.empty(); }

  bool binds(std::string_view name) const { return find(name) != nullptr; }

  const Payload* find(std::string_view name) const {
    for (const auto& [n, p] : bindings_) {
      if (n == name) return &p;
    }
    return nullptr;
  }

  std::set<std::string> names() const {
    std::set<std::string> out;
    for (const auto& [n, p] : bindings_) out.insert(n);
    return out;
  }

  /// Order-insensitive equality; the calculus only ever consults membership.
  bool same_bindings(const NamedCtx& other) const {
    if (bindings_.size() != other.bindings_.size()) return false;
    for (const auto& [n, p] : bindings_) {
      const Payload* q = other.find(n);
      if (q == nullptr || !(*q == p)) return false;
    }
    return true;
  }

  friend bool operator==(const NamedCtx& a, const NamedCtx& b) {
    return a.same_bindings(b);
  }

 protected:
  void push(std::string name, Payload payload, ErrorCode dup, const char* what) {
    if (name.empty()) {
      throw Error(ErrorCode::InvalidName, std::string("empty ") + what + " name");
    }
    if (binds(name)) {
      throw Error(dup, std::string("duplicate ") + what + " '" + name + "'");
    }
    bindings_.emplace_back(std::move(name), std::move(payload));
  }

  std::vector<Binding> bindings_;
};

}  // namespace detail

/// A telescoping context of symbols with pairwise distinct names.
class SymbolCtx : public detail::NamedCtx<Sort> {
 public:
  SymbolCtx() = default;

  static SymbolCtx from(const std::vector<Binding>& bindings) {
    SymbolCtx ctx;
    for (const auto& [n, s] : bindings) ctx.push(n, s, ErrorCode::DuplicateSymbol, "symbol");
    return ctx;
  }

  SymbolCtx extended(std::string name, Sort sort) const {
    SymbolCtx out = *this;
    out.push(std::move(name), std::move(sort), ErrorCode::DuplicateSymbol, "symbol");
    return out;
  }

  /// Removes the unique binding for `name`, preserving the order of the rest.
  SymbolCtx removed(std::string_view name) const {
    if (!binds(name)) {
      throw Error(ErrorCode::NotFound, "symbol '" + std::string(name) + "' is not bound");
    }
    SymbolCtx out;
    for (const auto& b : bindings_) {
      if (b.first != name) out.bindings_.push_back(b);
    }
    return out;
  }
};

/// A context of variables with pairwise distinct names.
class VarCtx : public detail::NamedCtx<Sort> {
 public:
  VarCtx() = default;

  static VarCtx from(const std::vector<Binding>& bindings) {
    VarCtx ctx;
    for (const auto& [n, s] : bindings) ctx.push(n, s, ErrorCode::DuplicateVariable, "variable");
    return ctx;
  }

  VarCtx extended(std::string name, Sort sort) const {
    VarCtx out = *this;
    out.push(std::move(name), std::move(sort), ErrorCode::DuplicateVariable, "variable");
    return out;
  }
};

/// A context binding valences to metavariables.
class MetaCtx : public detail::NamedCtx<Valence> {
 public:
  MetaCtx() = default;

  static MetaCtx from(const std::vector<Binding>& bindings) {
    MetaCtx ctx;
    for (const auto& [n, v] : bindings) ctx.push(n, v, ErrorCode::DuplicateMetavariable, "metavariable");
    return ctx;
  }

  MetaCtx extended(std::string name, Valence valence) const {
    MetaCtx out = *this;
    out.push(std::move(name), std::move(valence), ErrorCode::DuplicateMetavariable, "metavariable");
    return out;
  }
};

inline SymbolCtx extend_symbols(const SymbolCtx& ctx, std::string name, Sort sort) {
  return ctx.extended(std::move(name), std::move(sort));
}

inline VarCtx extend_vars(const VarCtx& ctx, std::string name, Sort sort) {
  return ctx.extended(std::move(name), std::move(sort));
}

inline MetaCtx extend_metas(const MetaCtx& ctx, std::string name, Valence valence) {
  return ctx.extended(std::move(name), std::move(valence));
}

inline Sort lookup(const SymbolCtx& ctx, std::string_view name) {
  if (const Sort* s = ctx.find(name)) return *s;
  throw Error(ErrorCode::NotFound, "symbol '" + std::string(name) + "' is not bound");
}

inline Sort lookup(const VarCtx& ctx, std::string_view name) {
  if (const Sort* s = ctx.find(name)) return *s;
  throw Error(ErrorCode::NotFound, "variable '" + std::string(name) + "' is not bound");
}

inline Valence lookup(const MetaCtx& ctx, std::string_view name) {
  if (const Valence* v = ctx.find(name)) return *v;
  throw Error(ErrorCode::NotFound, "metavariable '" + std::string(name) + "' is not bound");
}

/// An injective, sort-preserving map between symbol contexts.
class Renaming {
 public:
  static Renaming make(SymbolCtx dom, SymbolCtx cod,
                       const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::map<std::string, std::string> map;
    for (const auto& [from, to] : pairs) {
      if (!dom.binds(from)) {
        throw Error(ErrorCode::NotFound,
                    "renaming maps '" + from + "', which is not in the domain");
      }
      if (map.count(from)) {
        throw Error(ErrorCode::DuplicateSymbol, "renaming maps '" + from + "' twice");
      }
      map.emplace(from, to);
    }
    for (const auto& [name, sort] : dom.bindings()) {
      auto it = map.find(name);
      if (it == map.end()) {
        throw Error(ErrorCode::IncompleteMap, "renaming does not map '" + name + "'");
      }
      const Sort* target = cod.find(it->second);
      if (target == nullptr || !(*target == sort)) {
        throw Error(ErrorCode::SortViolation,
                    "renaming sends '" + name + ":" + sort.name + "' to '" + it->second +
                        "', which is not bound at that sort in the codomain");
      }
    }
    std::map<std::string, std::string> seen;  // image -> preimage
    for (const auto& [from, to] : map) {
      auto [it, fresh] = seen.emplace(to, from);
      if (!fresh) {
        throw Error(ErrorCode::NotInjective,
                    "renaming sends both '" + it->second + "' and '" + from + "' to '" + to + "'");
      }
    }
    return Renaming(std::move(dom), std::move(cod), std::move(map));
  }

  static Renaming identity(const SymbolCtx& ctx) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [name, sort] : ctx.bindings()) pairs.emplace_back(name, name);
    return make(ctx, ctx, pairs);
  }

  const SymbolCtx& dom() const { return dom_; }
  const SymbolCtx& cod() const { return cod_; }
  const std::map<std::string, std::string>& mapping() const { return map_; }

  const std::string& apply(std::string_view name) const {
    auto it = map_.find(std::string(name));
    if (it == map_.end()) {
      throw Error(ErrorCode::SymbolNotInDomain,
                  "symbol '" + std::string(name) + "' is not in the renaming's domain");
    }
    return it->second;
  }

  bool is_identity() const {
    return std::all_of(map_.begin(), map_.end(),
                       [](const auto& kv) { return kv.first == kv.second; });
  }

  friend bool operator==(const Renaming& a, const Renaming& b) {
    return a.dom_ == b.dom_ && a.cod_ == b.cod_ && a.map_ == b.map_;
  }

 private:
  Renaming(SymbolCtx dom, SymbolCtx cod, std::map<std::string, std::string> map)
      : dom_(std::move(dom)), cod_(std::move(cod)), map_(std::move(map)) {}

  SymbolCtx dom_;
  SymbolCtx cod_;
  std::map<std::string, std::string> map_;
};

inline Renaming make_renaming(SymbolCtx dom, SymbolCtx cod,
                              const std::vector<std::pair<std::string, std::string>>& pairs) {
  return Renaming::make(std::move(dom), std::move(cod), pairs);
}

/// Composite `second . first`; defined when first.cod matches second.dom.
inline Renaming compose_renamings(const Renaming& second, const Renaming& first) {
  if (!(first.cod() == second.dom())) {
    throw Error(ErrorCode::ContextMismatch,
                "renamings do not compose: codomain of the first differs from the "
                "domain of the second");
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [from, mid] : first.mapping()) {
    pairs.emplace_back(from, second.apply(mid));
  }
  return Renaming::make(first.dom(), second.cod(), pairs);
}

}  // namespace abt
