#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "abt/contexts.hpp"
#include "abt/error.hpp"
#include "abt/signature.hpp"
#include "abt/sorts.hpp"

namespace abt {

class Term;

struct VarTerm {
  std::string name;
};

struct MetaTerm {
  std::string name;
  std::vector<std::string> params;
  std::vector<Term> args;
};

struct Abstraction;

struct OpTerm {
  OperatorInst inst;
  std::vector<Abstraction> args;
};

using TermNode = std::variant<VarTerm, MetaTerm, OpTerm>;

/// An abstract binding tree. Immutable; copies share structure.
class Term {
 public:
  static Term var(std::string name);
  static Term meta(std::string name, std::vector<std::string> params, std::vector<Term> args);
  static Term op(OperatorInst inst, std::vector<Abstraction> args);

  const TermNode& node() const { return *node_; }

  bool is_var() const { return std::holds_alternative<VarTerm>(*node_); }
  bool is_meta() const { return std::holds_alternative<MetaTerm>(*node_); }
  bool is_op() const { return std::holds_alternative<OpTerm>(*node_); }

  const VarTerm& as_var() const { return std::get<VarTerm>(*node_); }
  const MetaTerm& as_meta() const { return std::get<MetaTerm>(*node_); }
  const OpTerm& as_op() const { return std::get<OpTerm>(*node_); }

  friend bool operator==(const Term& a, const Term& b);

 private:
  explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const TermNode> node_;
};

/// A binder node packaging bound symbols and bound variables with a body.
struct Abstraction {
  std::vector<std::pair<std::string, Sort>> bound_symbols;
  std::vector<std::pair<std::string, Sort>> bound_vars;
  Term body;

  explicit Abstraction(Term body_) : body(std::move(body_)) {}

  Abstraction(std::vector<std::pair<std::string, Sort>> symbols,
              std::vector<std::pair<std::string, Sort>> vars, Term body_)
      : bound_symbols(std::move(symbols)), bound_vars(std::move(vars)), body(std::move(body_)) {
    std::set<std::string> seen;
    for (const auto& [n, s] : bound_symbols) {
      if (!seen.insert(n).second) {
        throw Error(ErrorCode::DuplicateSymbol, "abstraction binds symbol '" + n + "' twice");
      }
    }
    seen.clear();
    for (const auto& [n, s] : bound_vars) {
      if (!seen.insert(n).second) {
        throw Error(ErrorCode::DuplicateVariable, "abstraction binds variable '" + n + "' twice");
      }
    }
  }

  bool binds_nothing() const { return bound_symbols.empty() && bound_vars.empty(); }

  friend bool operator==(const Abstraction& a, const Abstraction& b) {
    return a.bound_symbols == b.bound_symbols && a.bound_vars == b.bound_vars && a.body == b.body;
  }
};

inline Term Term::var(std::string name) {
  return Term(std::make_shared<const TermNode>(VarTerm{std::move(name)}));
}

inline Term Term::meta(std::string name, std::vector<std::string> params, std::vector<Term> args) {
  return Term(std::make_shared<const TermNode>(MetaTerm{std::move(name), std::move(params), std::move(args)}));
}

inline Term Term::op(OperatorInst inst, std::vector<Abstraction> args) {
  return Term(std::make_shared<const TermNode>(OpTerm{std::move(inst), std::move(args)}));
}

inline bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->index() != b.node_->index()) return false;
  if (a.is_var()) return a.as_var().name == b.as_var().name;
  if (a.is_meta()) {
    const MetaTerm& x = a.as_meta();
    const MetaTerm& y = b.as_meta();
    return x.name == y.name && x.params == y.params && x.args == y.args;
  }
  const OpTerm& x = a.as_op();
  const OpTerm& y = b.as_op();
  return x.inst == y.inst && x.args == y.args;
}

namespace detail {

/// Collects every symbol name and variable name occurring anywhere in the
/// term, binding positions included. Used to build avoid-sets for freshening.
inline void collect_names(const Term& t, std::set<std::string>& syms, std::set<std::string>& vars);

inline void collect_names(const Abstraction& e, std::set<std::string>& syms,
                          std::set<std::string>& vars) {
  for (const auto& [n, s] : e.bound_symbols) syms.insert(n);
  for (const auto& [n, s] : e.bound_vars) vars.insert(n);
  collect_names(e.body, syms, vars);
}

inline void collect_names(const Term& t, std::set<std::string>& syms,
                          std::set<std::string>& vars) {
  if (t.is_var()) {
    vars.insert(t.as_var().name);
  } else if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    for (const std::string& u : m.params) syms.insert(u);
    for (const Term& a : m.args) collect_names(a, syms, vars);
  } else {
    const OpTerm& o = t.as_op();
    for (const std::string& u : o.inst.params) syms.insert(u);
    for (const Abstraction& e : o.args) collect_names(e, syms, vars);
  }
}

/// Deterministic fresh name: strip any trailing digits to get a stem, then
/// append the smallest numeric suffix not present in `avoid`.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  std::string stem = base;
  while (!stem.empty() && stem.back() >= '0' && stem.back() <= '9') stem.pop_back();
  if (stem.empty()) stem = "x";
  for (unsigned long k = 1;; ++k) {
    std::string candidate = stem + std::to_string(k);
    if (!avoid.count(candidate)) return candidate;
  }
}

/// Renames bound names through the given maps, dropping entries shadowed by
/// inner binders. Targets must be fresh for the whole term (the callers
/// guarantee this), so capture cannot occur.
inline Term apply_bound_renaming(const Term& t, const std::map<std::string, std::string>& syms,
                                 const std::map<std::string, std::string>& vars);

inline Abstraction apply_bound_renaming(const Abstraction& e,
                                        std::map<std::string, std::string> syms,
                                        std::map<std::string, std::string> vars) {
  for (const auto& [n, s] : e.bound_symbols) syms.erase(n);
  for (const auto& [n, s] : e.bound_vars) vars.erase(n);
  if (syms.empty() && vars.empty()) return e;
  return Abstraction(e.bound_symbols, e.bound_vars, apply_bound_renaming(e.body, syms, vars));
}

inline Term apply_bound_renaming(const Term& t, const std::map<std::string, std::string>& syms,
                                 const std::map<std::string, std::string>& vars) {
  if (syms.empty() && vars.empty()) return t;
  if (t.is_var()) {
    auto it = vars.find(t.as_var().name);
    return it == vars.end() ? t : Term::var(it->second);
  }
  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    std::vector<std::string> params;
    params.reserve(m.params.size());
    for (const std::string& u : m.params) {
      auto it = syms.find(u);
      params.push_back(it == syms.end() ? u : it->second);
    }
    std::vector<Term> args;
    args.reserve(m.args.size());
    for (const Term& a : m.args) args.push_back(apply_bound_renaming(a, syms, vars));
    return Term::meta(m.name, std::move(params), std::move(args));
  }
  const OpTerm& o = t.as_op();
  std::vector<std::string> params;
  params.reserve(o.inst.params.size());
  for (const std::string& u : o.inst.params) {
    auto it = syms.find(u);
    params.push_back(it == syms.end() ? u : it->second);
  }
  std::vector<Abstraction> args;
  args.reserve(o.args.size());
  for (const Abstraction& e : o.args) args.push_back(apply_bound_renaming(e, syms, vars));
  return Term::op(OperatorInst{o.inst.decl, std::move(params)}, std::move(args));
}

/// Returns an alpha-equal abstraction whose binder names avoid the given
/// sets. New names are deterministic (smallest unused numeric suffix) and
/// fresh for everything occurring in the abstraction.
inline Abstraction freshen_binders(const Abstraction& e, const std::set<std::string>& avoid_syms,
                                   const std::set<std::string>& avoid_vars) {
  bool clash = false;
  for (const auto& [n, s] : e.bound_symbols) {
    if (avoid_syms.count(n)) clash = true;
  }
  for (const auto& [n, s] : e.bound_vars) {
    if (avoid_vars.count(n)) clash = true;
  }
  if (!clash) return e;

  std::set<std::string> all_syms;
  std::set<std::string> all_vars;
  collect_names(e, all_syms, all_vars);

  std::set<std::string> taboo_syms = avoid_syms;
  taboo_syms.insert(all_syms.begin(), all_syms.end());
  std::set<std::string> taboo_vars = avoid_vars;
  taboo_vars.insert(all_vars.begin(), all_vars.end());

  std::map<std::string, std::string> sym_map;
  std::map<std::string, std::string> var_map;
  std::vector<std::pair<std::string, Sort>> new_syms;
  std::vector<std::pair<std::string, Sort>> new_vars;
  for (const auto& [n, s] : e.bound_symbols) {
    if (avoid_syms.count(n)) {
      std::string fresh = fresh_name(n, taboo_syms);
      taboo_syms.insert(fresh);
      sym_map.emplace(n, fresh);
      new_syms.emplace_back(fresh, s);
    } else {
      new_syms.emplace_back(n, s);
    }
  }
  for (const auto& [n, s] : e.bound_vars) {
    if (avoid_vars.count(n)) {
      std::string fresh = fresh_name(n, taboo_vars);
      taboo_vars.insert(fresh);
      var_map.emplace(n, fresh);
      new_vars.emplace_back(fresh, s);
    } else {
      new_vars.emplace_back(n, s);
    }
  }
  return Abstraction(std::move(new_syms), std::move(new_vars),
                     apply_bound_renaming(e.body, sym_map, var_map));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sort checking
// ---------------------------------------------------------------------------

namespace detail {

inline Sort check_term(const MetaCtx& metas, const SymbolCtx& syms, const VarCtx& vars,
                       const Term& term, TermPath& path);

inline Valence check_abs_at(const MetaCtx& metas, const SymbolCtx& syms, const VarCtx& vars,
                            const Abstraction& abs, TermPath& path) {
  // Binders that collide with the ambient contexts are alpha-renamed before
  // the contexts are extended; the judgment is stable under this because
  // terms are identified up to alpha-equivalence.
  const Abstraction fresh = freshen_binders(abs, syms.names(), vars.names());
  SymbolCtx inner_syms = syms;
  VarCtx inner_vars = vars;
  std::vector<Sort> symbol_sorts;
  std::vector<Sort> variable_sorts;
  for (const auto& [n, s] : fresh.bound_symbols) {
    inner_syms = inner_syms.extended(n, s);
    symbol_sorts.push_back(s);
  }
  for (const auto& [n, s] : fresh.bound_vars) {
    inner_vars = inner_vars.extended(n, s);
    variable_sorts.push_back(s);
  }
  Sort target = check_term(metas, inner_syms, inner_vars, fresh.body, path);
  return Valence{std::move(symbol_sorts), std::move(variable_sorts), std::move(target)};
}

inline Sort check_term(const MetaCtx& metas, const SymbolCtx& syms, const VarCtx& vars,
                       const Term& term, TermPath& path) {
  if (term.is_var()) {
    const std::string& x = term.as_var().name;
    if (const Sort* s = vars.find(x)) return *s;
    throw Error(ErrorCode::UnboundVariable, "unbound variable '" + x + "'", path);
  }

  if (term.is_meta()) {
    const MetaTerm& m = term.as_meta();
    const Valence* valence = metas.find(m.name);
    if (valence == nullptr) {
      throw Error(ErrorCode::UnboundMetavariable, "unbound metavariable '" + m.name + "'", path);
    }
    if (m.params.size() != valence->symbol_sorts.size()) {
      throw Error(ErrorCode::ArityMismatch,
                  "metavariable '" + m.name + "' expects " +
                      std::to_string(valence->symbol_sorts.size()) + " parameter(s), got " +
                      std::to_string(m.params.size()),
                  path);
    }
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      const Sort* found = syms.find(m.params[i]);
      if (found == nullptr) {
        throw Error(ErrorCode::UnboundSymbol,
                    "symbol '" + m.params[i] + "' in " + m.name + "{...} is not bound", path);
      }
      if (!(*found == valence->symbol_sorts[i])) {
        throw Error(ErrorCode::SortMismatch,
                    "parameter '" + m.params[i] + "' of '" + m.name + "' has sort '" +
                        found->name + "', expected '" + valence->symbol_sorts[i].name + "'",
                    path);
      }
    }
    if (m.args.size() != valence->variable_sorts.size()) {
      throw Error(ErrorCode::ArityMismatch,
                  "metavariable '" + m.name + "' expects " +
                      std::to_string(valence->variable_sorts.size()) + " argument(s), got " +
                      std::to_string(m.args.size()),
                  path);
    }
    for (std::size_t i = 0; i < m.args.size(); ++i) {
      path.push_back(m.name + "." + std::to_string(i));
      Sort found = check_term(metas, syms, vars, m.args[i], path);
      if (!(found == valence->variable_sorts[i])) {
        throw Error(ErrorCode::SortMismatch,
                    "argument " + std::to_string(i) + " of '" + m.name + "' has sort '" +
                        found.name + "', expected '" + valence->variable_sorts[i].name + "'",
                    path);
      }
      path.pop_back();
    }
    return valence->target;
  }

  const OpTerm& o = term.as_op();
  Arity arity;
  try {
    arity = check_operator_params(syms, o.inst);
  } catch (Error& e) {
    throw Error(e.code(), e.what(), path);
  }
  if (o.args.size() != arity.valences.size()) {
    throw Error(ErrorCode::ArityMismatch,
                "operator " + display_name(o.inst) + " expects " +
                    std::to_string(arity.valences.size()) + " argument(s), got " +
                    std::to_string(o.args.size()),
                path);
  }
  for (std::size_t i = 0; i < o.args.size(); ++i) {
    path.push_back(o.inst.decl->name + "." + std::to_string(i));
    Valence found = check_abs_at(metas, syms, vars, o.args[i], path);
    if (!(found == arity.valences[i])) {
      throw Error(ErrorCode::SortMismatch,
                  "argument " + std::to_string(i) + " of " + display_name(o.inst) +
                      " has valence '" + to_string(found) + "', expected '" +
                      to_string(arity.valences[i]) + "'",
                  path);
    }
    path.pop_back();
  }
  return arity.target;
}

}  // namespace detail

/// Infers the unique sort of `term` in the given contexts, or throws an
/// Error whose path locates the offending subterm.
inline Sort check(const MetaCtx& metas, const SymbolCtx& syms, const VarCtx& vars,
                  const Term& term) {
  TermPath path;
  return detail::check_term(metas, syms, vars, term, path);
}

/// Infers the valence of an abstraction by checking its body under the
/// extended contexts.
inline Valence check_abs(const MetaCtx& metas, const SymbolCtx& syms, const VarCtx& vars,
                         const Abstraction& abs) {
  TermPath path;
  return detail::check_abs_at(metas, syms, vars, abs, path);
}

/// A term packaged with contexts and the sort `check` assigns it.
struct SortedTerm {
  MetaCtx metas;
  SymbolCtx syms;
  VarCtx vars;
  Term term;
  Sort sort;
};

inline SortedTerm make_sorted(MetaCtx metas, SymbolCtx syms, VarCtx vars, Term term) {
  Sort sort = check(metas, syms, vars, term);
  return SortedTerm{std::move(metas), std::move(syms), std::move(vars), std::move(term),
                    std::move(sort)};
}

// ---------------------------------------------------------------------------
// Alpha-equivalence
// ---------------------------------------------------------------------------

/// A term whose bound occurrences have been replaced by binder coordinates;
/// structural equality on canonical terms decides alpha-equivalence.
struct CanonicalTerm {
  Term term;

  friend bool operator==(const CanonicalTerm& a, const CanonicalTerm& b) {
    return a.term == b.term;
  }
};

namespace detail {

struct CanonEnv {
  // name -> (absolute binder level, slot index)
  std::map<std::string, std::pair<std::size_t, std::size_t>> syms;
  std::map<std::string, std::pair<std::size_t, std::size_t>> vars;
  std::size_t depth = 0;  // number of abstraction nodes above the current point
};

inline std::string canon_coord(char kind, std::size_t distance, std::size_t slot) {
  return std::string("#") + kind + std::to_string(distance) + "." + std::to_string(slot);
}

inline Term canonicalize_at(const Term& t, const CanonEnv& env);

inline Abstraction canonicalize_at(const Abstraction& e, CanonEnv env) {
  // Every abstraction node opens a binder level, whether or not it binds.
  std::vector<std::pair<std::string, Sort>> syms;
  std::vector<std::pair<std::string, Sort>> vars;
  for (std::size_t i = 0; i < e.bound_symbols.size(); ++i) {
    env.syms[e.bound_symbols[i].first] = {env.depth, i};
    syms.emplace_back("", e.bound_symbols[i].second);
  }
  for (std::size_t i = 0; i < e.bound_vars.size(); ++i) {
    env.vars[e.bound_vars[i].first] = {env.depth, i};
    vars.emplace_back("", e.bound_vars[i].second);
  }
  env.depth += 1;
  Term body = canonicalize_at(e.body, env);
  Abstraction out{std::move(body)};
  out.bound_symbols = std::move(syms);
  out.bound_vars = std::move(vars);
  return out;
}

inline std::string canon_sym(const std::string& u, const CanonEnv& env) {
  auto it = env.syms.find(u);
  if (it == env.syms.end()) return u;
  return canon_coord('s', env.depth - 1 - it->second.first, it->second.second);
}

inline Term canonicalize_at(const Term& t, const CanonEnv& env) {
  if (t.is_var()) {
    const std::string& x = t.as_var().name;
    auto it = env.vars.find(x);
    if (it == env.vars.end()) return t;
    return Term::var(canon_coord('v', env.depth - 1 - it->second.first, it->second.second));
  }
  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    std::vector<std::string> params;
    params.reserve(m.params.size());
    for (const std::string& u : m.params) params.push_back(canon_sym(u, env));
    std::vector<Term> args;
    args.reserve(m.args.size());
    for (const Term& a : m.args) args.push_back(canonicalize_at(a, env));
    return Term::meta(m.name, std::move(params), std::move(args));
  }
  const OpTerm& o = t.as_op();
  std::vector<std::string> params;
  params.reserve(o.inst.params.size());
  for (const std::string& u : o.inst.params) params.push_back(canon_sym(u, env));
  std::vector<Abstraction> args;
  args.reserve(o.args.size());
  for (const Abstraction& e : o.args) args.push_back(canonicalize_at(e, env));
  return Term::op(OperatorInst{o.inst.decl, std::move(params)}, std::move(args));
}

}  // namespace detail

/// Replaces every bound occurrence by its binder's (distance, slot)
/// coordinate and erases binder names, leaving free names intact.
inline CanonicalTerm canonicalize(const Term& term) {
  return CanonicalTerm{detail::canonicalize_at(term, detail::CanonEnv{})};
}

inline CanonicalTerm canonicalize(const Abstraction& abs) {
  detail::CanonEnv env;
  Abstraction canon = detail::canonicalize_at(abs, env);
  // Wrap in a dummy term node so CanonicalTerm comparison covers binder sorts.
  return CanonicalTerm{Term::op(
      OperatorInst{std::make_shared<const OperatorDecl>(OperatorDecl{"#abs", {}, {}}), {}},
      {std::move(canon)})};
}

/// True iff the two terms differ only in the choice of bound names.
inline bool alpha_eq(const Term& a, const Term& b) {
  return canonicalize(a) == canonicalize(b);
}

inline bool alpha_eq(const Abstraction& a, const Abstraction& b) {
  return canonicalize(a) == canonicalize(b);
}

}  // namespace abt
