#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "abt/contexts.hpp"
#include "abt/error.hpp"
#include "abt/signature.hpp"
#include "abt/term.hpp"

namespace abt {

// ---------------------------------------------------------------------------
// Free names
// ---------------------------------------------------------------------------

namespace detail {

inline void free_vars_into(const Term& t, std::set<std::string>& out);

inline void free_vars_into(const Abstraction& e, std::set<std::string>& out) {
  std::set<std::string> inner;
  free_vars_into(e.body, inner);
  for (const auto& [n, s] : e.bound_vars) inner.erase(n);
  out.insert(inner.begin(), inner.end());
}

inline void free_vars_into(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) {
    out.insert(t.as_var().name);
  } else if (t.is_meta()) {
    for (const Term& a : t.as_meta().args) free_vars_into(a, out);
  } else {
    for (const Abstraction& e : t.as_op().args) free_vars_into(e, out);
  }
}

inline void free_syms_into(const Term& t, std::set<std::string>& out);

inline void free_syms_into(const Abstraction& e, std::set<std::string>& out) {
  std::set<std::string> inner;
  free_syms_into(e.body, inner);
  for (const auto& [n, s] : e.bound_symbols) inner.erase(n);
  out.insert(inner.begin(), inner.end());
}

inline void free_syms_into(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) return;
  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    out.insert(m.params.begin(), m.params.end());
    for (const Term& a : m.args) free_syms_into(a, out);
  } else {
    const OpTerm& o = t.as_op();
    for (const auto& [name, sort] : operator_support(o.inst)) out.insert(name);
    for (const Abstraction& e : o.args) free_syms_into(e, out);
  }
}

}  // namespace detail

inline std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  detail::free_vars_into(t, out);
  return out;
}

inline std::set<std::string> free_vars(const Abstraction& e) {
  std::set<std::string> out;
  detail::free_vars_into(e, out);
  return out;
}

inline std::set<std::string> free_syms(const Term& t) {
  std::set<std::string> out;
  detail::free_syms_into(t, out);
  return out;
}

inline std::set<std::string> free_syms(const Abstraction& e) {
  std::set<std::string> out;
  detail::free_syms_into(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Symbol renaming
// ---------------------------------------------------------------------------

namespace detail {

/// Applies a (possibly partial, possibly non-injective) symbol map to every
/// free symbol occurrence. Unmapped names are fixed. Binders that collide
/// with `avoid` are freshened; `avoid` must contain every map value the
/// caller cares about, so capture cannot occur.
inline Term substitute_symbols(const Term& t, const std::map<std::string, std::string>& map,
                               const std::set<std::string>& avoid);

inline Abstraction substitute_symbols(const Abstraction& e,
                                      std::map<std::string, std::string> map,
                                      std::set<std::string> avoid) {
  std::set<std::string> all_syms;
  std::set<std::string> all_vars;
  std::vector<std::pair<std::string, Sort>> binders;
  binders.reserve(e.bound_symbols.size());
  for (const auto& [n, s] : e.bound_symbols) {
    map.erase(n);  // the binder shadows any outer mapping
    if (avoid.count(n)) {
      if (all_syms.empty() && all_vars.empty()) collect_names(e, all_syms, all_vars);
      std::set<std::string> taboo = avoid;
      taboo.insert(all_syms.begin(), all_syms.end());
      for (const auto& [k, v] : map) {
        taboo.insert(k);
        taboo.insert(v);
      }
      for (const auto& [b, s2] : binders) taboo.insert(b);
      std::string fresh = fresh_name(n, taboo);
      map[n] = fresh;
      avoid.insert(fresh);
      binders.emplace_back(fresh, s);
    } else {
      binders.emplace_back(n, s);
      avoid.insert(n);
    }
  }
  Term body = substitute_symbols(e.body, map, avoid);
  return Abstraction(std::move(binders), e.bound_vars, std::move(body));
}

inline Term substitute_symbols(const Term& t, const std::map<std::string, std::string>& map,
                               const std::set<std::string>& avoid) {
  if (map.empty()) return t;
  if (t.is_var()) return t;
  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    std::vector<std::string> params;
    params.reserve(m.params.size());
    for (const std::string& u : m.params) {
      auto it = map.find(u);
      params.push_back(it == map.end() ? u : it->second);
    }
    std::vector<Term> args;
    args.reserve(m.args.size());
    for (const Term& a : m.args) args.push_back(substitute_symbols(a, map, avoid));
    return Term::meta(m.name, std::move(params), std::move(args));
  }
  const OpTerm& o = t.as_op();
  std::vector<std::string> params;
  params.reserve(o.inst.params.size());
  for (const std::string& u : o.inst.params) {
    auto it = map.find(u);
    params.push_back(it == map.end() ? u : it->second);
  }
  std::vector<Abstraction> args;
  args.reserve(o.args.size());
  for (const Abstraction& e : o.args) args.push_back(substitute_symbols(e, map, avoid));
  return Term::op(OperatorInst{o.inst.decl, std::move(params)}, std::move(args));
}

}  // namespace detail

/// Lifts the renaming through the term: metavariable parameters and operator
/// parameters are mapped pointwise, binders are freshened when they collide
/// with the codomain. Requires FS(term) to lie in the renaming's domain.
inline Term rename(const Term& term, const Renaming& renaming) {
  for (const std::string& u : free_syms(term)) {
    if (!renaming.dom().binds(u)) {
      throw Error(ErrorCode::SymbolNotInDomain,
                  "symbol '" + u + "' is not in the renaming's domain");
    }
  }
  return detail::substitute_symbols(term, renaming.mapping(), renaming.cod().names());
}

inline Abstraction rename(const Abstraction& abs, const Renaming& renaming) {
  for (const std::string& u : free_syms(abs)) {
    if (!renaming.dom().binds(u)) {
      throw Error(ErrorCode::SymbolNotInDomain,
                  "symbol '" + u + "' is not in the renaming's domain");
    }
  }
  return detail::substitute_symbols(abs, renaming.mapping(), renaming.cod().names());
}

// ---------------------------------------------------------------------------
// Variable substitution
// ---------------------------------------------------------------------------

namespace detail {

inline Term subst_map(const Term& t, const std::map<std::string, Term>& map);

inline Abstraction subst_map(const Abstraction& e, std::map<std::string, Term> map) {
  for (const auto& [n, s] : e.bound_vars) map.erase(n);  // shadowed binders stop substitution
  // Restrict to entries that can actually fire.
  std::set<std::string> body_fv;
  free_vars_into(e.body, body_fv);
  for (auto it = map.begin(); it != map.end();) {
    if (body_fv.count(it->first)) {
      ++it;
    } else {
      it = map.erase(it);
    }
  }
  if (map.empty()) return e;

  std::set<std::string> avoid_vars;
  std::set<std::string> avoid_syms;
  for (const auto& [x, n] : map) {
    avoid_vars.insert(x);
    for (const std::string& v : free_vars(n)) avoid_vars.insert(v);
    for (const std::string& u : free_syms(n)) avoid_syms.insert(u);
  }
  Abstraction fresh = freshen_binders(e, avoid_syms, avoid_vars);
  return Abstraction(fresh.bound_symbols, fresh.bound_vars, subst_map(fresh.body, map));
}

inline Term subst_map(const Term& t, const std::map<std::string, Term>& map) {
  if (map.empty()) return t;
  if (t.is_var()) {
    auto it = map.find(t.as_var().name);
    return it == map.end() ? t : it->second;
  }
  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    std::vector<Term> args;
    args.reserve(m.args.size());
    for (const Term& a : m.args) args.push_back(subst_map(a, map));
    return Term::meta(m.name, m.params, std::move(args));
  }
  const OpTerm& o = t.as_op();
  std::vector<Abstraction> args;
  args.reserve(o.args.size());
  for (const Abstraction& e : o.args) args.push_back(subst_map(e, map));
  return Term::op(o.inst, std::move(args));
}

}  // namespace detail

/// Simultaneous capture-avoiding substitution; replacement terms are never
/// re-scanned for the other targets.
inline Term subst_simultaneous(const std::vector<std::pair<std::string, Term>>& pairs,
                               const Term& term) {
  std::map<std::string, Term> map;
  for (const auto& [x, n] : pairs) {
    if (!map.emplace(x, n).second) {
      throw Error(ErrorCode::DuplicateTarget, "variable '" + x + "' substituted twice");
    }
  }
  return detail::subst_map(term, map);
}

/// Capture-avoiding substitution [replacement/var] target. Total up to
/// alpha-equivalence: clashing binders are freshened, never rejected.
inline Term subst(const Term& replacement, const std::string& var, const Term& target) {
  return subst_simultaneous({{var, replacement}}, target);
}

// ---------------------------------------------------------------------------
// Metavariable substitution
// ---------------------------------------------------------------------------

namespace detail {

inline Term msubst_at(const Abstraction& repl, const std::string& meta, const Term& t) {
  if (t.is_var()) return t;
  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    std::vector<Term> args;
    args.reserve(m.args.size());
    for (const Term& a : m.args) args.push_back(msubst_at(repl, meta, a));
    if (m.name != meta) return Term::meta(m.name, m.params, std::move(args));

    if (m.params.size() != repl.bound_symbols.size() ||
        args.size() != repl.bound_vars.size()) {
      throw Error(ErrorCode::ValenceMismatch,
                  "metavariable '" + meta + "' applied to " + std::to_string(m.params.size()) +
                      " parameter(s) and " + std::to_string(args.size()) +
                      " argument(s), but the substituted abstraction binds " +
                      std::to_string(repl.bound_symbols.size()) + " symbol(s) and " +
                      std::to_string(repl.bound_vars.size()) + " variable(s)");
    }
    // Instantiate the abstraction at the supplied parameters and arguments:
    // rename the bound symbols to the actual parameters, then substitute the
    // (already substituted) arguments simultaneously for the bound variables.
    std::map<std::string, std::string> sym_map;
    std::set<std::string> avoid;
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      sym_map[repl.bound_symbols[i].first] = m.params[i];
      avoid.insert(m.params[i]);
    }
    Term body = substitute_symbols(repl.body, sym_map, avoid);
    std::vector<std::pair<std::string, Term>> var_pairs;
    var_pairs.reserve(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) {
      var_pairs.emplace_back(repl.bound_vars[i].first, args[i]);
    }
    return subst_simultaneous(var_pairs, body);
  }
  const OpTerm& o = t.as_op();
  std::set<std::string> avoid_syms = free_syms(repl);
  std::set<std::string> avoid_vars = free_vars(repl);
  std::vector<Abstraction> out_args;
  out_args.reserve(o.args.size());
  for (const Abstraction& e : o.args) {
    Abstraction fresh = freshen_binders(e, avoid_syms, avoid_vars);
    out_args.push_back(
        Abstraction(fresh.bound_symbols, fresh.bound_vars, msubst_at(repl, meta, fresh.body)));
  }
  return Term::op(o.inst, std::move(out_args));
}

}  // namespace detail

/// Hereditary metavariable substitution: occurrences of `meta` are replaced
/// by instantiating `replacement` at the occurrence's parameters and
/// arguments.
inline Term msubst(const Abstraction& replacement, const std::string& meta, const Term& target) {
  return detail::msubst_at(replacement, meta, target);
}

// ---------------------------------------------------------------------------
// Term-model interpretation
// ---------------------------------------------------------------------------

/// An environment for the free term model: metavariables map to abstractions,
/// symbols to symbols, variables to terms, all in the target world.
struct Environment {
  std::map<std::string, Abstraction> meta_env;
  std::map<std::string, std::string> sym_env;
  std::map<std::string, Term> var_env;

  static Environment identity(const MetaCtx& metas, const SymbolCtx& syms, const VarCtx& vars) {
    Environment env;
    for (const auto& [m, valence] : metas.bindings()) {
      std::vector<std::pair<std::string, Sort>> ps;
      std::vector<std::pair<std::string, Sort>> xs;
      std::vector<std::string> params;
      std::vector<Term> args;
      for (std::size_t i = 0; i < valence.symbol_sorts.size(); ++i) {
        std::string p = "p" + std::to_string(i);
        ps.emplace_back(p, valence.symbol_sorts[i]);
        params.push_back(p);
      }
      for (std::size_t i = 0; i < valence.variable_sorts.size(); ++i) {
        std::string q = "q" + std::to_string(i);
        xs.emplace_back(q, valence.variable_sorts[i]);
        args.push_back(Term::var(q));
      }
      env.meta_env.emplace(
          m, Abstraction(std::move(ps), std::move(xs), Term::meta(m, params, args)));
    }
    for (const auto& [u, s] : syms.bindings()) env.sym_env.emplace(u, u);
    for (const auto& [x, s] : vars.bindings()) env.var_env.emplace(x, Term::var(x));
    return env;
  }
};

namespace detail {

struct InterpState {
  const std::map<std::string, Abstraction>* meta_env;
  std::map<std::string, std::string> sym_map;
  std::map<std::string, Term> var_map;
  std::set<std::string> avoid_syms;
  std::set<std::string> avoid_vars;
};

inline Term interpret_at(const Term& t, const InterpState& st) {
  if (t.is_var()) {
    return st.var_map.at(t.as_var().name);
  }
  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    std::vector<Term> args;
    args.reserve(m.args.size());
    for (const Term& a : m.args) args.push_back(interpret_at(a, st));
    const Abstraction& repl = st.meta_env->at(m.name);

    std::map<std::string, std::string> sym_map;
    std::set<std::string> avoid;
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      const std::string& image = st.sym_map.at(m.params[i]);
      sym_map[repl.bound_symbols[i].first] = image;
      avoid.insert(image);
    }
    Term body = substitute_symbols(repl.body, sym_map, avoid);
    std::vector<std::pair<std::string, Term>> var_pairs;
    var_pairs.reserve(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) {
      var_pairs.emplace_back(repl.bound_vars[i].first, args[i]);
    }
    return subst_simultaneous(var_pairs, body);
  }
  const OpTerm& o = t.as_op();
  std::vector<std::string> params;
  params.reserve(o.inst.params.size());
  for (const std::string& u : o.inst.params) params.push_back(st.sym_map.at(u));
  std::vector<Abstraction> args;
  args.reserve(o.args.size());
  for (const Abstraction& e : o.args) {
    InterpState inner = st;
    std::vector<std::pair<std::string, Sort>> bsyms;
    std::vector<std::pair<std::string, Sort>> bvars;
    std::set<std::string> group;
    for (const auto& [u, s] : e.bound_symbols) {
      std::set<std::string> taboo = inner.avoid_syms;
      taboo.insert(group.begin(), group.end());
      std::string image = fresh_name(u, taboo);
      group.insert(image);
      inner.sym_map[u] = image;
      if (image != u) inner.avoid_syms.insert(image);
      bsyms.emplace_back(image, s);
    }
    group.clear();
    for (const auto& [x, s] : e.bound_vars) {
      std::set<std::string> taboo = inner.avoid_vars;
      taboo.insert(group.begin(), group.end());
      std::string image = fresh_name(x, taboo);
      group.insert(image);
      inner.var_map.insert_or_assign(x, Term::var(image));
      if (image != x) inner.avoid_vars.insert(image);
      bvars.emplace_back(image, s);
    }
    args.push_back(Abstraction(std::move(bsyms), std::move(bvars), interpret_at(e.body, inner)));
  }
  return Term::op(OperatorInst{o.inst.decl, std::move(params)}, std::move(args));
}

}  // namespace detail

/// Interprets a well-sorted term in the free term model: metavariables are
/// resolved from the environment and instantiated by substitution, symbols
/// renamed, variables replaced. The result is alpha-equal to the composition
/// of msubst over the metavariable context, then rename, then simultaneous
/// variable substitution.
inline Term interpret(const MetaCtx& metas, const SymbolCtx& syms, const VarCtx& vars,
                      const Term& term, const Environment& env) {
  check(metas, syms, vars, term);

  for (const auto& [m, valence] : metas.bindings()) {
    auto it = env.meta_env.find(m);
    if (it == env.meta_env.end()) {
      throw Error(ErrorCode::IncompleteEnvironment,
                  "environment has no interpretation for metavariable '" + m + "'");
    }
    const Abstraction& e = it->second;
    bool shape_ok = e.bound_symbols.size() == valence.symbol_sorts.size() &&
                    e.bound_vars.size() == valence.variable_sorts.size();
    if (shape_ok) {
      for (std::size_t i = 0; i < e.bound_symbols.size(); ++i) {
        if (!(e.bound_symbols[i].second == valence.symbol_sorts[i])) shape_ok = false;
      }
      for (std::size_t i = 0; i < e.bound_vars.size(); ++i) {
        if (!(e.bound_vars[i].second == valence.variable_sorts[i])) shape_ok = false;
      }
    }
    if (!shape_ok) {
      throw Error(ErrorCode::ValenceMismatch,
                  "interpretation of metavariable '" + m + "' does not match its valence " +
                      to_string(valence));
    }
  }
  std::map<std::string, std::string> image;  // injectivity on the symbol context
  for (const auto& [u, s] : syms.bindings()) {
    auto it = env.sym_env.find(u);
    if (it == env.sym_env.end()) {
      throw Error(ErrorCode::IncompleteEnvironment,
                  "environment has no image for symbol '" + u + "'");
    }
    auto [prev, fresh] = image.emplace(it->second, u);
    if (!fresh) {
      throw Error(ErrorCode::NotInjective, "environment sends both '" + prev->second + "' and '" +
                                               u + "' to '" + it->second + "'");
    }
  }
  for (const auto& [x, s] : vars.bindings()) {
    if (!env.var_env.count(x)) {
      throw Error(ErrorCode::IncompleteEnvironment,
                  "environment has no interpretation for variable '" + x + "'");
    }
  }

  detail::InterpState st;
  st.meta_env = &env.meta_env;
  st.sym_map = env.sym_env;
  for (const auto& [x, t] : env.var_env) st.var_map.emplace(x, t);
  for (const auto& [u, v] : env.sym_env) st.avoid_syms.insert(v);
  for (const auto& [m, e] : env.meta_env) {
    detail::collect_names(e, st.avoid_syms, st.avoid_vars);
  }
  for (const auto& [x, t] : env.var_env) {
    detail::collect_names(t, st.avoid_syms, st.avoid_vars);
  }
  return detail::interpret_at(term, st);
}

}  // namespace abt
