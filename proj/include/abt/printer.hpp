#pragma once

#include <string>

#include "abt/contexts.hpp"
#include "abt/term.hpp"

namespace abt {

struct PrintOptions {
  bool unicode = false;  // emit aleph / nabla / diamond / stream glyphs
  bool sugar = false;    // fold nil/snoc/sequent/hyp into surface notation
};

namespace detail {

// Precedence levels for sugared output: 0 sequent, 1 telescope chain, 2 atom.
inline std::string print_term_at(const Term& t, const PrintOptions& opts, int level);

inline std::string print_abs_at(const Abstraction& e, const PrintOptions& opts) {
  if (e.binds_nothing()) return print_term_at(e.body, opts, 0);
  std::string out = opts.unicode ? "ℵ" : "\\";
  if (!e.bound_symbols.empty()) {
    out += '{';
    for (std::size_t i = 0; i < e.bound_symbols.size(); ++i) {
      if (i) out += ',';
      out += e.bound_symbols[i].first;
    }
    out += '}';
  }
  if (!e.bound_vars.empty()) {
    out += '[';
    for (std::size_t i = 0; i < e.bound_vars.size(); ++i) {
      if (i) out += ',';
      out += e.bound_vars[i].first;
    }
    out += ']';
  }
  out += '.';
  out += print_term_at(e.body, opts, 0);
  return out;
}

inline bool plain_body_args(const OpTerm& o, std::size_t n) {
  if (o.args.size() != n) return false;
  for (const Abstraction& e : o.args) {
    if (!e.binds_nothing()) return false;
  }
  return true;
}

inline std::string wrap(std::string s, int natural, int required) {
  if (natural < required) return "(" + std::move(s) + ")";
  return s;
}

inline std::string print_head(const OperatorInst& inst, const PrintOptions& opts) {
  std::string name = inst.decl->name;
  if (opts.unicode && name.rfind("nabla[", 0) == 0) {
    name = "∇" + name.substr(5);
  }
  if (!inst.params.empty()) {
    name += '[';
    for (std::size_t i = 0; i < inst.params.size(); ++i) {
      if (i) name += ',';
      name += inst.params[i];
    }
    name += ']';
  }
  return name;
}

inline std::string print_term_at(const Term& t, const PrintOptions& opts, int level) {
  if (t.is_var()) return t.as_var().name;

  if (t.is_meta()) {
    const MetaTerm& m = t.as_meta();
    std::string out = m.name;
    if (!m.params.empty()) {
      out += '{';
      for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (i) out += ',';
        out += m.params[i];
      }
      out += '}';
    }
    if (!m.args.empty() || m.params.empty()) {
      out += '(';
      for (std::size_t i = 0; i < m.args.size(); ++i) {
        if (i) out += ',';
        out += print_term_at(m.args[i], opts, 0);
      }
      out += ')';
    }
    return out;
  }

  const OpTerm& o = t.as_op();
  const std::string& op_name = o.inst.decl->name;
  if (opts.sugar) {
    if (op_name == "nil" && o.inst.params.empty() && o.args.empty()) {
      return opts.unicode ? "⋄" : "<>";
    }
    if (op_name == "hyp" && o.inst.params.size() == 1 && o.args.empty()) {
      return "'" + o.inst.params[0];
    }
    if (op_name == "snoc" && o.inst.params.size() == 1 && plain_body_args(o, 2)) {
      std::string out = print_term_at(o.args[0].body, opts, 1);
      out += ", ";
      out += o.inst.params[0];
      out += ':';
      out += print_term_at(o.args[1].body, opts, 2);
      return wrap(std::move(out), 1, level);
    }
    if (op_name == "sequent" && o.inst.params.empty() && plain_body_args(o, 2)) {
      std::string out = print_term_at(o.args[0].body, opts, 1);
      out += opts.unicode ? " ≫ " : " >> ";
      out += print_term_at(o.args[1].body, opts, 1);
      return wrap(std::move(out), 0, level);
    }
  }

  std::string out = print_head(o.inst, opts);
  if (!o.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < o.args.size(); ++i) {
      if (i) out += ',';
      out += print_abs_at(o.args[i], opts);
    }
    out += ')';
  }
  return out;
}

}  // namespace detail

/// Deterministic rendering of a term in the shared grammar; parsing the
/// result yields an alpha-equal term.
inline std::string print_term(const Term& t, const PrintOptions& opts = {}) {
  return detail::print_term_at(t, opts, 0);
}

inline std::string print_abstraction(const Abstraction& e, const PrintOptions& opts = {}) {
  return detail::print_abs_at(e, opts);
}

inline std::string print_context(const SymbolCtx& ctx) {
  if (ctx.empty()) return ".";
  std::string out;
  for (std::size_t i = 0; i < ctx.bindings().size(); ++i) {
    if (i) out += ", ";
    out += ctx.bindings()[i].first + ":" + ctx.bindings()[i].second.name;
  }
  return out;
}

inline std::string print_context(const VarCtx& ctx) {
  if (ctx.empty()) return ".";
  std::string out;
  for (std::size_t i = 0; i < ctx.bindings().size(); ++i) {
    if (i) out += ", ";
    out += ctx.bindings()[i].first + ":" + ctx.bindings()[i].second.name;
  }
  return out;
}

inline std::string print_context(const MetaCtx& ctx) {
  if (ctx.empty()) return ".";
  std::string out;
  for (std::size_t i = 0; i < ctx.bindings().size(); ++i) {
    if (i) out += ", ";
    out += ctx.bindings()[i].first + ":" + to_string(ctx.bindings()[i].second);
  }
  return out;
}

}  // namespace abt
