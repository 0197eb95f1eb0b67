#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abt/algebra.hpp"
#include "abt/contexts.hpp"
#include "abt/error.hpp"
#include "abt/parser.hpp"
#include "abt/printer.hpp"
#include "abt/signature.hpp"
#include "abt/term.hpp"

namespace abt {

/// Outcome of a wellformedness check: either wellformed, or a path to the
/// first violating subterm with a reason.
struct WfResult {
  bool wellformed = false;
  TermPath path;
  std::string reason;

  static WfResult ok() { return WfResult{true, {}, {}}; }
  static WfResult fail(TermPath path, std::string reason) {
    return WfResult{false, std::move(path), std::move(reason)};
  }

  explicit operator bool() const { return wellformed; }
};

/// The telescope/sequent signature: sorts exp, prop, tele, jdg with
/// operators nil, snoc, hyp, sequent, P, pred, plus the closure schema
/// `nabla` instantiated lazily per sort vector.
class SequentSignature : public SchemaResolver {
 public:
  SequentSignature() {
    const Sort exp{"exp"};
    const Sort prop{"prop"};
    const Sort tele{"tele"};
    const Sort jdg{"jdg"};
    base_ = declare_signature(
        {exp, prop, tele, jdg},
        {
            OperatorDecl{"nil", {}, Arity{{}, tele}},
            OperatorDecl{"snoc", {exp}, Arity{{Valence{{}, {}, tele}, Valence{{}, {}, prop}}, tele}},
            OperatorDecl{"hyp", {exp}, Arity{{}, exp}},
            OperatorDecl{"sequent", {}, Arity{{Valence{{}, {}, tele}, Valence{{}, {}, prop}}, jdg}},
            OperatorDecl{"P", {}, Arity{{}, prop}},
            OperatorDecl{"pred", {}, Arity{{Valence{{}, {}, exp}}, prop}},
        });
  }

  const Signature& base() const { return base_; }

  /// Memoized declaration of the parametric-judgment closure at the given
  /// sort vector; repeated calls return the identical declaration.
  OperatorDeclPtr instantiate_nabla(const std::vector<Sort>& sorts) const {
    for (const Sort& s : sorts) {
      if (!base_.has_sort(s)) {
        throw Error(ErrorCode::UnknownSort, "unknown sort '" + s.name + "'");
      }
    }
    std::lock_guard<std::mutex> lock(mu_);
    auto it = nabla_.find(sorts);
    if (it != nabla_.end()) return it->second;
    std::string name = "nabla[";
    for (std::size_t i = 0; i < sorts.size(); ++i) {
      if (i) name += ',';
      name += sorts[i].name;
    }
    name += ']';
    auto decl = std::make_shared<const OperatorDecl>(
        OperatorDecl{std::move(name), {}, Arity{{Valence{sorts, {}, Sort{"jdg"}}}, Sort{"jdg"}}});
    nabla_.emplace(sorts, decl);
    return decl;
  }

  std::optional<OperatorInst> resolve_bracketed(
      const std::string& head, const std::vector<std::string>& entries) const override {
    if (head != "nabla") return std::nullopt;
    std::vector<Sort> sorts;
    sorts.reserve(entries.size());
    for (const std::string& e : entries) sorts.push_back(Sort{e});
    return OperatorInst{instantiate_nabla(sorts), {}};
  }

 private:
  Signature base_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<Sort>, OperatorDeclPtr> nabla_;
};

inline OperatorDeclPtr instantiate_nabla(const SequentSignature& sig,
                                         const std::vector<Sort>& sorts) {
  return sig.instantiate_nabla(sorts);
}

namespace detail {

inline bool is_nabla(const OperatorDecl& decl) {
  return decl.name.rfind("nabla[", 0) == 0 && decl.param_sorts.empty() &&
         decl.arity.valences.size() == 1 && decl.arity.valences[0].variable_sorts.empty() &&
         decl.arity.target == Sort{"jdg"};
}

inline WfResult wf_term(const SymbolCtx& syms, const VarCtx& vars, const Term& term,
                        const Sort& sort, TermPath& path, bool recheck);

inline WfResult wf_abs(const SymbolCtx& syms, const VarCtx& vars, const Abstraction& abs,
                       const Sort& body_sort, TermPath& path, bool recheck) {
  const Abstraction fresh = freshen_binders(abs, syms.names(), vars.names());
  SymbolCtx inner_syms = syms;
  VarCtx inner_vars = vars;
  for (const auto& [n, s] : fresh.bound_symbols) inner_syms = inner_syms.extended(n, s);
  for (const auto& [n, s] : fresh.bound_vars) inner_vars = inner_vars.extended(n, s);
  return wf_term(inner_syms, inner_vars, fresh.body, body_sort, path, recheck);
}

inline WfResult wf_term(const SymbolCtx& syms, const VarCtx& vars, const Term& term,
                        const Sort& sort, TermPath& path, bool recheck) {
  if (recheck) {
    // The context shrank, so the presupposition must be re-established; a
    // failure here is a wellformedness violation at this subterm.
    try {
      Sort found = check(MetaCtx{}, syms, vars, term);
      if (!(found == sort)) {
        return WfResult::fail(path, "subterm has sort '" + found.name + "', expected '" +
                                        sort.name + "'");
      }
    } catch (const Error& e) {
      TermPath full = path;
      full.insert(full.end(), e.path().begin(), e.path().end());
      return WfResult::fail(std::move(full), e.what());
    }
  }

  if (term.is_var()) return WfResult::ok();
  if (term.is_meta()) {
    // Excluded by the presupposition: the judgment runs with an empty
    // metavariable context.
    return WfResult::fail(path, "metavariable occurrence is never wellformed");
  }

  const OpTerm& o = term.as_op();
  const std::string& name = o.inst.decl->name;

  if (name == "nil") return WfResult::ok();

  if (name == "snoc") {
    const std::string& u = o.inst.params[0];
    if (!syms.binds(u)) {
      return WfResult::fail(path, "telescope symbol '" + u + "' is not bound");
    }
    SymbolCtx shrunk = syms.removed(u);
    path.push_back("snoc.0");
    WfResult head = wf_term(shrunk, vars, o.args[0].body, Sort{"tele"}, path, true);
    if (!head) return head;
    path.back() = "snoc.1";
    WfResult hyp = wf_term(shrunk, vars, o.args[1].body, Sort{"prop"}, path, true);
    if (!hyp) return hyp;
    path.pop_back();
    return WfResult::ok();
  }

  if (name == "sequent") {
    path.push_back("sequent.0");
    WfResult tele = wf_term(syms, vars, o.args[0].body, Sort{"tele"}, path, false);
    if (!tele) return tele;
    path.back() = "sequent.1";
    WfResult concl = wf_term(syms, vars, o.args[1].body, Sort{"prop"}, path, false);
    if (!concl) return concl;
    path.pop_back();
    return WfResult::ok();
  }

  if (is_nabla(*o.inst.decl)) {
    path.push_back(name + ".0");
    WfResult body = wf_abs(syms, vars, o.args[0], Sort{"jdg"}, path, false);
    if (!body) return body;
    path.pop_back();
    return WfResult::ok();
  }

  const Sort target = o.inst.decl->arity.target;
  if (target == Sort{"exp"} || target == Sort{"prop"}) {
    // Anything of sort exp or prop is wellformed when its subterms are.
    for (std::size_t i = 0; i < o.args.size(); ++i) {
      path.push_back(name + "." + std::to_string(i));
      WfResult sub =
          wf_abs(syms, vars, o.args[i], o.inst.decl->arity.valences[i].target, path, false);
      if (!sub) return sub;
      path.pop_back();
    }
    return WfResult::ok();
  }

  return WfResult::fail(path, "no wellformedness rule for operator '" + name + "'");
}

}  // namespace detail

/// Decides the wellformedness refinement over sort-correct terms. The
/// presupposition (the term sort-checks with an empty metavariable context)
/// is verified first; its failure is reported as PresuppositionFailure.
inline WfResult check_wf(const SymbolCtx& syms, const VarCtx& vars, const Term& term,
                         const Sort& sort) {
  Sort found;
  try {
    found = check(MetaCtx{}, syms, vars, term);
  } catch (const Error& e) {
    throw Error(ErrorCode::PresuppositionFailure,
                std::string("term does not sort-check: ") + e.what(), e.path());
  }
  if (!(found == sort)) {
    throw Error(ErrorCode::PresuppositionFailure,
                "term has sort '" + found.name + "', expected '" + sort.name + "'");
  }
  TermPath path;
  return detail::wf_term(syms, vars, term, sort, path, false);
}

inline WfResult check_abs_wf(const SymbolCtx& syms, const VarCtx& vars, const Abstraction& abs,
                             const Valence& valence) {
  Valence found;
  try {
    found = check_abs(MetaCtx{}, syms, vars, abs);
  } catch (const Error& e) {
    throw Error(ErrorCode::PresuppositionFailure,
                std::string("abstraction does not sort-check: ") + e.what(), e.path());
  }
  if (!(found == valence)) {
    throw Error(ErrorCode::PresuppositionFailure,
                "abstraction has valence '" + to_string(found) + "', expected '" +
                    to_string(valence) + "'");
  }
  TermPath path;
  return detail::wf_abs(syms, vars, abs, valence.target, path, false);
}

/// Expands the surface notation (<>, H,u:A, H >> A, 'u) into core operator
/// applications.
inline Term desugar(std::string_view text, const SequentSignature& sig) {
  ParseOptions opts;
  opts.sugar = true;
  opts.resolver = &sig;
  return parse_term(text, sig.base(), opts);
}

/// Renders a term with the surface notation folded back in; inverse of
/// `desugar` on terms in the image of the notation.
inline std::string resugar(const Term& term, bool unicode = false) {
  PrintOptions opts;
  opts.sugar = true;
  opts.unicode = unicode;
  return print_term(term, opts);
}

}  // namespace abt
