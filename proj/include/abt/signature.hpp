#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abt/contexts.hpp"
#include "abt/error.hpp"
#include "abt/sorts.hpp"

namespace abt {

/// Declares a family of operators: a name, the sorts of its symbol-parameter
/// slots, and the arity shared by every member of the family.
struct OperatorDecl {
  std::string name;
  std::vector<Sort> param_sorts;
  Arity arity;

  friend bool operator==(const OperatorDecl&, const OperatorDecl&) = default;
};

using OperatorDeclPtr = std::shared_ptr<const OperatorDecl>;

/// A validated signature: declared sorts plus operator declarations.
/// Immutable after construction; safe to share across threads.
class Signature {
 public:
  Signature() = default;

  static Signature declare(std::vector<Sort> sorts, std::vector<OperatorDecl> ops) {
    Signature sig;
    for (const Sort& s : sorts) {
      if (s.name.empty()) throw Error(ErrorCode::InvalidName, "empty sort name");
      if (!sig.sort_names_.insert(s.name).second) {
        throw Error(ErrorCode::DuplicateSort, "duplicate sort '" + s.name + "'");
      }
      sig.sorts_.push_back(s);
    }
    for (OperatorDecl& op : ops) {
      if (op.name.empty()) throw Error(ErrorCode::InvalidName, "empty operator name");
      sig.require_sort(op.arity.target, op.name);
      for (const Sort& s : op.param_sorts) sig.require_sort(s, op.name);
      for (const Valence& v : op.arity.valences) {
        sig.require_sort(v.target, op.name);
        for (const Sort& s : v.symbol_sorts) sig.require_sort(s, op.name);
        for (const Sort& s : v.variable_sorts) sig.require_sort(s, op.name);
      }
      auto decl = std::make_shared<const OperatorDecl>(std::move(op));
      if (!sig.by_name_.emplace(decl->name, decl).second) {
        throw Error(ErrorCode::DuplicateOperator, "duplicate operator '" + decl->name + "'");
      }
      sig.ops_.push_back(std::move(decl));
    }
    return sig;
  }

  const std::vector<Sort>& sorts() const { return sorts_; }
  const std::vector<OperatorDeclPtr>& ops() const { return ops_; }

  bool has_sort(std::string_view name) const { return sort_names_.count(std::string(name)) > 0; }
  bool has_sort(const Sort& s) const { return has_sort(s.name); }

  OperatorDeclPtr find_op(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : it->second;
  }

  OperatorDeclPtr op(std::string_view name) const {
    if (OperatorDeclPtr d = find_op(name)) return d;
    throw Error(ErrorCode::UnknownOperator, "unknown operator '" + std::string(name) + "'");
  }

 private:
  void require_sort(const Sort& s, const std::string& op_name) const {
    if (!has_sort(s)) {
      throw Error(ErrorCode::UnknownSort,
                  "operator '" + op_name + "' mentions undeclared sort '" + s.name + "'");
    }
  }

  std::vector<Sort> sorts_;
  std::set<std::string> sort_names_;
  std::vector<OperatorDeclPtr> ops_;
  std::map<std::string, OperatorDeclPtr> by_name_;
};

inline Signature declare_signature(std::vector<Sort> sorts, std::vector<OperatorDecl> ops) {
  return Signature::declare(std::move(sorts), std::move(ops));
}

/// One member of an operator family: the declaration applied to actual
/// symbol parameters, e.g. get[u].
struct OperatorInst {
  OperatorDeclPtr decl;
  std::vector<std::string> params;

  friend bool operator==(const OperatorInst& a, const OperatorInst& b) {
    if (a.params != b.params) return false;
    if (a.decl == b.decl) return true;
    return a.decl && b.decl && *a.decl == *b.decl;
  }
};

inline OperatorInst make_operator_inst(OperatorDeclPtr decl, std::vector<std::string> params) {
  if (!decl) throw Error(ErrorCode::UnknownOperator, "null operator declaration");
  if (params.size() != decl->param_sorts.size()) {
    throw Error(ErrorCode::ArityMismatch,
                "operator '" + decl->name + "' takes " +
                    std::to_string(decl->param_sorts.size()) + " symbol parameter(s), got " +
                    std::to_string(params.size()));
  }
  return OperatorInst{std::move(decl), std::move(params)};
}

inline std::string display_name(const OperatorInst& inst) {
  std::string out = inst.decl->name;
  if (!inst.params.empty()) {
    out += '[';
    for (std::size_t i = 0; i < inst.params.size(); ++i) {
      if (i) out += ',';
      out += inst.params[i];
    }
    out += ']';
  }
  return out;
}

/// Decides the parameter side of the operator judgment: every actual
/// parameter must be bound in `ctx` at its declared sort. Only membership is
/// consulted, so weakening and exchange hold definitionally.
inline Arity check_operator_params(const SymbolCtx& ctx, const OperatorInst& inst) {
  const OperatorDecl& decl = *inst.decl;
  if (inst.params.size() != decl.param_sorts.size()) {
    throw Error(ErrorCode::ArityMismatch,
                "operator '" + decl.name + "' takes " +
                    std::to_string(decl.param_sorts.size()) + " symbol parameter(s), got " +
                    std::to_string(inst.params.size()));
  }
  for (std::size_t i = 0; i < inst.params.size(); ++i) {
    const std::string& u = inst.params[i];
    const Sort* found = ctx.find(u);
    if (found == nullptr) {
      throw Error(ErrorCode::UnboundSymbol,
                  "symbol '" + u + "' in " + display_name(inst) + " is not bound");
    }
    if (!(*found == decl.param_sorts[i])) {
      throw Error(ErrorCode::SortMismatch,
                  "symbol '" + u + "' in " + display_name(inst) + " has sort '" + found->name +
                      "', expected '" + decl.param_sorts[i].name + "'");
    }
  }
  return decl.arity;
}

inline Arity check_operator(const Signature& sig, const SymbolCtx& ctx, const OperatorInst& inst) {
  OperatorDeclPtr declared = sig.find_op(inst.decl->name);
  if (declared == nullptr || !(*declared == *inst.decl)) {
    throw Error(ErrorCode::UnknownOperator,
                "operator '" + inst.decl->name + "' does not belong to the signature");
  }
  return check_operator_params(ctx, inst);
}

/// Maps the instance's parameters pointwise through the renaming.
inline OperatorInst rename_operator(const OperatorInst& inst, const Renaming& renaming) {
  std::vector<std::string> params;
  params.reserve(inst.params.size());
  for (const std::string& u : inst.params) params.push_back(renaming.apply(u));
  return OperatorInst{inst.decl, std::move(params)};
}

/// The minimal symbol context supporting the instance: exactly its parameter
/// list paired with the declared parameter sorts.
inline std::set<std::pair<std::string, Sort>> operator_support(const OperatorInst& inst) {
  std::set<std::pair<std::string, Sort>> out;
  for (std::size_t i = 0; i < inst.params.size(); ++i) {
    out.emplace(inst.params[i], inst.decl->param_sorts[i]);
  }
  return out;
}

}  // namespace abt
