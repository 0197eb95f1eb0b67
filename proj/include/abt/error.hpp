#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace abt {

/// Machine-readable classification of every failure the library can report.
enum class ErrorCode {
  DuplicateSort,
  DuplicateOperator,
  UnknownSort,
  UnknownOperator,
  UnboundSymbol,
  UnboundVariable,
  UnboundMetavariable,
  SortMismatch,
  ArityMismatch,
  SymbolNotInDomain,
  DuplicateSymbol,
  DuplicateVariable,
  DuplicateMetavariable,
  NotInjective,
  SortViolation,
  IncompleteMap,
  ContextMismatch,
  NotFound,
  DuplicateTarget,
  ValenceMismatch,
  IncompleteEnvironment,
  ElementNotInFiber,
  NotASheaf,
  ParseError,
  PresuppositionFailure,
  InvalidName,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateSort: return "DuplicateSort";
    case ErrorCode::DuplicateOperator: return "DuplicateOperator";
    case ErrorCode::UnknownSort: return "UnknownSort";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::UnboundSymbol: return "UnboundSymbol";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::UnboundMetavariable: return "UnboundMetavariable";
    case ErrorCode::SortMismatch: return "SortMismatch";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::SymbolNotInDomain: return "SymbolNotInDomain";
    case ErrorCode::DuplicateSymbol: return "DuplicateSymbol";
    case ErrorCode::DuplicateVariable: return "DuplicateVariable";
    case ErrorCode::DuplicateMetavariable: return "DuplicateMetavariable";
    case ErrorCode::NotInjective: return "NotInjective";
    case ErrorCode::SortViolation: return "SortViolation";
    case ErrorCode::IncompleteMap: return "IncompleteMap";
    case ErrorCode::ContextMismatch: return "ContextMismatch";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::DuplicateTarget: return "DuplicateTarget";
    case ErrorCode::ValenceMismatch: return "ValenceMismatch";
    case ErrorCode::IncompleteEnvironment: return "IncompleteEnvironment";
    case ErrorCode::ElementNotInFiber: return "ElementNotInFiber";
    case ErrorCode::NotASheaf: return "NotASheaf";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::PresuppositionFailure: return "PresuppositionFailure";
    case ErrorCode::InvalidName: return "InvalidName";
  }
  return "UnknownError";
}

/// Byte range into some source text, used by the parser and the CLI.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string file;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// Trail of argument descents locating a subterm, e.g. {"ap.0", "lam.0"}.
/// The empty path denotes the whole term.
using TermPath = std::vector<std::string>;

inline std::string to_string(const TermPath& path) {
  if (path.empty()) return "<root>";
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += " > ";
    out += path[i];
  }
  return out;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Error(ErrorCode code, std::string message, TermPath path)
      : std::runtime_error(std::move(message)), code_(code), path_(std::move(path)) {}

  ErrorCode code() const { return code_; }
  const TermPath& path() const { return path_; }
  const std::optional<SourceSpan>& span() const { return span_; }

  Error&& with_path(TermPath path) && {
    path_ = std::move(path);
    return std::move(*this);
  }

  Error&& with_span(SourceSpan span) && {
    span_ = std::move(span);
    return std::move(*this);
  }

 private:
  ErrorCode code_;
  TermPath path_;
  std::optional<SourceSpan> span_;
};

}  // namespace abt
