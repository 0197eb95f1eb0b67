#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abt/contexts.hpp"
#include "abt/error.hpp"
#include "abt/signature.hpp"
#include "abt/term.hpp"

namespace abt {

/// Resolves bracketed heads the signature does not know, e.g. operator
/// schemas instantiated per sort vector.
class SchemaResolver {
 public:
  virtual ~SchemaResolver() = default;
  virtual std::optional<OperatorInst> resolve_bracketed(
      const std::string& head, const std::vector<std::string>& entries) const = 0;
};

struct ParseOptions {
  bool sugar = false;                     // telescope/sequent surface notation
  const SchemaResolver* resolver = nullptr;
  std::string file = "<input>";           // used in spans
};

namespace detail {

enum class Tok {
  Ident, LBrace, RBrace, LBrack, RBrack, LParen, RParen,
  Comma, Dot, Colon, Equals, Backslash, Tick, Diamond, Stream, Eof,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9');
}

class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {
    lex_all();
  }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  Token next() {
    Token t = peek();
    if (t.kind != Tok::Eof) ++pos_;
    return t;
  }

  Token expect(Tok kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) throw err("expected " + std::string(what), t);
    return next();
  }

  bool accept(Tok kind) {
    if (peek().kind == kind) {
      next();
      return true;
    }
    return false;
  }

  Error err(std::string message, const Token& at) const {
    return std::move(Error(ErrorCode::ParseError, std::move(message))
                         .with_span(SourceSpan{at.begin, at.end, file_}));
  }

  const std::string& file() const { return file_; }

 private:
  void push(Tok kind, std::size_t begin, std::size_t end, std::string text = {}) {
    tokens_.push_back(Token{kind, std::move(text), begin, end});
  }

  void lex_all() {
    std::size_t i = 0;
    const std::size_t n = text_.size();
    while (i < n) {
      char c = text_[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++i;
        continue;
      }
      if (c == '#') {
        while (i < n && text_[i] != '\n') ++i;
        continue;
      }
      std::size_t start = i;
      if (ident_start(c)) {
        while (i < n && ident_char(text_[i])) ++i;
        push(Tok::Ident, start, i, std::string(text_.substr(start, i - start)));
        continue;
      }
      switch (c) {
        case '{': push(Tok::LBrace, start, ++i); continue;
        case '}': push(Tok::RBrace, start, ++i); continue;
        case '[': push(Tok::LBrack, start, ++i); continue;
        case ']': push(Tok::RBrack, start, ++i); continue;
        case '(': push(Tok::LParen, start, ++i); continue;
        case ')': push(Tok::RParen, start, ++i); continue;
        case ',': push(Tok::Comma, start, ++i); continue;
        case '.': push(Tok::Dot, start, ++i); continue;
        case ':': push(Tok::Colon, start, ++i); continue;
        case '=': push(Tok::Equals, start, ++i); continue;
        case '\\': push(Tok::Backslash, start, ++i); continue;
        case '\'': push(Tok::Tick, start, ++i); continue;
        case '<':
          if (i + 1 < n && text_[i + 1] == '>') {
            i += 2;
            push(Tok::Diamond, start, i);
            continue;
          }
          break;
        case '>':
          if (i + 1 < n && text_[i + 1] == '>') {
            i += 2;
            push(Tok::Stream, start, i);
            continue;
          }
          break;
        default: break;
      }
      // UTF-8 alternatives accepted on input.
      auto match = [&](std::string_view bytes) {
        return text_.substr(i, bytes.size()) == bytes;
      };
      if (match("ℵ")) { i += 3; push(Tok::Backslash, start, i); continue; }     // aleph
      if (match("∇")) { i += 3; push(Tok::Ident, start, i, "nabla"); continue; } // nabla
      if (match("⋄")) { i += 3; push(Tok::Diamond, start, i); continue; }       // diamond
      if (match("≫")) { i += 3; push(Tok::Stream, start, i); continue; }        // much greater-than
      if (match("·")) { i += 2; push(Tok::Dot, start, i); continue; }           // middle dot
      throw std::move(Error(ErrorCode::ParseError,
                            "unexpected character '" + std::string(1, c) + "'")
                          .with_span(SourceSpan{start, start + 1, file_}));
    }
    push(Tok::Eof, n, n);
  }

  std::string_view text_;
  std::string file_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

class TermParser {
 public:
  TermParser(Lexer& lx, const Signature& sig, const ParseOptions& opts)
      : lx_(lx), sig_(sig), opts_(opts) {}

  Term parse_term() {
    return opts_.sugar ? parse_sequent() : parse_app();
  }

  Abstraction parse_abstraction(const Valence& valence) {
    Token at = lx_.peek();
    if (at.kind == Tok::Backslash || at.kind == Tok::LBrace || at.kind == Tok::LBrack) {
      return parse_binder_abs(valence);
    }
    if (!valence.binds_nothing()) {
      throw lx_.err("expected an abstraction of valence '" + to_string(valence) + "'", at);
    }
    return Abstraction(parse_term());
  }

 private:
  Term parse_sequent() {
    Term lhs = parse_telescope();
    if (lx_.peek().kind == Tok::Stream) {
      Token at = lx_.next();
      Term rhs = parse_telescope();
      OperatorDeclPtr decl = sig_.find_op("sequent");
      if (!decl) throw lx_.err("'>>' notation requires a 'sequent' operator", at);
      return Term::op(make_inst_at(decl, {}, at),
                      {Abstraction(std::move(lhs)), Abstraction(std::move(rhs))});
    }
    return lhs;
  }

  Term parse_telescope() {
    Term acc = parse_app();
    while (lx_.peek().kind == Tok::Comma && lx_.peek(1).kind == Tok::Ident &&
           lx_.peek(2).kind == Tok::Colon) {
      lx_.next();
      Token name = lx_.next();
      lx_.next();
      Term hypothesis = parse_app();
      OperatorDeclPtr decl = sig_.find_op("snoc");
      if (!decl) throw lx_.err("telescope notation requires a 'snoc' operator", name);
      acc = Term::op(make_inst_at(decl, {name.text}, name),
                     {Abstraction(std::move(acc)), Abstraction(std::move(hypothesis))});
    }
    return acc;
  }

  Term parse_app() {
    Token t = lx_.peek();
    switch (t.kind) {
      case Tok::Diamond: {
        lx_.next();
        if (!opts_.sugar) throw lx_.err("'<>' notation requires surface syntax", t);
        OperatorDeclPtr decl = sig_.find_op("nil");
        if (!decl) throw lx_.err("'<>' notation requires a 'nil' operator", t);
        return Term::op(make_inst_at(decl, {}, t), {});
      }
      case Tok::Tick: {
        lx_.next();
        if (!opts_.sugar) throw lx_.err("quote notation requires surface syntax", t);
        Token name = lx_.expect(Tok::Ident, "a symbol after '");
        OperatorDeclPtr decl = sig_.find_op("hyp");
        if (!decl) throw lx_.err("quote notation requires a 'hyp' operator", name);
        return Term::op(make_inst_at(decl, {name.text}, name), {});
      }
      case Tok::LParen: {
        lx_.next();
        Term inner = parse_term();
        lx_.expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        lx_.next();
        return parse_head(t);
      }
      case Tok::Backslash:
        throw lx_.err("abstractions may only appear as operator arguments", t);
      default:
        throw lx_.err("expected a term", t);
    }
  }

  Term parse_head(const Token& name) {
    const Tok after = lx_.peek().kind;
    if (after == Tok::LBrace) {
      std::vector<std::string> params = parse_id_list(Tok::LBrace, Tok::RBrace);
      std::vector<Term> args;
      if (lx_.peek().kind == Tok::LParen) args = parse_term_list();
      return Term::meta(name.text, std::move(params), std::move(args));
    }
    if (after == Tok::LBrack) {
      std::vector<std::string> entries = parse_id_list(Tok::LBrack, Tok::RBrack);
      if (OperatorDeclPtr decl = sig_.find_op(name.text)) {
        OperatorInst inst = make_inst_at(decl, entries, name);
        return finish_op(std::move(inst), name);
      }
      if (opts_.resolver) {
        std::optional<OperatorInst> inst;
        try {
          inst = opts_.resolver->resolve_bracketed(name.text, entries);
        } catch (const Error& e) {
          throw lx_.err(e.what(), name);
        }
        if (inst) return finish_op(std::move(*inst), name);
      }
      throw std::move(Error(ErrorCode::UnknownOperator,
                            "unknown operator '" + name.text + "'")
                          .with_span(SourceSpan{name.begin, name.end, lx_.file()}));
    }
    if (after == Tok::LParen) {
      if (OperatorDeclPtr decl = sig_.find_op(name.text)) {
        OperatorInst inst = make_inst_at(decl, {}, name);
        return finish_op(std::move(inst), name);
      }
      std::vector<Term> args = parse_term_list();
      return Term::meta(name.text, {}, std::move(args));
    }
    if (OperatorDeclPtr decl = sig_.find_op(name.text)) {
      OperatorInst inst = make_inst_at(decl, {}, name);
      if (!decl->arity.valences.empty()) {
        throw lx_.err("operator '" + name.text + "' expects " +
                          std::to_string(decl->arity.valences.size()) + " argument(s)",
                      name);
      }
      return Term::op(std::move(inst), {});
    }
    return Term::var(name.text);
  }

  Term finish_op(OperatorInst inst, const Token& at) {
    const std::vector<Valence>& valences = inst.decl->arity.valences;
    std::vector<Abstraction> args;
    if (lx_.peek().kind == Tok::LParen) {
      lx_.next();
      if (!lx_.accept(Tok::RParen)) {
        std::size_t i = 0;
        while (true) {
          if (i >= valences.size()) {
            throw lx_.err("operator " + display_name(inst) + " expects " +
                              std::to_string(valences.size()) + " argument(s)",
                          lx_.peek());
          }
          args.push_back(parse_abstraction(valences[i]));
          ++i;
          if (lx_.accept(Tok::RParen)) break;
          lx_.expect(Tok::Comma, "',' or ')'");
        }
      }
    }
    if (args.size() != valences.size()) {
      throw lx_.err("operator " + display_name(inst) + " expects " +
                        std::to_string(valences.size()) + " argument(s), got " +
                        std::to_string(args.size()),
                    at);
    }
    return Term::op(std::move(inst), std::move(args));
  }

  Abstraction parse_binder_abs(const Valence& valence) {
    Token at = lx_.peek();
    lx_.accept(Tok::Backslash);  // the backslash is optional when binders follow
    std::vector<std::string> syms;
    std::vector<std::string> vars;
    if (lx_.peek().kind == Tok::LBrace) syms = parse_id_list(Tok::LBrace, Tok::RBrace);
    if (lx_.peek().kind == Tok::LBrack) vars = parse_id_list(Tok::LBrack, Tok::RBrack);
    lx_.expect(Tok::Dot, "'.' after binders");
    Term body = parse_term();
    if (syms.size() != valence.symbol_sorts.size() || vars.size() != valence.variable_sorts.size()) {
      throw lx_.err("abstraction binds {" + std::to_string(syms.size()) + "}[" +
                        std::to_string(vars.size()) + "] names, expected valence '" +
                        to_string(valence) + "'",
                    at);
    }
    std::vector<std::pair<std::string, Sort>> bsyms;
    std::vector<std::pair<std::string, Sort>> bvars;
    for (std::size_t i = 0; i < syms.size(); ++i) bsyms.emplace_back(syms[i], valence.symbol_sorts[i]);
    for (std::size_t i = 0; i < vars.size(); ++i) bvars.emplace_back(vars[i], valence.variable_sorts[i]);
    try {
      return Abstraction(std::move(bsyms), std::move(bvars), std::move(body));
    } catch (const Error& e) {
      throw lx_.err(e.what(), at);
    }
  }

  std::vector<std::string> parse_id_list(Tok open, Tok close) {
    lx_.expect(open, open == Tok::LBrace ? "'{'" : "'['");
    std::vector<std::string> out;
    if (lx_.accept(close)) return out;
    while (true) {
      out.push_back(lx_.expect(Tok::Ident, "an identifier").text);
      if (lx_.accept(close)) break;
      lx_.expect(Tok::Comma, "','");
    }
    return out;
  }

  std::vector<Term> parse_term_list() {
    lx_.expect(Tok::LParen, "'('");
    std::vector<Term> out;
    if (lx_.accept(Tok::RParen)) return out;
    while (true) {
      out.push_back(parse_term());
      if (lx_.accept(Tok::RParen)) break;
      lx_.expect(Tok::Comma, "',' or ')'");
    }
    return out;
  }

  OperatorInst make_inst_at(OperatorDeclPtr decl, std::vector<std::string> params,
                            const Token& at) {
    try {
      return make_operator_inst(std::move(decl), std::move(params));
    } catch (const Error& e) {
      throw lx_.err(e.what(), at);
    }
  }

  Lexer& lx_;
  const Signature& sig_;
  const ParseOptions& opts_;
};

inline Valence parse_valence_tokens(Lexer& lx) {
  std::vector<Sort> symbol_sorts;
  std::vector<Sort> variable_sorts;
  if (lx.peek().kind == Tok::LBrace) {
    lx.next();
    if (!lx.accept(Tok::RBrace)) {
      while (true) {
        symbol_sorts.push_back(Sort{lx.expect(Tok::Ident, "a sort").text});
        if (lx.accept(Tok::RBrace)) break;
        lx.expect(Tok::Comma, "','");
      }
    }
  }
  if (lx.peek().kind == Tok::LBrack) {
    lx.next();
    if (!lx.accept(Tok::RBrack)) {
      while (true) {
        variable_sorts.push_back(Sort{lx.expect(Tok::Ident, "a sort").text});
        if (lx.accept(Tok::RBrack)) break;
        lx.expect(Tok::Comma, "','");
      }
    }
  }
  lx.expect(Tok::Dot, "'.' before the target sort");
  Sort target{lx.expect(Tok::Ident, "a sort").text};
  return Valence{std::move(symbol_sorts), std::move(variable_sorts), std::move(target)};
}

inline Arity parse_arity_tokens(Lexer& lx) {
  lx.expect(Tok::LParen, "'('");
  std::vector<Valence> valences;
  if (!lx.accept(Tok::RParen)) {
    while (true) {
      valences.push_back(parse_valence_tokens(lx));
      if (lx.accept(Tok::RParen)) break;
      lx.expect(Tok::Comma, "','");
    }
  }
  Sort target{lx.expect(Tok::Ident, "a target sort").text};
  return Arity{std::move(valences), std::move(target)};
}

}  // namespace detail

/// Parses the one-declaration-per-line signature format:
///   sort exp
///   op lam : ([exp].exp) exp
///   op get {exp} : () exp
inline Signature parse_signature(std::string_view text, const std::string& file = "<signature>") {
  detail::Lexer lx(text, file);
  std::vector<Sort> sorts;
  std::vector<OperatorDecl> ops;
  std::vector<std::pair<std::string, SourceSpan>> sort_mentions;
  auto note_sorts = [&](const std::vector<Sort>& ss, const detail::Token& at) {
    for (const Sort& s : ss) sort_mentions.emplace_back(s.name, SourceSpan{at.begin, at.end, file});
  };
  while (lx.peek().kind != detail::Tok::Eof) {
    detail::Token kw = lx.expect(detail::Tok::Ident, "'sort' or 'op'");
    if (kw.text == "sort") {
      detail::Token name = lx.expect(detail::Tok::Ident, "a sort name");
      sorts.push_back(Sort{name.text});
    } else if (kw.text == "op") {
      detail::Token name = lx.expect(detail::Tok::Ident, "an operator name");
      std::vector<Sort> param_sorts;
      if (lx.peek().kind == detail::Tok::LBrace) {
        lx.next();
        if (!lx.accept(detail::Tok::RBrace)) {
          while (true) {
            detail::Token s = lx.expect(detail::Tok::Ident, "a sort");
            param_sorts.push_back(Sort{s.text});
            sort_mentions.emplace_back(s.text, SourceSpan{s.begin, s.end, file});
            if (lx.accept(detail::Tok::RBrace)) break;
            lx.expect(detail::Tok::Comma, "','");
          }
        }
      }
      lx.expect(detail::Tok::Colon, "':'");
      detail::Token arity_at = lx.peek();
      Arity arity = detail::parse_arity_tokens(lx);
      for (const Valence& v : arity.valences) {
        note_sorts(v.symbol_sorts, arity_at);
        note_sorts(v.variable_sorts, arity_at);
        note_sorts({v.target}, arity_at);
      }
      note_sorts({arity.target}, arity_at);
      ops.push_back(OperatorDecl{name.text, std::move(param_sorts), std::move(arity)});
    } else {
      throw lx.err("expected 'sort' or 'op'", kw);
    }
  }
  try {
    return declare_signature(std::move(sorts), std::move(ops));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownSort) {
      std::string what = e.what();
      for (const auto& [name, span] : sort_mentions) {
        if (what.find("'" + name + "'") != std::string::npos) {
          throw std::move(Error(e.code(), what).with_span(span));
        }
      }
    }
    throw;
  }
}

/// Parses a term in the shared grammar against a validated signature.
inline Term parse_term(std::string_view text, const Signature& sig, const ParseOptions& opts = {}) {
  detail::Lexer lx(text, opts.file);
  detail::TermParser p(lx, sig, opts);
  Term t = p.parse_term();
  lx.expect(detail::Tok::Eof, "end of input");
  return t;
}

/// Parses an abstraction of the given valence (binder sorts come from the
/// valence; the leading backslash is optional when binder groups follow).
inline Abstraction parse_abstraction(std::string_view text, const Signature& sig,
                                     const Valence& valence, const ParseOptions& opts = {}) {
  detail::Lexer lx(text, opts.file);
  detail::TermParser p(lx, sig, opts);
  Abstraction e = p.parse_abstraction(valence);
  lx.expect(detail::Tok::Eof, "end of input");
  return e;
}

/// Context formats: "u:exp, v:exp" for symbols/variables, "m:{exp}[exp].exp"
/// for metavariables; "." or an empty string is the empty context.
inline SymbolCtx parse_symbol_ctx(std::string_view text, const Signature& sig,
                                  const std::string& file = "<symbols>") {
  detail::Lexer lx(text, file);
  SymbolCtx ctx;
  if (lx.accept(detail::Tok::Dot)) {
    lx.expect(detail::Tok::Eof, "end of input");
    return ctx;
  }
  while (lx.peek().kind != detail::Tok::Eof) {
    detail::Token name = lx.expect(detail::Tok::Ident, "a symbol name");
    lx.expect(detail::Tok::Colon, "':'");
    detail::Token sort = lx.expect(detail::Tok::Ident, "a sort");
    if (!sig.has_sort(sort.text)) {
      throw std::move(Error(ErrorCode::UnknownSort, "unknown sort '" + sort.text + "'")
                          .with_span(SourceSpan{sort.begin, sort.end, file}));
    }
    try {
      ctx = ctx.extended(name.text, Sort{sort.text});
    } catch (const Error& e) {
      throw lx.err(e.what(), name);
    }
    if (!lx.accept(detail::Tok::Comma)) break;
  }
  lx.expect(detail::Tok::Eof, "end of input");
  return ctx;
}

inline VarCtx parse_var_ctx(std::string_view text, const Signature& sig,
                            const std::string& file = "<vars>") {
  detail::Lexer lx(text, file);
  VarCtx ctx;
  if (lx.accept(detail::Tok::Dot)) {
    lx.expect(detail::Tok::Eof, "end of input");
    return ctx;
  }
  while (lx.peek().kind != detail::Tok::Eof) {
    detail::Token name = lx.expect(detail::Tok::Ident, "a variable name");
    lx.expect(detail::Tok::Colon, "':'");
    detail::Token sort = lx.expect(detail::Tok::Ident, "a sort");
    if (!sig.has_sort(sort.text)) {
      throw std::move(Error(ErrorCode::UnknownSort, "unknown sort '" + sort.text + "'")
                          .with_span(SourceSpan{sort.begin, sort.end, file}));
    }
    try {
      ctx = ctx.extended(name.text, Sort{sort.text});
    } catch (const Error& e) {
      throw lx.err(e.what(), name);
    }
    if (!lx.accept(detail::Tok::Comma)) break;
  }
  lx.expect(detail::Tok::Eof, "end of input");
  return ctx;
}

inline MetaCtx parse_meta_ctx(std::string_view text, const Signature& sig,
                              const std::string& file = "<metas>") {
  detail::Lexer lx(text, file);
  MetaCtx ctx;
  if (lx.accept(detail::Tok::Dot)) {
    lx.expect(detail::Tok::Eof, "end of input");
    return ctx;
  }
  while (lx.peek().kind != detail::Tok::Eof) {
    detail::Token name = lx.expect(detail::Tok::Ident, "a metavariable name");
    lx.expect(detail::Tok::Colon, "':'");
    detail::Token at = lx.peek();
    Valence v = detail::parse_valence_tokens(lx);
    auto check_sort = [&](const Sort& s) {
      if (!sig.has_sort(s)) {
        throw std::move(Error(ErrorCode::UnknownSort, "unknown sort '" + s.name + "'")
                            .with_span(SourceSpan{at.begin, at.end, file}));
      }
    };
    for (const Sort& s : v.symbol_sorts) check_sort(s);
    for (const Sort& s : v.variable_sorts) check_sort(s);
    check_sort(v.target);
    try {
      ctx = ctx.extended(name.text, std::move(v));
    } catch (const Error& e) {
      throw lx.err(e.what(), name);
    }
    if (!lx.accept(detail::Tok::Comma)) break;
  }
  lx.expect(detail::Tok::Eof, "end of input");
  return ctx;
}

}  // namespace abt
