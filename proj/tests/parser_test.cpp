#include <catch2/catch_amalgamated.hpp>

#include "abt/abt.hpp"
#include "support/testgen.hpp"

using namespace abt;

namespace {

const Sort kExp{"exp"};

const char* kLambdaSig =
    "sort exp\n"
    "op lam : ([exp].exp) exp\n"
    "op fix : ([exp].exp) exp\n"
    "op ap : (.exp,.exp) exp\n";

const char* kAssignablesSig =
    "sort exp\n"
    "op lam : ([exp].exp) exp\n"
    "op fix : ([exp].exp) exp\n"
    "op ap : (.exp,.exp) exp\n"
    "op decl : (.exp, {exp}.exp) exp\n"
    "op get {exp} : () exp\n"
    "op set {exp} : (.exp) exp\n";

}  // namespace

TEST_CASE("parse_signature reads declarations", "[parser]") {
  Signature sig = parse_signature(kLambdaSig);
  REQUIRE(sig.find_op("lam") != nullptr);
  REQUIRE(to_string(sig.op("lam")->arity) == "([exp].exp) exp");

  Signature empty = parse_signature("");
  REQUIRE(empty.sorts().empty());

  Signature asgn = parse_signature(kAssignablesSig);
  REQUIRE(asgn.op("get")->param_sorts == std::vector<Sort>{kExp});
  REQUIRE(to_string(asgn.op("decl")->arity) == "(.exp,{exp}.exp) exp");

  // comments and blank lines are skipped
  Signature commented = parse_signature("# a comment\n\nsort exp # trailing\n");
  REQUIRE(commented.has_sort("exp"));
}

TEST_CASE("parse_signature reports unknown sorts at a span", "[parser]") {
  try {
    parse_signature("op get {exp} : () exp\n");
    FAIL("expected UnknownSort");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnknownSort);
    REQUIRE(e.span().has_value());
  }
}

TEST_CASE("parse_term resolves heads against the signature", "[parser]") {
  Signature sig = parse_signature(kAssignablesSig);

  Term redex = parse_term("ap(lam([x].x), y)", sig);
  REQUIRE(redex.is_op());
  REQUIRE(redex.as_op().inst.decl->name == "ap");
  REQUIRE(redex.as_op().args.size() == 2);
  REQUIRE(redex.as_op().args[0].binds_nothing());
  const Term& lam_arg = redex.as_op().args[0].body;
  REQUIRE(lam_arg.as_op().inst.decl->name == "lam");
  REQUIRE(lam_arg.as_op().args[0].bound_vars.size() == 1);
  REQUIRE(redex.as_op().args[1].body == Term::var("y"));

  // a bare identifier is a variable
  REQUIRE(parse_term("x", sig) == Term::var("x"));

  // unresolved head position with parentheses is a metavariable occurrence
  Term m = parse_term("m{u}(x)", sig);
  REQUIRE(m.is_meta());
  REQUIRE(m.as_meta().params == std::vector<std::string>{"u"});
  REQUIRE(m.as_meta().args.size() == 1);

  // the backslash form and the aleph form parse identically
  REQUIRE(parse_term("lam(\\[x].x)", sig) == parse_term("lam([x].x)", sig));
  REQUIRE(parse_term("lam(ℵ[x].x)", sig) == parse_term("lam([x].x)", sig));

  // operator parameters use brackets
  Term g = parse_term("get[u]", sig);
  REQUIRE(g.as_op().inst.params == std::vector<std::string>{"u"});
  REQUIRE(parse_term("get[u]()", sig) == g);
}

TEST_CASE("parse_term rejects malformed input", "[parser]") {
  Signature sig = parse_signature(kAssignablesSig);

  try {
    parse_term("unknown[u](x)", sig);
    FAIL("expected UnknownOperator");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnknownOperator);
    REQUIRE(e.span().has_value());
  }

  REQUIRE_THROWS_AS(parse_term("ap(lam([x].x)", sig), Error);       // unbalanced
  REQUIRE_THROWS_AS(parse_term("lam([x,x].x)", sig), Error);        // duplicate binder
  REQUIRE_THROWS_AS(parse_term("lam([x][y].x)", sig), Error);       // bad binder shape
  REQUIRE_THROWS_AS(parse_term("lam({u}.x)", sig), Error);          // valence mismatch
  REQUIRE_THROWS_AS(parse_term("ap(x, y) trailing", sig), Error);   // trailing tokens
  REQUIRE_THROWS_AS(parse_term("get[u,v]", sig), Error);            // too many parameters
}

TEST_CASE("parse contexts", "[parser]") {
  Signature sig = parse_signature(kAssignablesSig);

  SymbolCtx syms = parse_symbol_ctx("u:exp, v:exp", sig);
  REQUIRE(syms.size() == 2);
  REQUIRE(lookup(syms, "v") == kExp);

  REQUIRE(parse_symbol_ctx(".", sig).empty());
  REQUIRE(parse_symbol_ctx("", sig).empty());
  REQUIRE(parse_var_ctx("x:exp", sig).size() == 1);

  MetaCtx metas = parse_meta_ctx("m:{exp}[exp].exp, n:.exp", sig);
  REQUIRE(to_string(lookup(metas, "m")) == "{exp}[exp].exp");
  REQUIRE(to_string(lookup(metas, "n")) == ".exp");

  REQUIRE_THROWS_AS(parse_symbol_ctx("u:bogus", sig), Error);
  REQUIRE_THROWS_AS(parse_symbol_ctx("u:exp, u:exp", sig), Error);
}

TEST_CASE("print_term renders canonically", "[parser]") {
  Signature sig = parse_signature(kAssignablesSig);

  REQUIRE(print_term(Term::var("x")) == "x");
  REQUIRE(print_term(parse_term("ap(lam([x].x), y)", sig)) == "ap(lam(\\[x].x),y)");
  REQUIRE(print_term(parse_term("get[u]", sig)) == "get[u]");
  REQUIRE(print_term(parse_term("m{u}(x)", sig)) == "m{u}(x)");
  REQUIRE(print_term(parse_term("m()", sig)) == "m()");
  REQUIRE(print_term(parse_term("decl(x, {u}.set[u](x))", sig)) ==
          "decl(x,\\{u}.set[u](x))");

  PrintOptions uni;
  uni.unicode = true;
  REQUIRE(print_term(parse_term("lam([x].x)", sig), uni) == "lam(ℵ[x].x)");
}

TEST_CASE("nullary metavariables round-trip through head position", "[parser]") {
  Signature sig = parse_signature(kAssignablesSig);
  Term m = Term::meta("m", {}, {});
  Term back = parse_term(print_term(m), sig);
  REQUIRE(back == m);
}

TEST_CASE("parse/print round-trip is alpha-identity on random terms", "[parser]") {
  testgen::Rng rng(60911);
  Signature sig = testgen::random_signature(rng);
  for (int iter = 0; iter < 300; ++iter) {
    testgen::GenContexts ctx = testgen::random_contexts(rng, sig);
    Sort target = testgen::pick_one(rng, sig.sorts());
    Term t = testgen::random_term(rng, sig, ctx.metas, ctx.syms, ctx.vars, target, 5);
    Term back = parse_term(print_term(t), sig);
    REQUIRE(alpha_eq(back, t));
    // printing the reparse is byte-stable
    REQUIRE(print_term(back) == print_term(t));
  }
}
