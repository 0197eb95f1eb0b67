#include <catch2/catch_amalgamated.hpp>

#include "abt/abt.hpp"
#include "support/testgen.hpp"

using namespace abt;

namespace {

const Sort kExp{"exp"};

Signature lambda_sig() {
  return declare_signature(
      {kExp},
      {
          OperatorDecl{"lam", {}, Arity{{Valence{{}, {kExp}, kExp}}, kExp}},
          OperatorDecl{"fix", {}, Arity{{Valence{{}, {kExp}, kExp}}, kExp}},
          OperatorDecl{"ap", {}, Arity{{Valence{{}, {}, kExp}, Valence{{}, {}, kExp}}, kExp}},
      });
}

Signature assignables_sig() {
  return declare_signature(
      {kExp},
      {
          OperatorDecl{"lam", {}, Arity{{Valence{{}, {kExp}, kExp}}, kExp}},
          OperatorDecl{"ap", {}, Arity{{Valence{{}, {}, kExp}, Valence{{}, {}, kExp}}, kExp}},
          OperatorDecl{"get", {kExp}, Arity{{}, kExp}},
          OperatorDecl{"set", {kExp}, Arity{{Valence{{}, {}, kExp}}, kExp}},
      });
}

Term lam(const Signature& sig, const std::string& x, Term body) {
  return Term::op(make_operator_inst(sig.op("lam"), {}),
                  {Abstraction({}, {{x, kExp}}, std::move(body))});
}

Term ap(const Signature& sig, Term f, Term a) {
  return Term::op(make_operator_inst(sig.op("ap"), {}),
                  {Abstraction(std::move(f)), Abstraction(std::move(a))});
}

}  // namespace

TEST_CASE("check handles the variable rule", "[term]") {
  VarCtx vars = VarCtx::from({{"x", kExp}});
  REQUIRE(check(MetaCtx{}, SymbolCtx{}, vars, Term::var("x")) == kExp);

  try {
    check(MetaCtx{}, SymbolCtx{}, VarCtx{}, Term::var("x"));
    FAIL("expected UnboundVariable");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnboundVariable);
  }
}

TEST_CASE("check infers the sort of a beta redex", "[term]") {
  Signature sig = lambda_sig();
  VarCtx vars = VarCtx::from({{"y", kExp}});
  Term redex = ap(sig, lam(sig, "x", Term::var("x")), Term::var("y"));
  REQUIRE(check(MetaCtx{}, SymbolCtx{}, vars, redex) == kExp);
}

TEST_CASE("check locates failures with a path", "[term]") {
  Signature sig = lambda_sig();
  Term bad = ap(sig, lam(sig, "x", Term::var("x")), Term::var("z"));
  try {
    check(MetaCtx{}, SymbolCtx{}, VarCtx{}, bad);
    FAIL("expected UnboundVariable");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnboundVariable);
    REQUIRE(to_string(e.path()) == "ap.1");
  }
}

TEST_CASE("check applies the metavariable rule", "[term]") {
  Signature sig = assignables_sig();
  MetaCtx metas = MetaCtx::from({{"m", Valence{{kExp}, {kExp}, kExp}}});
  SymbolCtx syms = SymbolCtx::from({{"u", kExp}});
  VarCtx vars = VarCtx::from({{"y", kExp}});

  Term occurrence = Term::meta("m", {"u"}, {Term::var("y")});
  REQUIRE(check(metas, syms, vars, occurrence) == kExp);

  // repeated actual parameters are permitted (sorts checked pointwise)
  MetaCtx metas2 = MetaCtx::from({{"n", Valence{{kExp, kExp}, {}, kExp}}});
  REQUIRE(check(metas2, syms, vars, Term::meta("n", {"u", "u"}, {})) == kExp);

  try {
    check(MetaCtx{}, syms, vars, occurrence);
    FAIL("expected UnboundMetavariable");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnboundMetavariable);
  }
  try {
    check(metas, SymbolCtx{}, vars, occurrence);
    FAIL("expected UnboundSymbol");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnboundSymbol);
  }
  try {
    check(metas, syms, vars, Term::meta("m", {"u"}, {}));
    FAIL("expected ArityMismatch");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::ArityMismatch);
  }
}

TEST_CASE("check_abs infers valences", "[term]") {
  Signature sig = assignables_sig();

  Abstraction identity({}, {{"x", kExp}}, Term::var("x"));
  REQUIRE(to_string(check_abs(MetaCtx{}, SymbolCtx{}, VarCtx{}, identity)) == "[exp].exp");

  // binds a symbol around set[u](y)
  VarCtx vars = VarCtx::from({{"y", kExp}});
  Abstraction setter({{"u", kExp}}, {},
                     Term::op(make_operator_inst(sig.op("set"), {"u"}),
                              {Abstraction(Term::var("y"))}));
  REQUIRE(to_string(check_abs(MetaCtx{}, SymbolCtx{}, vars, setter)) == "{exp}.exp");
}

TEST_CASE("check_abs alpha-renames binders that collide with the context", "[term]") {
  Signature sig = lambda_sig();
  VarCtx vars = VarCtx::from({{"x", kExp}});
  // \[x]. x checked in a context already binding x
  Abstraction shadow({}, {{"x", kExp}}, Term::var("x"));
  REQUIRE(to_string(check_abs(MetaCtx{}, SymbolCtx{}, vars, shadow)) == "[exp].exp");

  // the shadowing binder hides the outer sort
  Signature two = declare_signature(
      {kExp, Sort{"other"}},
      {OperatorDecl{"k", {}, Arity{{Valence{{}, {Sort{"other"}}, Sort{"other"}}}, kExp}}});
  VarCtx outer = VarCtx::from({{"x", kExp}});
  Term t = Term::op(make_operator_inst(two.op("k"), {}),
                    {Abstraction({}, {{"x", Sort{"other"}}}, Term::var("x"))});
  REQUIRE(check(MetaCtx{}, SymbolCtx{}, outer, t) == kExp);
}

TEST_CASE("weakening preserves the inferred sort", "[term]") {
  testgen::Rng rng(91241);
  Signature sig = testgen::random_signature(rng);
  for (int iter = 0; iter < 200; ++iter) {
    testgen::GenContexts ctx = testgen::random_contexts(rng, sig);
    Sort target = testgen::pick_one(rng, sig.sorts());
    Term t = testgen::random_term(rng, sig, ctx.metas, ctx.syms, ctx.vars, target, 4);
    REQUIRE(check(ctx.metas, ctx.syms, ctx.vars, t) == target);

    MetaCtx metas = ctx.metas.extended("fresh_m", Valence{{}, {}, sig.sorts()[0]});
    SymbolCtx syms = ctx.syms.extended("fresh_u", sig.sorts()[1]);
    VarCtx vars = ctx.vars.extended("fresh_x", sig.sorts()[0]);
    REQUIRE(check(metas, syms, vars, t) == target);
  }
}

TEST_CASE("alpha_eq identifies terms up to bound names", "[term]") {
  Signature sig = lambda_sig();

  REQUIRE(alpha_eq(lam(sig, "x", Term::var("x")), lam(sig, "y", Term::var("y"))));
  REQUIRE_FALSE(alpha_eq(lam(sig, "x", Term::var("y")), lam(sig, "x", Term::var("z"))));

  // free occurrences compare nominally
  REQUIRE(alpha_eq(Term::var("x"), Term::var("x")));
  REQUIRE_FALSE(alpha_eq(Term::var("x"), Term::var("y")));
}

TEST_CASE("alpha_eq handles symbol binders", "[term]") {
  Signature sig = assignables_sig();
  auto scoped_set = [&](const std::string& u) {
    // \{u}[]. set[u](m{u}())
    return Term::op(
        make_operator_inst(sig.op("set"), {u}),
        {Abstraction(Term::meta("m", {u}, {}))});
  };
  Abstraction a({{"u", kExp}}, {}, scoped_set("u"));
  Abstraction b({{"w", kExp}}, {}, scoped_set("w"));
  REQUIRE(alpha_eq(a, b));
  REQUIRE(testgen::alpha_oracle_abs(a, b));

  Abstraction c({{"w", kExp}}, {}, scoped_set("u"));  // u free here
  REQUIRE_FALSE(alpha_eq(a, c));
  REQUIRE_FALSE(testgen::alpha_oracle_abs(a, c));
}

TEST_CASE("canonicalize replaces bound occurrences by coordinates", "[term]") {
  Signature sig = lambda_sig();

  // single binder
  CanonicalTerm c1 = canonicalize(lam(sig, "x", Term::var("x")));
  const OpTerm& lam_node = c1.term.as_op();
  REQUIRE(lam_node.args[0].bound_vars[0].first.empty());
  REQUIRE(lam_node.args[0].body.as_var().name == "#v0.0");

  // free variables are left intact
  REQUIRE(canonicalize(Term::var("x")).term == Term::var("x"));

  // nested coordinates: the argument wrapper of ap counts as a binder level
  Term t = Term::op(make_operator_inst(sig.op("fix"), {}),
                    {Abstraction({}, {{"f", kExp}},
                                 ap(sig, Term::var("f"), lam(sig, "x", Term::var("x"))))});
  CanonicalTerm c2 = canonicalize(t);
  const OpTerm& fix_node = c2.term.as_op();
  const OpTerm& ap_node = fix_node.args[0].body.as_op();
  REQUIRE(ap_node.args[0].body.as_var().name == "#v1.0");
  const OpTerm& inner_lam = ap_node.args[1].body.as_op();
  REQUIRE(inner_lam.args[0].body.as_var().name == "#v0.0");
}

TEST_CASE("canonical forms of alpha-equal terms are structurally identical", "[term]") {
  testgen::Rng rng(55100);
  Signature sig = testgen::random_signature(rng);
  for (int iter = 0; iter < 200; ++iter) {
    testgen::GenContexts ctx = testgen::random_contexts(rng, sig);
    Sort target = testgen::pick_one(rng, sig.sorts());
    Term t = testgen::random_term(rng, sig, ctx.metas, ctx.syms, ctx.vars, target, 4);
    Term v = testgen::alpha_variant(rng, t);
    REQUIRE(alpha_eq(t, v));
    REQUIRE(canonicalize(t) == canonicalize(v));
    // idempotence on the canonical representative
    REQUIRE(canonicalize(canonicalize(t).term) == canonicalize(t));
  }
}

TEST_CASE("alpha_eq is an equivalence and check is invariant under it", "[term]") {
  testgen::Rng rng(77003);
  Signature sig = testgen::random_signature(rng);
  for (int iter = 0; iter < 100; ++iter) {
    testgen::GenContexts ctx = testgen::random_contexts(rng, sig);
    Sort target = testgen::pick_one(rng, sig.sorts());
    Term a = testgen::random_term(rng, sig, ctx.metas, ctx.syms, ctx.vars, target, 4);
    Term b = testgen::alpha_variant(rng, a);
    Term c = testgen::alpha_variant(rng, b);
    REQUIRE(alpha_eq(a, a));
    REQUIRE(alpha_eq(a, b));
    REQUIRE(alpha_eq(b, a));
    REQUIRE((alpha_eq(a, b) && alpha_eq(b, c) && alpha_eq(a, c)));
    REQUIRE(check(ctx.metas, ctx.syms, ctx.vars, b) == target);
  }
}

TEST_CASE("alpha_eq agrees with the transposition oracle", "[term]") {
  testgen::Rng rng(12999);
  Signature sig = testgen::random_signature(rng);
  int positives = 0;
  int negatives = 0;
  for (int iter = 0; iter < 300; ++iter) {
    testgen::GenContexts ctx = testgen::random_contexts(rng, sig);
    Sort target = testgen::pick_one(rng, sig.sorts());
    int budget = 3;
    Term a = testgen::random_term(rng, sig, ctx.metas, ctx.syms, ctx.vars, target, 3, &budget);
    Term b = testgen::alpha_variant(rng, a);
    int budget2 = 3;
    Term c = testgen::random_term(rng, sig, ctx.metas, ctx.syms, ctx.vars, target, 3, &budget2);

    bool lib_ab = alpha_eq(a, b);
    bool orc_ab = testgen::alpha_oracle(a, b);
    REQUIRE(lib_ab == orc_ab);
    REQUIRE(lib_ab);

    bool lib_ac = alpha_eq(a, c);
    bool orc_ac = testgen::alpha_oracle(a, c);
    REQUIRE(lib_ac == orc_ac);
    (lib_ac ? positives : negatives)++;
  }
  REQUIRE(negatives > 0);  // the corpus actually distinguishes terms
}
