#include <catch2/catch_amalgamated.hpp>

#include "abt/abt.hpp"
#include "support/testgen.hpp"

using namespace abt;

namespace {
const Sort kExp{"exp"};
}

TEST_CASE("extend_symbols appends fresh bindings", "[contexts]") {
  SymbolCtx empty;
  SymbolCtx u = extend_symbols(empty, "u", kExp);
  REQUIRE(u.bindings() == std::vector<std::pair<std::string, Sort>>{{"u", kExp}});

  SymbolCtx uv = extend_symbols(u, "v", kExp);
  REQUIRE(uv.size() == 2);
  REQUIRE(uv.bindings()[1].first == "v");

  try {
    extend_symbols(u, "u", kExp);
    FAIL("expected DuplicateSymbol");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::DuplicateSymbol);
  }
}

TEST_CASE("extend then lookup round-trips", "[contexts]") {
  SymbolCtx ctx;
  ctx = extend_symbols(ctx, "u", kExp);
  REQUIRE(lookup(ctx, "u") == kExp);

  VarCtx vars = extend_vars(VarCtx{}, "x", kExp);
  REQUIRE(lookup(vars, "x") == kExp);

  Valence v{{kExp}, {kExp}, kExp};
  MetaCtx metas = extend_metas(MetaCtx{}, "m", v);
  REQUIRE(lookup(metas, "m") == v);
  REQUIRE(to_string(lookup(metas, "m")) == "{exp}[exp].exp");
}

TEST_CASE("lookup reports missing names", "[contexts]") {
  SymbolCtx uv = SymbolCtx::from({{"u", kExp}, {"v", kExp}});
  REQUIRE(lookup(uv, "v") == kExp);
  try {
    lookup(SymbolCtx{}, "u");
    FAIL("expected NotFound");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NotFound);
  }
}

TEST_CASE("make_renaming validates the map", "[contexts]") {
  SymbolCtx u = SymbolCtx::from({{"u", kExp}});
  SymbolCtx v = SymbolCtx::from({{"v", kExp}});
  Renaming rho = make_renaming(u, v, {{"u", "v"}});
  REQUIRE(rho.apply("u") == "v");

  // the empty renaming out of the initial object
  Renaming empty = make_renaming(SymbolCtx{}, v, {});
  REQUIRE(empty.mapping().empty());

  // injectivity
  SymbolCtx uw = SymbolCtx::from({{"u", kExp}, {"w", kExp}});
  try {
    make_renaming(uw, v, {{"u", "v"}, {"w", "v"}});
    FAIL("expected NotInjective");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NotInjective);
  }

  // sort preservation
  Sort other{"other"};
  SymbolCtx cod = SymbolCtx::from({{"v", other}});
  try {
    make_renaming(u, cod, {{"u", "v"}});
    FAIL("expected SortViolation");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::SortViolation);
  }

  // completeness
  try {
    make_renaming(uw, SymbolCtx::from({{"v", kExp}}), {{"u", "v"}});
    FAIL("expected IncompleteMap");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::IncompleteMap);
  }
}

TEST_CASE("compose_renamings", "[contexts]") {
  SymbolCtx u = SymbolCtx::from({{"u", kExp}});
  SymbolCtx v = SymbolCtx::from({{"v", kExp}});
  SymbolCtx w = SymbolCtx::from({{"w", kExp}});

  Renaming uv = make_renaming(u, v, {{"u", "v"}});
  Renaming vw = make_renaming(v, w, {{"v", "w"}});
  Renaming uw = compose_renamings(vw, uv);
  REQUIRE(uw.apply("u") == "w");

  // identity laws
  REQUIRE(compose_renamings(Renaming::identity(v), uv) == uv);
  REQUIRE(compose_renamings(uv, Renaming::identity(u)) == uv);

  // a bijection composed with its inverse is the identity
  Renaming vu = make_renaming(v, u, {{"v", "u"}});
  REQUIRE(compose_renamings(vu, uv) == Renaming::identity(u));
  REQUIRE(compose_renamings(uv, vu) == Renaming::identity(v));

  try {
    compose_renamings(uv, vw);
    FAIL("expected ContextMismatch");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::ContextMismatch);
  }
}

TEST_CASE("renaming composition is associative and unital", "[contexts]") {
  testgen::Rng rng(20313);
  for (int iter = 0; iter < 200; ++iter) {
    int n = testgen::pick(rng, 0, 4);
    std::vector<std::pair<std::string, Sort>> a_bindings;
    for (int i = 0; i < n; ++i) {
      a_bindings.emplace_back("a" + std::to_string(i),
                              Sort{testgen::chance(rng, 0.5) ? "s0" : "s1"});
    }
    SymbolCtx A = SymbolCtx::from(a_bindings);

    auto random_step = [&](const SymbolCtx& dom, const std::string& prefix) {
      std::vector<std::pair<std::string, std::string>> pairs;
      std::vector<std::pair<std::string, Sort>> cod_bindings;
      std::vector<int> perm(dom.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < dom.size(); ++i) {
        std::string img = prefix + std::to_string(perm[i]);
        pairs.emplace_back(dom.bindings()[i].first, img);
        cod_bindings.emplace_back(img, dom.bindings()[i].second);
      }
      if (testgen::chance(rng, 0.5)) {
        cod_bindings.emplace_back(prefix + "x", Sort{"s0"});
      }
      return make_renaming(dom, SymbolCtx::from(cod_bindings), pairs);
    };

    Renaming f = random_step(A, "b");
    Renaming g = random_step(f.cod(), "c");
    Renaming h = random_step(g.cod(), "d");

    REQUIRE(compose_renamings(h, compose_renamings(g, f)) ==
            compose_renamings(compose_renamings(h, g), f));
    REQUIRE(compose_renamings(f, Renaming::identity(A)) == f);
    REQUIRE(compose_renamings(Renaming::identity(f.cod()), f) == f);
  }
}

TEST_CASE("renamings are monic", "[contexts]") {
  testgen::Rng rng(40797);
  for (int iter = 0; iter < 100; ++iter) {
    // sigma1, sigma2 : A -> B followed by monic rho : B -> C
    int n = testgen::pick(rng, 1, 3);
    std::vector<std::pair<std::string, Sort>> a_bindings;
    for (int i = 0; i < n; ++i) a_bindings.emplace_back("a" + std::to_string(i), Sort{"s"});
    SymbolCtx A = SymbolCtx::from(a_bindings);

    std::vector<std::pair<std::string, Sort>> b_bindings;
    for (int i = 0; i < n + 1; ++i) b_bindings.emplace_back("b" + std::to_string(i), Sort{"s"});
    SymbolCtx B = SymbolCtx::from(b_bindings);
    std::vector<std::pair<std::string, Sort>> c_bindings;
    for (int i = 0; i < n + 1; ++i) c_bindings.emplace_back("c" + std::to_string(i), Sort{"s"});
    SymbolCtx C = SymbolCtx::from(c_bindings);

    auto inj = [&](const SymbolCtx& dom, const SymbolCtx& cod) {
      std::vector<int> perm(cod.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<std::pair<std::string, std::string>> pairs;
      for (std::size_t i = 0; i < dom.size(); ++i) {
        pairs.emplace_back(dom.bindings()[i].first, cod.bindings()[perm[i]].first);
      }
      return make_renaming(dom, cod, pairs);
    };

    Renaming rho = inj(B, C);
    Renaming s1 = inj(A, B);
    Renaming s2 = inj(A, B);
    if (compose_renamings(rho, s1) == compose_renamings(rho, s2)) {
      REQUIRE(s1 == s2);
    }
  }
}
