#include <gtest/gtest.h>

#include "cartan_lab/enumerate.hpp"
#include "cartan_lab/random.hpp"
#include "support.hpp"

using namespace cartan_lab;
using namespace cartan_lab::testing;

namespace {

std::vector<ContextPtr> small_contexts() {
  return {ctx(build_cyclic(3), "F5"),  ctx(build_pair(2), "F3"),   ctx(build_pair(2), "Z6"),
          bicharacter_ctx("F3"),       bicharacter_ctx("Q"),       ctx(build_sign_flip(1), "F3"),
          ctx(build_cyclic(4), "Z4"),  ctx(build_cyclic(2), "Q")};
}

// Convolution straight from the factorization sum, as an oracle.
AlgebraElement naive_product(const AlgebraElement& f, const AlgebraElement& h) {
  const auto& k = f.context();
  const auto& g = k->groupoid;
  auto out = AlgebraElement::zero(k);
  for (ArrowId gamma = 0; gamma < g.size(); ++gamma) {
    auto acc = Coefficient::zero(k->ring);
    for (ArrowId a = 0; a < g.size(); ++a)
      for (ArrowId b = 0; b < g.size(); ++b)
        if (g.composable(a, b) && g.compose(a, b) == gamma) acc += k->omega(a, b) * f.at(a) * h.at(b);
    out += AlgebraElement::delta(k, gamma, acc);
  }
  return out;
}

}  // namespace

TEST(Convolution, UnitDeltaRestrictsToRange) {
  auto k = ctx(build_pair(3), "F5");
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto f = random_element(k, rng);
    for (auto u : k->groupoid.units()) {
      auto expect = AlgebraElement::zero(k);
      for (const auto& [a, c] : f.terms())
        if (k->groupoid.tgt(a) == u) expect += AlgebraElement::delta(k, a, c);
      EXPECT_EQ(d(k, u) * f, expect);
    }
  }
}

TEST(Convolution, SumSquaredInF2Z3) {
  auto k = ctx(build_cyclic(3), "F2");
  auto s = d(k, 0) + d(k, 1) + d(k, 2);
  EXPECT_EQ(s * s, s);
}

TEST(Convolution, BicharacterDeltas) {
  auto k = bicharacter_ctx("F3");
  const auto& g = k->groupoid;
  bool asymmetric_seen = false;
  for (ArrowId a = 0; a < 4; ++a)
    for (ArrowId b = 0; b < 4; ++b) {
      EXPECT_EQ(d(k, a) * d(k, b), AlgebraElement::delta(k, g.compose(a, b), k->omega(a, b)));
      if (!(k->omega(a, b) == k->omega(b, a))) {
        asymmetric_seen = true;
        EXPECT_NE(d(k, a) * d(k, b), d(k, b) * d(k, a));
      }
    }
  EXPECT_TRUE(asymmetric_seen);
}

TEST(Convolution, MatchesFactorizationSum) {
  Rng rng(5);
  for (const auto& k : small_contexts())
    for (int i = 0; i < 30; ++i) {
      auto f = random_element(k, rng), h = random_element(k, rng);
      EXPECT_EQ(f * h, naive_product(f, h));
    }
}

TEST(Convolution, ContextMismatch) {
  auto a = ctx(build_cyclic(3), "F5"), b = ctx(build_cyclic(3), "F5");
  EXPECT_THROW(d(a, 1) * d(b, 1), context_mismatch);
  EXPECT_THROW(d(a, 1) + d(b, 1), context_mismatch);
}

TEST(Convolution, AssociativeOnBasisTriples) {
  for (const auto& k : small_contexts()) {
    if (k->size() > 4) continue;
    for (ArrowId a = 0; a < k->size(); ++a)
      for (ArrowId b = 0; b < k->size(); ++b)
        for (ArrowId c = 0; c < k->size(); ++c)
          EXPECT_EQ((d(k, a) * d(k, b)) * d(k, c), d(k, a) * (d(k, b) * d(k, c)));
  }
}

TEST(Convolution, AssociativeOnRandomTriples) {
  Rng rng(17);
  auto contexts = small_contexts();
  contexts.push_back(ctx(build_pair(3), "Q"));
  contexts.push_back(ctx(build_product(build_pair(2), build_cyclic(2)), "F3"));
  for (const auto& k : contexts)
    for (int i = 0; i < 500; ++i) {
      auto f = random_element(k, rng), g = random_element(k, rng), h = random_element(k, rng);
      ASSERT_EQ((f * g) * h, f * (g * h));
    }
}

TEST(Convolution, LocalUnits) {
  Rng rng(19);
  for (const auto& k : small_contexts())
    for (int i = 0; i < 20; ++i) {
      auto f = random_element(k, rng);
      auto e = local_unit(f);
      EXPECT_TRUE(e.in_diagonal());
      EXPECT_EQ(e * e, e);
      EXPECT_EQ(e * f, f);
      EXPECT_EQ(f * e, f);
    }
  auto k = ctx(build_pair(3), "F3");
  EXPECT_EQ(AlgebraElement::unit_sum(k) * d(k, 5), d(k, 5));
}

TEST(Expectation, Restriction) {
  auto k = ctx(build_cyclic(3), "F5");
  EXPECT_EQ(delta_expectation(d(k, 0) + d(k, 1, 2)), d(k, 0));
  EXPECT_TRUE(delta_expectation(d(k, 1) + d(k, 2, 3)).is_zero());
  auto p = ctx(build_pair(3), "F5");
  auto x = d(p, 0, 2) + d(p, 2, 4);
  EXPECT_EQ(delta_expectation(x), x);
}

TEST(Expectation, IdempotentAndBimodule) {
  Rng rng(23);
  for (const auto& k : small_contexts()) {
    auto dbasis = diagonal_basis(k);
    for (int i = 0; i < 20; ++i) {
      auto f = random_element(k, rng);
      EXPECT_EQ(delta_expectation(delta_expectation(f)), delta_expectation(f));
      for (const auto& x : dbasis)
        for (const auto& y : dbasis) EXPECT_EQ(delta_expectation(x * f * y), x * delta_expectation(f) * y);
    }
  }
}

TEST(Expectation, FaithfulOnPrincipal) {
  // Delta(delta_gamma f) = 0 for every arrow forces f = 0.
  for (auto k : {ctx(build_pair(2), "F3"), ctx(build_pair(3), "F2")}) {
    std::size_t killed = 0;
    for_each_element(k, 1'000'000, [&](const AlgebraElement& f) {
      bool all_zero = true;
      for (ArrowId a = 0; a < k->size() && all_zero; ++a)
        if (!delta_expectation(d(k, a) * f).is_zero()) all_zero = false;
      killed += all_zero;
      return true;
    });
    EXPECT_EQ(killed, 1u);
  }
}

TEST(Decomposition, SingleBisection) {
  auto k = ctx(build_pair(3), "F3");
  auto f = d(k, pair_arrow(3, 1, 0)) + d(k, pair_arrow(3, 2, 1));
  auto pieces = decompose_bisections(f);
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_EQ(pieces[0].support, f.support());
  EXPECT_FALSE(pieces[0].in_units);
}

TEST(Decomposition, PairTwoIdentityFunction) {
  auto k = ctx(build_pair(2), "F3");
  auto f = AlgebraElement::indicator(k, k->groupoid.all_arrows());
  auto plain = decompose_bisections(f);
  EXPECT_EQ(plain.size(), 2u);
  auto refined = decompose_bisections(f, DecompositionMode::disjoint_range_source);
  ASSERT_EQ(refined.size(), 3u);
  std::size_t unit_pieces = 0;
  for (const auto& p : refined) {
    EXPECT_TRUE(k->groupoid.is_bisection(p.support));
    if (p.in_units) {
      ++unit_pieces;
      EXPECT_EQ(p.support, k->groupoid.unit_set());
    } else {
      EXPECT_EQ(p.support.count(), 1u);
    }
  }
  EXPECT_EQ(unit_pieces, 1u);
  EXPECT_EQ(reassemble(k, refined), f);
}

TEST(Decomposition, UnitSupportIsOnePiece) {
  auto k = ctx(build_pair(3), "F5");
  auto f = d(k, 0, 2) + d(k, 1, 2) + d(k, 2, 2);
  auto pieces = decompose_bisections(f, DecompositionMode::disjoint_range_source);
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_TRUE(pieces[0].in_units);
}

TEST(Decomposition, RefinedNeedsPrincipal) {
  auto k = ctx(build_cyclic(3), "F5");
  EXPECT_THROW(decompose_bisections(d(k, 1), DecompositionMode::disjoint_range_source), precondition_error);
}

TEST(Decomposition, RandomReassembly) {
  Rng rng(29);
  for (auto k : {ctx(build_pair(3), "F5"), ctx(build_pair(4), "Q"), ctx(build_sign_flip(2), "Z4")}) {
    bool principal = predicates(k->groupoid).principal;
    for (int i = 0; i < 50; ++i) {
      auto f = random_element(k, rng);
      for (auto mode : {DecompositionMode::bisections, DecompositionMode::disjoint_range_source}) {
        if (mode == DecompositionMode::disjoint_range_source && !principal) continue;
        auto pieces = decompose_bisections(f, mode);
        EXPECT_EQ(reassemble(k, pieces), f);
        for (const auto& p : pieces) {
          EXPECT_TRUE(k->groupoid.is_bisection(p.support));
          if (mode != DecompositionMode::disjoint_range_source || p.in_units) continue;
          for (auto a = p.support.find_first(); a != ArrowSet::npos; a = p.support.find_next(a))
            for (auto b = p.support.find_first(); b != ArrowSet::npos; b = p.support.find_next(b))
              EXPECT_NE(k->groupoid.tgt(ArrowId(a)), k->groupoid.src(ArrowId(b)));
        }
      }
    }
  }
}

TEST(Closures, WholeAlgebraFromDelta1) {
  auto k = ctx(build_cyclic(3), "F5");
  EXPECT_EQ(algebra_closure(k, {d(k, 0), d(k, 1)}).dim(), 3u);
}

TEST(Closures, ExampleSubalgebraOfF5Z3) {
  auto k = ctx(build_cyclic(3), "F5");
  auto s = d(k, 1) + d(k, 2);
  EXPECT_EQ(s * s, d(k, 0, 2) + d(k, 1) + d(k, 2));
  auto c = algebra_closure(k, {d(k, 0), s});
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_EQ(c.vectors(), (std::vector<AlgebraElement>{d(k, 0), s}));
  EXPECT_TRUE(c.is_subalgebra());
}

TEST(Closures, SpanDropsDependentVectors) {
  auto k = ctx(build_pair(2), "Q");
  auto x = d(k, 2) + d(k, 3);
  EXPECT_EQ(span_closure(k, {x, d(k, 2), d(k, 3), x.scaled(c(k, 5))}).dim(), 2u);
}

TEST(Closures, NeedField) {
  auto k = ctx(build_cyclic(2), "Z4");
  EXPECT_THROW(span_closure(k, {d(k, 1)}), precondition_error);
}

TEST(Closures, ClosureIsClosed) {
  Rng rng(31);
  for (auto k : {ctx(build_pair(3), "F3"), ctx(build_sign_flip(1), "F5"), bicharacter_ctx("F3")})
    for (int i = 0; i < 10; ++i) {
      auto b = algebra_closure(k, {random_element(k, rng)});
      EXPECT_TRUE(b.is_subalgebra());
    }
}

TEST(Restriction, AllUnitsIsIdentity) {
  auto k = ctx(build_pair(3), "F5");
  auto rc = restrict_context(k, k->groupoid.unit_set());
  Rng rng(37);
  auto f = random_element(k, rng);
  EXPECT_EQ(restriction_map(f, rc).dense(), f.dense());
}

TEST(Restriction, MultiplicativeWithKernelOnComplement) {
  auto g = build_disjoint_union({build_pair(2), build_cyclic(2)});
  auto k = ctx(g, "F3");
  auto x = g.empty_set();
  for (auto u : g.units())
    if (g.iso_size(u) == 1) x.set(u);
  auto rc = restrict_context(k, x);
  EXPECT_EQ(rc.context->size(), 4u);
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    auto f = random_element(k, rng), h = random_element(k, rng);
    EXPECT_EQ(restriction_map(f * h, rc), restriction_map(f, rc) * restriction_map(h, rc));
  }
  // kernel: exactly the functions supported on the other component
  std::size_t kernel = 0;
  for_each_element(k, 1'000'000, [&](const AlgebraElement& f) {
    if (restriction_map(f, rc).is_zero()) {
      ++kernel;
      for (const auto& [a, c] : f.terms()) EXPECT_FALSE(x.test(g.src(a)));
    }
    return true;
  });
  EXPECT_EQ(kernel, 9u);
}

TEST(Restriction, NonInvariantRefused) {
  auto k = ctx(build_pair(2), "F3");
  auto x = k->groupoid.empty_set();
  x.set(0);
  EXPECT_THROW(restrict_context(k, x), precondition_error);
}
