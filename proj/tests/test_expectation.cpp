#include <gtest/gtest.h>

#include <algorithm>

#include "cartan_lab/expectation.hpp"
#include "cartan_lab/inclusions.hpp"
#include "cartan_lab/random.hpp"
#include "support.hpp"

using namespace cartan_lab;
using namespace cartan_lab::testing;

namespace {

ArrowSet single(const FiniteGroupoid& g, ArrowId a) {
  auto s = g.empty_set();
  s.set(a);
  return s;
}

}  // namespace

TEST(SubalgebraExpectation, UnitsGiveDelta) {
  auto k = ctx(build_pair(2), "F3");
  auto e = expectation_onto_subalgebra(k, k->groupoid.unit_set());
  EXPECT_TRUE(e.report.is_expectation());
  EXPECT_TRUE(e.report.exhaustive);
  EXPECT_TRUE(*e.report.faithful);
  Rng rng(59);
  for (int i = 0; i < 20; ++i) {
    auto f = random_element(k, rng);
    EXPECT_EQ(e.map(f), delta_expectation(f));
  }
}

TEST(SubalgebraExpectation, RejectsNonWide) {
  auto k = ctx(build_pair(2), "F3");
  EXPECT_THROW(expectation_onto_subalgebra(k, single(k->groupoid, 0)), precondition_error);
  EXPECT_THROW(expectation_onto_subalgebra(k, k->groupoid.unit_set() | single(k->groupoid, 2)), precondition_error);
}

TEST(SubalgebraExpectation, ExampleMapOverF5) {
  auto k = ctx(build_cyclic(3), "F5");
  auto e = example_z3_expectation(k);
  EXPECT_TRUE(e.report.exhaustive);
  EXPECT_TRUE(e.report.linear);
  EXPECT_TRUE(e.report.image_in_c);
  EXPECT_TRUE(e.report.identity_on_c);
  EXPECT_TRUE(e.report.bimodule);
  ASSERT_TRUE(e.report.faithful.has_value());
  EXPECT_TRUE(*e.report.faithful);
  // 1/2 = 3 in F5
  EXPECT_EQ(e.map(d(k, 1)), (d(k, 1) + d(k, 2)).scaled(c(k, 3)));
  EXPECT_THROW(example_z3_expectation(ctx(build_cyclic(3), "F2")), precondition_error);
  EXPECT_THROW(example_z3_expectation(ctx(build_cyclic(2), "F5")), precondition_error);
}

TEST(SubalgebraExpectation, BrokenMapIsCaught) {
  auto k = ctx(build_cyclic(3), "F5");
  auto target = Basis::span_of(k, {d(k, 0), d(k, 1) + d(k, 2)});
  // drops the average factor: not the identity on C
  ExpectationMap bad = [k](const AlgebraElement& f) {
    return AlgebraElement::delta(k, 0, f.at(0)) + (d(k, 1) + d(k, 2)).scaled(f.at(1) + f.at(2));
  };
  auto rep = check_expectation(bad, target);
  EXPECT_FALSE(rep.identity_on_c);
  EXPECT_FALSE(rep.is_expectation());
}

TEST(SubalgebraExpectation, PrincipalTargetsAreCartan) {
  auto k = ctx(build_pair(3), "F3");
  auto cat = NormalizerCatalog::build(k);
  for (const auto& h : wide_subgroupoids(k->groupoid)) {
    auto e = expectation_onto_subalgebra(k, h);
    ASSERT_TRUE(e.report.is_expectation());
    auto v = classify(e.target, &cat).verdict;
    EXPECT_TRUE(v == Verdict::acp || v == Verdict::adp);
  }
}

TEST(SignFamily, EmptyFamily) {
  auto k = ctx(build_pair(3), "Q");
  auto fam = sign_family(k, {});
  ASSERT_EQ(fam.members.size(), 1u);
  EXPECT_EQ(fam.members[0], AlgebraElement::unit_sum(k));
}

TEST(SignFamily, OneBisectionOnPairTwo) {
  auto k = ctx(build_pair(2), "Q");
  const auto& g = k->groupoid;
  auto beta = pair_arrow(2, 1, 0);
  auto fam = sign_family(k, {single(g, beta)});
  ASSERT_EQ(fam.members.size(), 2u);
  auto l = AlgebraElement::unit_sum(k);
  EXPECT_EQ(fam.members[0], l);
  EXPECT_EQ(fam.members[1], l - d(k, g.tgt(beta), 2));
  auto sum = Coefficient::zero(k->ring);
  for (const auto& u : fam.members) sum += u.at(g.tgt(beta)) * u.at(g.src(beta));
  EXPECT_TRUE(sum.is_zero());
}

TEST(SignFamily, TwoBisectionsOnPairThree) {
  auto k = ctx(build_pair(3), "F5");
  const auto& g = k->groupoid;
  auto b1 = single(g, pair_arrow(3, 1, 0)) | single(g, pair_arrow(3, 2, 1));
  // range {1, 2} and source {0, 1} meet: refused
  EXPECT_THROW(sign_family(k, {b1}), precondition_error);
  auto bb1 = single(g, pair_arrow(3, 1, 0));
  auto bb2 = single(g, pair_arrow(3, 0, 2)) | single(g, pair_arrow(3, 1, 2));
  EXPECT_THROW(sign_family(k, {bb2}), precondition_error);
  auto b2 = single(g, pair_arrow(3, 2, 0));
  auto fam = sign_family(k, {bb1, b2});
  ASSERT_EQ(fam.members.size(), 4u);
  for (auto bs : {bb1, b2})
    for (auto a = bs.find_first(); a != ArrowSet::npos; a = bs.find_next(a)) {
      auto sum = Coefficient::zero(k->ring);
      for (const auto& u : fam.members) sum += u.at(g.tgt(ArrowId(a))) * u.at(g.src(ArrowId(a)));
      EXPECT_TRUE(sum.is_zero());
    }
  for (const auto& u : fam.members) {
    EXPECT_TRUE(u.in_diagonal());
    for (auto x : g.units()) EXPECT_TRUE(u.at(x) == c(k, 1) || u.at(x) == c(k, -1));
  }
}

TEST(SignFamily, CharacteristicTwoRefused) {
  auto k = ctx(build_pair(2), "F2");
  EXPECT_THROW(sign_family(k, {}), precondition_error);
}

TEST(Average, DiagonalInputNeedsNoFamily) {
  auto k = ctx(build_pair(3), "Q");
  auto f = d(k, 0, 3) + d(k, 2, -1);
  auto r = average_expectation(f);
  EXPECT_EQ(r.k, 0u);
  EXPECT_EQ(r.value, f);
}

TEST(Average, PairTwoOverF5) {
  auto k = ctx(build_pair(2), "F5");
  auto u1 = k->groupoid.units()[0];
  auto f = d(k, pair_arrow(2, 1, 0)) + d(k, u1, 2);
  auto r = average_expectation(f);
  EXPECT_EQ(r.k, 1u);
  EXPECT_EQ(r.value, d(k, u1, 2));
  EXPECT_TRUE(r.equals_delta);
}

TEST(Average, RandomElementsOfPairThree) {
  Rng rng(61);
  for (auto k : {ctx(build_pair(3), "Q"), ctx(build_pair(3), "F5"), ctx(build_pair(4), "F3")})
    for (int i = 0; i < 100; ++i) {
      auto f = random_element(k, rng);
      EXPECT_EQ(average_expectation(f).value, delta_expectation(f));
    }
}

TEST(Average, IndependentOfDecompositionOrder) {
  Rng rng(67);
  auto k = ctx(build_pair(3), "F5");
  for (int i = 0; i < 30; ++i) {
    auto f = random_element(k, rng);
    std::vector<ArrowId> order(k->size());
    for (ArrowId a = 0; a < k->size(); ++a) order[a] = a;
    auto first = average_expectation(f, &order);
    for (int t = 0; t < 5; ++t) {
      std::shuffle(order.begin(), order.end(), rng);
      auto other = average_expectation(f, &order);
      EXPECT_EQ(other.value, first.value);
    }
  }
}

TEST(Average, Refusals) {
  EXPECT_THROW(average_expectation(d(ctx(build_pair(2), "Z9"), 2)), precondition_error);
  EXPECT_THROW(average_expectation(d(ctx(build_pair(2), "F2"), 2)), precondition_error);
  EXPECT_THROW(average_expectation(d(ctx(build_cyclic(2), "F3"), 1)), precondition_error);
}

TEST(Obstruction, F3Z2) {
  auto k = ctx(build_cyclic(2), "F3");
  auto f = d(k, 0) + d(k, 1);
  auto r = averaging_obstruction(f, 200, 71, 2);
  EXPECT_EQ(r.gamma, 1u);
  EXPECT_EQ(r.random_families, 200u);
  EXPECT_TRUE(r.identity_holds);
  // multisets of size 1 and 2 over the 3 elements of D
  EXPECT_EQ(r.exhaustive_families, 3u + 6u);
  EXPECT_EQ(r.reproducing, 0u);
}

TEST(Obstruction, NoScalingOfAnyPairWorks) {
  // independent oracle: (sum u f u)(gamma) = 0 iff (sum u f u)(unit) = 0
  auto k = ctx(build_cyclic(2), "F3");
  auto f = d(k, 0) + d(k, 1);
  for (std::int64_t a = 0; a < 3; ++a)
    for (std::int64_t b = 0; b < 3; ++b) {
      auto s = sandwich_sum(f, {d(k, 0, a), d(k, 0, b)});
      EXPECT_EQ(s.at(0), s.at(1));
      for (std::int64_t t = 1; t < 3; ++t) EXPECT_NE(s.scaled(c(k, t)), delta_expectation(f));
    }
}

TEST(Obstruction, PaperWitnessShape) {
  auto k = ctx(build_sign_flip(1), "F5");
  const auto& g = k->groupoid;
  ArrowId gamma = 0;
  for (ArrowId a = 0; a < g.size(); ++a)
    if (!g.is_unit(a) && g.src(a) == g.tgt(a)) gamma = a;
  auto f = d(k, gamma) + d(k, g.tgt(gamma));
  auto r = averaging_obstruction(f, 50, 73, 1);
  EXPECT_EQ(r.gamma, gamma);
  EXPECT_TRUE(r.identity_holds);
  EXPECT_EQ(r.reproducing, 0u);
}

TEST(Obstruction, Refusals) {
  auto p = ctx(build_pair(2), "F3");
  EXPECT_THROW(averaging_obstruction(d(p, 2), 10, 1, 1), precondition_error);
  auto z = ctx(build_cyclic(2), "F3");
  EXPECT_THROW(averaging_obstruction(d(z, 1), 10, 1, 1), precondition_error);
}
