#include <gtest/gtest.h>

#include "cartan_lab/random.hpp"
#include "cartan_lab/twist.hpp"
#include "support.hpp"

using namespace cartan_lab;
using namespace cartan_lab::testing;

namespace {

Cocycle bicharacter(const FiniteGroupoid& g, const RingDescriptor& r) {
  return Cocycle::from_function(g, r, [&](ArrowId x, ArrowId y) {
    return (x / 2) && (y % 2) ? -Coefficient::one(r) : Coefficient::one(r);
  });
}

// Counts composable triples and checks the identity on each, independently
// of validate_cocycle.
std::size_t identity_triples(const FiniteGroupoid& g, const Cocycle& w, bool& all_hold) {
  std::size_t n = 0;
  all_hold = true;
  for (ArrowId a = 0; a < g.size(); ++a)
    for (ArrowId b = 0; b < g.size(); ++b)
      for (ArrowId c = 0; c < g.size(); ++c) {
        if (!g.composable(a, b) || !g.composable(b, c)) continue;
        ++n;
        if (!(w(a, b) * w(g.compose(a, b), c) == w(a, g.compose(b, c)) * w(b, c))) all_hold = false;
      }
  return n;
}

}  // namespace

TEST(Cocycle, TrivialIsValid) {
  for (auto g : {build_pair(3), build_cyclic(4), build_sign_flip(1)}) {
    auto w = Cocycle::trivial(g, RingDescriptor::parse("F3"));
    EXPECT_TRUE(validate_cocycle(g, w).valid);
  }
}

TEST(Cocycle, BicharacterOnAllTriples) {
  auto g = build_product(build_cyclic(2), build_cyclic(2));
  auto r = RingDescriptor::parse("F3");
  auto w = bicharacter(g, r);
  bool hold = false;
  EXPECT_EQ(identity_triples(g, w, hold), 64u);
  EXPECT_TRUE(hold);
  EXPECT_TRUE(validate_cocycle(g, w).valid);
  EXPECT_FALSE(inverse_symmetry_violation(g, w).has_value());
}

TEST(Cocycle, TamperedEntryGivesTriple) {
  auto g = build_product(build_cyclic(2), build_cyclic(2));
  auto r = RingDescriptor::parse("F3");
  auto w = bicharacter(g, r);
  w.set(1, 1, -Coefficient::one(r));
  bool hold = true;
  identity_triples(g, w, hold);
  EXPECT_FALSE(hold);
  auto v = validate_cocycle(g, w);
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.witness.size(), 3u);
  EXPECT_THROW(make_context(g, r, w), input_error);
}

TEST(Cocycle, UnnormalizedIsRejected) {
  auto g = build_cyclic(2);
  auto r = RingDescriptor::parse("F3");
  auto w = Cocycle::from_entries(g, r, {{0, 1, -Coefficient::one(r)}});
  auto v = validate_cocycle(g, w);
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.witness, (std::vector<ArrowId>{0, 1}));
}

TEST(Cocycle, NonUnitValuesAndBadPairs) {
  auto g = build_pair(2);
  auto r = RingDescriptor::parse("Z6");
  EXPECT_THROW(Cocycle::from_entries(g, r, {{2, 3, Coefficient::from_int(r, 2)}}), input_error);
  // arrow 2 is 1 -> 0 and is not composable with itself
  EXPECT_THROW(Cocycle::from_entries(g, r, {{2, 2, Coefficient::one(r)}}), input_error);
}

TEST(Sigma, TrivialTwistOverF3OnZ2) {
  auto g = build_cyclic(2);
  auto r = RingDescriptor::parse("F3");
  auto tt = sigma_total(g, Cocycle::trivial(g, r));
  EXPECT_EQ(tt.sigma.size(), 4u);
  EXPECT_EQ(tt.sigma.num_units(), 1u);
  EXPECT_TRUE(check_axioms(tt.sigma.tables()).valid);
  // every element squares to the unit: Z2 x Z2
  auto u = tt.sigma.units()[0];
  for (ArrowId s = 0; s < 4; ++s) EXPECT_EQ(tt.sigma.compose(s, s), u);
}

TEST(Sigma, CardinalityAndProjection) {
  for (const std::string ring : {"F2", "F3", "F5", "Z4", "Z6"}) {
    auto r = RingDescriptor::parse(ring);
    for (auto g : {build_pair(2), build_cyclic(3), build_sign_flip(1)}) {
      auto tt = sigma_total(g, Cocycle::trivial(g, r));
      EXPECT_EQ(tt.sigma.size(), units(r).size() * g.size());
      std::vector<std::size_t> fiber(g.size(), 0);
      for (ArrowId s = 0; s < tt.sigma.size(); ++s) {
        ++fiber[tt.base(s)];
        for (ArrowId t = 0; t < tt.sigma.size(); ++t)
          if (auto st = tt.sigma.try_compose(s, t)) { EXPECT_EQ(tt.base(*st), g.compose(tt.base(s), tt.base(t))); }
      }
      for (auto f : fiber) EXPECT_EQ(f, units(r).size());
    }
  }
}

TEST(Sigma, BicharacterIsNonAbelian) {
  auto k = bicharacter_ctx("F3");
  auto tt = sigma_total(k->groupoid, k->omega);
  EXPECT_EQ(tt.sigma.size(), 8u);
  EXPECT_TRUE(check_axioms(tt.sigma.tables()).valid);
  bool commute = true;
  for (ArrowId s = 0; s < 8; ++s)
    for (ArrowId t = 0; t < 8; ++t)
      if (tt.sigma.compose(s, t) != tt.sigma.compose(t, s)) commute = false;
  EXPECT_FALSE(commute);
  // the lifts of (1,0) and (0,1) anticommute
  auto one = tt.index_of(Coefficient::one(k->ring));
  auto a = tt.encode(one, 2), b = tt.encode(one, 1);
  auto ab = tt.sigma.compose(a, b), ba = tt.sigma.compose(b, a);
  EXPECT_EQ(tt.base(ab), tt.base(ba));
  EXPECT_EQ(tt.scalar(ab), -tt.scalar(ba));
}

TEST(Sigma, InfiniteRingRefused) {
  auto g = build_cyclic(2);
  EXPECT_THROW(sigma_total(g, Cocycle::trivial(g, RingDescriptor::parse("Q"))), precondition_error);
}

TEST(Contravariant, LiftOfUnitDelta) {
  auto k = ctx(build_cyclic(3), "F5");
  auto tt = sigma_total(k->groupoid, k->omega);
  auto lift = contravariant_lift(tt, d(k, 0).dense());
  for (std::size_t t = 0; t < tt.scalars.size(); ++t) EXPECT_EQ(lift[tt.encode(t, 0)], tt.scalars[t].inverse());
  for (ArrowId s = 0; s < tt.sigma.size(); ++s)
    if (tt.base(s) != 0) { EXPECT_TRUE(lift[s].is_zero()); }
}

TEST(Contravariant, RoundtripAndBrokenLift) {
  Rng rng(7);
  for (auto k : {ctx(build_cyclic(3), "F5"), bicharacter_ctx("F3"), ctx(build_pair(3), "Z4")}) {
    auto tt = sigma_total(k->groupoid, k->omega);
    for (int i = 0; i < 20; ++i) {
      auto f = random_element(k, rng).dense();
      EXPECT_EQ(contravariant_descend(tt, contravariant_lift(tt, f)), f);
    }
  }
  auto k = ctx(build_cyclic(3), "F5");
  auto tt = sigma_total(k->groupoid, k->omega);
  auto big = contravariant_lift(tt, d(k, 1).dense());
  big[tt.encode(2, 1)] += Coefficient::one(k->ring);
  EXPECT_THROW(contravariant_descend(tt, big), consistency_failure);
}

TEST(Contravariant, ConvolutionIntertwines) {
  Rng rng(11);
  for (auto k : {ctx(build_cyclic(3), "F5"), bicharacter_ctx("F3"), bicharacter_ctx("F5"), ctx(build_pair(2), "Z6")}) {
    auto tt = sigma_total(k->groupoid, k->omega);
    for (int i = 0; i < 50; ++i) {
      auto f = random_element(k, rng), h = random_element(k, rng);
      auto lhs = sigma_convolve(k->groupoid, tt, contravariant_lift(tt, f.dense()), contravariant_lift(tt, h.dense()));
      EXPECT_EQ(lhs, contravariant_lift(tt, (f * h).dense()));
    }
  }
}
