#pragma once

#include <string>

#include "cartan_lab/steinberg.hpp"

namespace cartan_lab::testing {

inline ContextPtr ctx(FiniteGroupoid g, const std::string& ring) {
  return make_context(std::move(g), RingDescriptor::parse(ring));
}

/// Z2 x Z2, arrow id 2a + b, with omega(x, y) = (-1)^(x1 y2).
inline ContextPtr bicharacter_ctx(const std::string& ring) {
  auto g = build_product(build_cyclic(2), build_cyclic(2));
  auto r = RingDescriptor::parse(ring);
  auto w = Cocycle::from_function(g, r, [&](ArrowId x, ArrowId y) {
    return (x / 2) && (y % 2) ? -Coefficient::one(r) : Coefficient::one(r);
  });
  return make_context(std::move(g), r, std::move(w));
}

inline Coefficient c(const ContextPtr& k, std::int64_t v) { return Coefficient::from_int(k->ring, v); }

inline AlgebraElement d(const ContextPtr& k, ArrowId a, std::int64_t v = 1) {
  return AlgebraElement::delta(k, a, Coefficient::from_int(k->ring, v));
}

}  // namespace cartan_lab::testing
