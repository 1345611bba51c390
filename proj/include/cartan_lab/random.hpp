#pragma once

#include <cstdint>
#include <random>

#include "cartan_lab/steinberg.hpp"

namespace cartan_lab {

using Rng = std::mt19937_64;

/// Uniform over a finite ring; over Q a fraction a/b with |a| <= 9, 1 <= b <= 4.
inline Coefficient random_coefficient(const RingDescriptor& r, Rng& rng) {
  if (r.is_finite()) {
    std::uniform_int_distribution<std::int64_t> d(0, std::int64_t(r.size()) - 1);
    return Coefficient::from_int(r, d(rng));
  }
  std::uniform_int_distribution<std::int64_t> num(-9, 9), den(1, 4);
  auto a = num(rng);
  auto b = den(rng);
  return Coefficient::from_rational(r, Rational(a, b));
}

inline AlgebraElement random_element(const ContextPtr& ctx, Rng& rng) {
  auto v = linalg::zeros(ctx->ring, ctx->size());
  for (auto& c : v) c = random_coefficient(ctx->ring, rng);
  return AlgebraElement::from_dense(ctx, v);
}

/// Random element of D.
inline AlgebraElement random_diagonal(const ContextPtr& ctx, Rng& rng) {
  auto f = AlgebraElement::zero(ctx);
  for (auto u : ctx->groupoid.units()) f += AlgebraElement::delta(ctx, u, random_coefficient(ctx->ring, rng));
  return f;
}

}  // namespace cartan_lab
