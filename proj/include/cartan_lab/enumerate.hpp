#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cartan_lab/config.hpp"
#include "cartan_lab/steinberg.hpp"

namespace cartan_lab {

/// |R|^k, or guard_exceeded when it passes the limit (or R is infinite).
inline std::uint64_t checked_power(const RingDescriptor& r, std::size_t k, std::uint64_t limit, const std::string& what) {
  if (!r.is_finite()) throw guard_exceeded(what + ": cannot enumerate over the infinite ring Q");
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    total *= r.size();
    if (total > limit) throw guard_exceeded(what + ": " + r.to_string() + "^" + std::to_string(k) + " exceeds guard " + std::to_string(limit));
  }
  return total;
}

/// Calls fn on every R-combination of the given vectors (mixed-radix
/// counter, first vector fastest).  Stops early when fn returns false.
inline void for_each_combination(const ContextPtr& ctx, const std::vector<AlgebraElement>& vs, std::uint64_t limit,
                                 const std::function<bool(const AlgebraElement&)>& fn) {
  checked_power(ctx->ring, vs.size(), limit, "element scan");
  auto elems = ring_elements(ctx->ring);
  std::vector<std::size_t> digit(vs.size(), 0);
  while (true) {
    auto v = linalg::zeros(ctx->ring, ctx->size());
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (digit[i] == 0) continue;
      for (const auto& [a, c] : vs[i].terms()) v[a] += elems[digit[i]] * c;
    }
    if (!fn(AlgebraElement::from_dense(ctx, v))) return;
    std::size_t i = 0;
    while (i < vs.size() && ++digit[i] == elems.size()) digit[i++] = 0;
    if (i == vs.size()) return;
  }
}

/// Every element of A.
inline void for_each_element(const ContextPtr& ctx, std::uint64_t limit,
                             const std::function<bool(const AlgebraElement&)>& fn) {
  std::vector<AlgebraElement> deltas;
  for (ArrowId a = 0; a < ctx->size(); ++a) deltas.push_back(AlgebraElement::delta(ctx, a));
  for_each_combination(ctx, deltas, limit, fn);
}

}  // namespace cartan_lab
