#pragma once

// Normalizers of D = A(G^(0)) and the inverse semigroup N(A, D).
//
// Over a field, n is a normalizer exactly when every source column n*d_u is
// supported on arrows into a single unit phi(u), phi is injective, and each
// column is invertible between the corners d_u A d_u and d_phi(u) A d_phi(u).
// The dagger is the sum of the column inverses.  The literal search over all
// of A is kept as brute_force_daggers and used as the oracle in tests.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cartan_lab/config.hpp"
#include "cartan_lab/enumerate.hpp"
#include "cartan_lab/steinberg.hpp"

namespace cartan_lab {

struct NormalizerCert {
  AlgebraElement n;
  AlgebraElement dagger;
};

/// n k n = n, k n k = k, n D k and k D n inside D (checked on the unit deltas).
inline bool certificate_holds(const AlgebraElement& n, const AlgebraElement& k) {
  if (!(n * k * n == n) || !(k * n * k == k)) return false;
  for (const auto& d : diagonal_basis(n.context()))
    if (!(n * d * k).in_diagonal() || !(k * d * n).in_diagonal()) return false;
  return true;
}

/// n-dagger(gamma^-1) = omega(gamma^-1, gamma)^-1 n(gamma)^-1 on a bisection support.
inline AlgebraElement dagger_closed_form(const AlgebraElement& n) {
  const auto& ctx = n.context();
  const auto& g = ctx->groupoid;
  if (!g.is_bisection(n.support())) throw precondition_error("closed-form dagger needs a bisection support");
  std::vector<AlgebraElement::Term> terms;
  for (const auto& [a, c] : n.terms()) {
    auto ci = c.try_inverse();
    if (!ci) throw precondition_error("closed-form dagger needs unit values; " + c.to_string() + " is not a unit");
    auto ai = g.inv(a);
    terms.emplace_back(ai, ctx->omega(ai, a).inverse() * *ci);
  }
  return AlgebraElement::from_terms(ctx, std::move(terms));
}

/// Every k in A satisfying the normalizer identities with n.  Exhaustive.
inline std::vector<AlgebraElement> brute_force_daggers(const AlgebraElement& n, const Guards& guards = {}) {
  std::vector<AlgebraElement> out;
  for_each_element(n.context(), guards.max_scan, [&](const AlgebraElement& k) {
    if (certificate_holds(n, k)) out.push_back(k);
    return true;
  });
  return out;
}

namespace detail {

/// Arrows with target v and source u, i.e. the corner d_v A d_u.
inline const std::vector<ArrowId>& corner(const FiniteGroupoid& g, ArrowId v, ArrowId u) { return g.hom(v, u); }

/// k in d_u A d_v with k c = d_u and c k = d_v, for c in d_v A d_u.
inline std::optional<AlgebraElement> corner_inverse(const AlgebraElement& c, ArrowId v, ArrowId u) {
  const auto& ctx = c.context();
  const auto& g = ctx->groupoid;
  const auto& unknowns = corner(g, u, v);
  const auto& left_rows = corner(g, u, u);
  const auto& right_rows = corner(g, v, v);
  const auto& R = ctx->ring;
  auto target = [&](ArrowId row, ArrowId unit) { return row == unit ? Coefficient::one(R) : Coefficient::zero(R); };

  if (R.is_field()) {
    const auto m = unknowns.size();
    linalg::Mat sys(left_rows.size() + right_rows.size(), linalg::zeros(R, m));
    linalg::Vec rhs;
    for (auto x : left_rows) rhs.push_back(target(x, u));
    for (auto y : right_rows) rhs.push_back(target(y, v));
    for (std::size_t j = 0; j < m; ++j) {
      auto dz = AlgebraElement::delta(ctx, unknowns[j]);
      auto kc = dz * c, ck = c * dz;
      for (std::size_t i = 0; i < left_rows.size(); ++i) sys[i][j] = kc.at(left_rows[i]);
      for (std::size_t i = 0; i < right_rows.size(); ++i) sys[left_rows.size() + i][j] = ck.at(right_rows[i]);
    }
    auto x = linalg::solve(R, m, sys, rhs);
    if (!x) return std::nullopt;
    std::vector<AlgebraElement::Term> terms;
    for (std::size_t j = 0; j < m; ++j) terms.emplace_back(unknowns[j], (*x)[j]);
    return AlgebraElement::from_terms(ctx, std::move(terms));
  }
  // Residue rings: the corner is tiny; scan it.
  std::vector<AlgebraElement> deltas;
  for (auto z : unknowns) deltas.push_back(AlgebraElement::delta(ctx, z));
  std::optional<AlgebraElement> found;
  auto du = AlgebraElement::delta(ctx, u), dv = AlgebraElement::delta(ctx, v);
  for_each_combination(ctx, deltas, std::uint64_t(1) << 40, [&](const AlgebraElement& k) {
    if (k * c == du && c * k == dv) {
      found = k;
      return false;
    }
    return true;
  });
  return found;
}

/// Splits n into source columns; nullopt when some column meets two targets.
inline std::optional<std::map<ArrowId, std::pair<ArrowId, AlgebraElement>>> columns(const AlgebraElement& n) {
  const auto& ctx = n.context();
  const auto& g = ctx->groupoid;
  std::map<ArrowId, std::pair<ArrowId, std::vector<AlgebraElement::Term>>> cols;
  for (const auto& t : n.terms()) {
    auto u = g.src(t.first), v = g.tgt(t.first);
    auto it = cols.find(u);
    if (it == cols.end()) it = cols.emplace(u, std::make_pair(v, std::vector<AlgebraElement::Term>{})).first;
    if (it->second.first != v) return std::nullopt;
    it->second.second.push_back(t);
  }
  std::map<ArrowId, std::pair<ArrowId, AlgebraElement>> out;
  for (auto& [u, vt] : cols) out.emplace(u, std::make_pair(vt.first, AlgebraElement::from_terms(ctx, vt.second)));
  return out;
}

}  // namespace detail

/// Corner decision.  Exact over fields; over residue rings it is only a
/// sufficient test, so is_normalizer falls back to the exhaustive search there.
inline std::optional<AlgebraElement> corner_dagger(const AlgebraElement& n) {
  auto cols = detail::columns(n);
  if (!cols) return std::nullopt;
  std::vector<bool> hit(n.context()->size(), false);
  auto k = AlgebraElement::zero(n.context());
  for (const auto& [u, vc] : *cols) {
    if (hit[vc.first]) return std::nullopt;
    hit[vc.first] = true;
    auto inv = detail::corner_inverse(vc.second, vc.first, u);
    if (!inv) return std::nullopt;
    k += *inv;
  }
  return k;
}

/// A certificate for n, or nullopt.  Fields use the corner decision; other
/// rings try the closed form and then search exhaustively (guarded).
inline std::optional<NormalizerCert> is_normalizer(const AlgebraElement& n, const Guards& guards = {}) {
  const auto& ctx = n.context();
  if (ctx->ring.is_field()) {
    auto k = corner_dagger(n);
    if (!k) return std::nullopt;
    if (!certificate_holds(n, *k)) throw consistency_failure("corner dagger fails the normalizer identities for " + n.to_string());
    return NormalizerCert{n, *k};
  }
  const auto& g = ctx->groupoid;
  if (g.is_bisection(n.support())) {
    bool unit_valued = std::all_of(n.terms().begin(), n.terms().end(), [](const auto& t) { return t.second.is_unit(); });
    if (unit_valued) {
      auto k = dagger_closed_form(n);
      if (certificate_holds(n, k)) return NormalizerCert{n, k};
    }
  }
  auto ks = brute_force_daggers(n, guards);
  if (ks.empty()) return std::nullopt;
  if (ks.size() > 1) throw consistency_failure("normalizer " + n.to_string() + " has more than one dagger");
  return NormalizerCert{n, ks.front()};
}

inline bool is_free_normalizer(const NormalizerCert& c) {
  return c.n.in_diagonal() || (c.dagger * c.n * (c.n * c.dagger)).is_zero();
}

// ------------------------------------------------------------------ catalog

/// Every normalizer of D in A, with daggers.  Index 0 is the zero element.
class NormalizerCatalog {
 public:
  const ContextPtr& context() const { return ctx_; }
  const std::vector<NormalizerCert>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  const NormalizerCert& operator[](std::size_t i) const { return items_[i]; }

  std::optional<std::size_t> find(const AlgebraElement& n) const {
    auto it = index_.find(n.to_string());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Structured enumeration over a field: partial injections phi of units
  /// times invertible column blocks.
  static NormalizerCatalog structured(const ContextPtr& ctx, const Guards& guards = {}) {
    if (!ctx->ring.is_field() || !ctx->ring.is_finite())
      throw guard_exceeded("structured normalizer enumeration needs a finite field");
    const auto& g = ctx->groupoid;
    const auto& us = g.units();
    // invertible blocks per (u, v): column at source u landing in v
    std::map<std::pair<ArrowId, ArrowId>, std::vector<std::pair<AlgebraElement, AlgebraElement>>> blocks;
    for (auto u : us)
      for (auto v : us) {
        const auto& arrows = g.hom(v, u);
        if (arrows.empty()) continue;
        std::vector<AlgebraElement> deltas;
        for (auto a : arrows) deltas.push_back(AlgebraElement::delta(ctx, a));
        auto& list = blocks[{u, v}];
        for_each_combination(ctx, deltas, guards.max_scan, [&](const AlgebraElement& c) {
          if (c.is_zero()) return true;
          if (auto k = detail::corner_inverse(c, v, u)) list.emplace_back(c, *k);
          return true;
        });
      }
    NormalizerCatalog cat(ctx);
    std::vector<bool> used(g.size(), false);
    auto zero = AlgebraElement::zero(ctx);
    std::function<void(std::size_t, const AlgebraElement&, const AlgebraElement&)> rec =
        [&](std::size_t i, const AlgebraElement& n, const AlgebraElement& k) {
          if (i == us.size()) {
            cat.add({n, k});
            if (cat.size() > guards.max_normalizers)
              throw guard_exceeded("normalizer catalog exceeds guard " + std::to_string(guards.max_normalizers));
            return;
          }
          rec(i + 1, n, k);
          auto u = us[i];
          for (auto v : us) {
            if (used[v]) continue;
            auto it = blocks.find({u, v});
            if (it == blocks.end()) continue;
            used[v] = true;
            for (const auto& [c, ci] : it->second) rec(i + 1, n + c, k + ci);
            used[v] = false;
          }
        };
    rec(0, zero, zero);
    return cat;
  }

  /// Exhaustive enumeration over all of A with the general membership test.
  static NormalizerCatalog exhaustive(const ContextPtr& ctx, const Guards& guards = {}) {
    NormalizerCatalog cat(ctx);
    cat.add({AlgebraElement::zero(ctx), AlgebraElement::zero(ctx)});
    for_each_element(ctx, guards.max_scan, [&](const AlgebraElement& n) {
      if (n.is_zero()) return true;
      if (auto c = is_normalizer(n, guards)) cat.add(*c);
      return true;
    });
    return cat;
  }

  /// Structured for finite fields, exhaustive otherwise.
  static NormalizerCatalog build(const ContextPtr& ctx, const Guards& guards = {}) {
    if (ctx->ring.is_field()) return structured(ctx, guards);
    // the exhaustive route runs an element scan per candidate
    auto total = checked_power(ctx->ring, ctx->size(), guards.max_scan, "normalizer scan");
    if (total * total > guards.max_scan * 64) throw guard_exceeded("exhaustive normalizer search exceeds scan guard");
    return exhaustive(ctx, guards);
  }

 private:
  explicit NormalizerCatalog(ContextPtr ctx) : ctx_(std::move(ctx)) {}
  void add(NormalizerCert c) {
    auto key = c.n.to_string();
    if (index_.count(key)) return;
    index_.emplace(key, items_.size());
    items_.push_back(std::move(c));
  }

  ContextPtr ctx_;
  std::vector<NormalizerCert> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Catalog indices of N(C, D): normalizers lying in C whose dagger also lies in C.
inline std::vector<std::size_t> normalizers_in(const NormalizerCatalog& cat, const Basis& c) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cat.size(); ++i)
    if (c.contains(cat[i].n) && c.contains(cat[i].dagger)) out.push_back(i);
  return out;
}

/// N(C, D) by scanning every element of C; the cross-check for normalizers_in.
inline std::vector<NormalizerCert> enumerate_normalizers_exhaustive(const Basis& c, const Guards& guards = {}) {
  std::vector<NormalizerCert> out;
  for_each_combination(c.context(), c.vectors(), guards.max_scan, [&](const AlgebraElement& n) {
    if (auto cert = is_normalizer(n, guards); cert && c.contains(cert->dagger)) out.push_back(*cert);
    return true;
  });
  return out;
}

// ------------------------------------------------------------------- order

/// n <= m iff n = m e for an idempotent e of D.  Decided per source unit,
/// since e acts on columns independently.
inline bool order_leq(const AlgebraElement& n, const AlgebraElement& m) {
  const auto& ctx = n.context();
  const auto& g = ctx->groupoid;
  auto idem = ring_idempotents(ctx->ring);
  auto nd = n.dense(), md = m.dense();
  for (auto u : g.units()) {
    bool some = false;
    for (const auto& e : idem) {
      bool ok = true;
      for (ArrowId a = 0; a < g.size() && ok; ++a)
        if (g.src(a) == u) ok = nd[a] == md[a] * e;
      if (ok) {
        some = true;
        break;
      }
    }
    if (!some) return false;
  }
  return true;
}

/// Up-set of element i within the index set (all of the catalog when empty).
inline std::vector<std::size_t> up_set(const NormalizerCatalog& cat, std::size_t i,
                                       const std::vector<std::size_t>* within = nullptr) {
  std::vector<std::size_t> out;
  auto test = [&](std::size_t j) {
    if (order_leq(cat[i].n, cat[j].n)) out.push_back(j);
  };
  if (within) {
    for (auto j : *within) test(j);
  } else {
    for (std::size_t j = 0; j < cat.size(); ++j) test(j);
  }
  return out;
}

/// Minimal nonzero elements of the index set under the natural order.
inline std::vector<std::size_t> minimal_nonzero(const NormalizerCatalog& cat, const std::vector<std::size_t>& set) {
  std::vector<std::size_t> out;
  for (auto i : set) {
    if (cat[i].n.is_zero()) continue;
    bool minimal = true;
    for (auto j : set)
      if (j != i && !cat[j].n.is_zero() && order_leq(cat[j].n, cat[i].n)) {
        minimal = false;
        break;
      }
    if (minimal) out.push_back(i);
  }
  return out;
}

inline std::vector<std::size_t> all_indices(const NormalizerCatalog& cat) {
  std::vector<std::size_t> v(cat.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

}  // namespace cartan_lab
