#pragma once

// Ultrafilters of the normalizer semigroup and the groupoids they form.
// In a finite inverse semigroup every filter has a least element, so an
// ultrafilter is stored by its minimum and materialized as an up-set.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cartan_lab/normalizers.hpp"
#include "cartan_lab/twist.hpp"

namespace cartan_lab {

struct UltrafilterGroupoid {
  /// Sigma' arrow i is the ultrafilter generated by catalog element minima[i].
  std::vector<std::size_t> minima;
  std::vector<std::vector<std::size_t>> members;
  FiniteGroupoid sigma_prime;
  /// G' as tables, so callers may tamper with them before phi_check.
  GroupoidTables g_prime;
  /// Sigma' arrow -> G' arrow
  std::vector<ArrowId> quotient;
  /// G' arrow -> the Sigma' arrows in its scaling orbit
  std::vector<std::vector<ArrowId>> classes;
};

namespace detail {

inline std::size_t catalog_index(const NormalizerCatalog& cat, const AlgebraElement& x, const char* what) {
  auto i = cat.find(x);
  if (!i) throw consistency_failure(std::string(what) + " is not in the normalizer catalog: " + x.to_string());
  return *i;
}

/// Least element of a finite set of normalizers, if one exists.
inline std::optional<std::size_t> least(const NormalizerCatalog& cat, const std::vector<std::size_t>& set) {
  for (auto i : set) {
    bool below_all = true;
    for (auto j : set)
      if (!order_leq(cat[i].n, cat[j].n)) {
        below_all = false;
        break;
      }
    if (below_all) return i;
  }
  return std::nullopt;
}

}  // namespace detail

inline UltrafilterGroupoid ultrafilter_groupoid(const NormalizerCatalog& cat) {
  const auto& ctx = cat.context();
  UltrafilterGroupoid out{{}, {}, build_pair(1), {}, {}, {}};
  auto all = all_indices(cat);
  out.minima = minimal_nonzero(cat, all);
  const auto m = out.minima.size();
  std::vector<std::int64_t> pos(cat.size(), -1);
  for (std::size_t i = 0; i < m; ++i) {
    pos[out.minima[i]] = std::int64_t(i);
    out.members.push_back(up_set(cat, out.minima[i]));
  }
  // maximality: distinct ultrafilters are incomparable
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && std::includes(out.members[j].begin(), out.members[j].end(), out.members[i].begin(), out.members[i].end()))
        throw consistency_failure("non-maximal filter detected among ultrafilters");

  auto uf_of = [&](const AlgebraElement& x, const char* what) {
    auto p = pos[detail::catalog_index(cat, x, what)];
    if (p < 0) throw consistency_failure(std::string(what) + " does not generate an ultrafilter");
    return ArrowId(p);
  };

  std::vector<AlgebraElement> src_proj, tgt_proj;
  for (const auto& c : cat.items()) {
    src_proj.push_back(c.dagger * c.n);
    tgt_proj.push_back(c.n * c.dagger);
  }

  GroupoidTables t;
  t.arrows.resize(m);
  t.inv.resize(m);
  t.comp.assign(m * m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = cat[out.minima[i]];
    auto s = uf_of(a.dagger * a.n, "source projection");
    auto r = uf_of(a.n * a.dagger, "range projection");
    t.arrows[i] = {ArrowId(i), s, r};
    t.inv[i] = uf_of(a.dagger, "dagger");
    if (s == i) t.units.push_back(ArrowId(i));
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      bool composable = true;
      for (auto x : out.members[i]) {
        for (auto y : out.members[j])
          if ((src_proj[x] * tgt_proj[y]).is_zero()) {
            composable = false;
            break;
          }
        if (!composable) break;
      }
      if (composable != (t.arrows[i].src == t.arrows[j].tgt))
        throw consistency_failure("ultrafilter composability disagrees with source/range");
      if (!composable) continue;
      std::set<std::size_t> prods;
      for (auto x : out.members[i])
        for (auto y : out.members[j]) prods.insert(detail::catalog_index(cat, cat[x].n * cat[y].n, "product"));
      std::vector<std::size_t> pv(prods.begin(), prods.end());
      auto lo = detail::least(cat, pv);
      if (!lo || pos[*lo] < 0) throw consistency_failure("ultrafilter product is not an ultrafilter");
      t.comp[i * m + j] = pos[*lo];
    }
  out.sigma_prime = FiniteGroupoid::from_tables(std::move(t));

  // scaling orbits tU = (t a)^up
  out.quotient.assign(m, ArrowId(-1));
  auto scalars = units(ctx->ring);
  for (std::size_t i = 0; i < m; ++i) {
    if (out.quotient[i] != ArrowId(-1)) continue;
    auto c = ArrowId(out.classes.size());
    out.classes.emplace_back();
    for (const auto& s : scalars) {
      auto j = uf_of(cat[out.minima[i]].n.scaled(s), "scaled ultrafilter");
      if (out.quotient[j] == ArrowId(-1)) {
        out.quotient[j] = c;
        out.classes[c].push_back(j);
      } else if (out.quotient[j] != c) {
        throw consistency_failure("scaling orbits overlap");
      }
    }
  }
  const auto& sp = out.sigma_prime;
  const auto k = out.classes.size();
  GroupoidTables gt;
  gt.arrows.resize(k);
  gt.inv.resize(k);
  gt.comp.assign(k * k, -1);
  for (std::size_t c = 0; c < k; ++c) {
    auto rep = out.classes[c].front();
    gt.arrows[c] = {ArrowId(c), out.quotient[sp.src(rep)], out.quotient[sp.tgt(rep)]};
    gt.inv[c] = out.quotient[sp.inv(rep)];
    if (gt.arrows[c].src == c) gt.units.push_back(ArrowId(c));
  }
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < k; ++d)
      for (auto x : out.classes[c])
        for (auto y : out.classes[d]) {
          auto xy = sp.try_compose(x, y);
          if (!xy) continue;
          auto cls = std::int64_t(out.quotient[*xy]);
          if (gt.comp[c * k + d] >= 0 && gt.comp[c * k + d] != cls)
            throw consistency_failure("quotient product is not well defined");
          gt.comp[c * k + d] = cls;
        }
  out.g_prime = std::move(gt);
  return out;
}

/// Phi_G(gamma) = {n : n(gamma) != 0}, matched against the union of an
/// orbit's ultrafilters.  Entry is -1 when no orbit matches.
inline std::vector<std::int64_t> phi_map(const NormalizerCatalog& cat, const UltrafilterGroupoid& ug) {
  const auto& g = cat.context()->groupoid;
  std::vector<std::set<std::size_t>> class_sets;
  for (const auto& cl : ug.classes) {
    std::set<std::size_t> s;
    for (auto i : cl) s.insert(ug.members[i].begin(), ug.members[i].end());
    class_sets.push_back(std::move(s));
  }
  std::vector<std::int64_t> phi(g.size(), -1);
  for (ArrowId a = 0; a < g.size(); ++a) {
    std::set<std::size_t> z;
    for (std::size_t i = 0; i < cat.size(); ++i)
      if (!cat[i].n.at(a).is_zero()) z.insert(i);
    for (std::size_t c = 0; c < class_sets.size(); ++c)
      if (class_sets[c] == z) phi[a] = std::int64_t(c);
  }
  return phi;
}

struct PhiVerdict {
  bool isomorphism = true;
  std::string failure;
  std::vector<std::int64_t> witness;
};

/// Checks that phi: G -> G' is a bijective, unit-preserving, multiplicative
/// map on raw G' tables.
inline PhiVerdict phi_check(const FiniteGroupoid& g, const GroupoidTables& gp, const std::vector<std::int64_t>& phi) {
  auto fail = [](std::string why, std::vector<std::int64_t> w) { return PhiVerdict{false, std::move(why), std::move(w)}; };
  const auto k = gp.arrows.size();
  if (phi.size() != g.size()) return fail("phi has the wrong domain size", {});
  if (k != g.size()) return fail("|G'| differs from |G|", {std::int64_t(k), std::int64_t(g.size())});
  std::vector<bool> hit(k, false);
  for (ArrowId a = 0; a < g.size(); ++a) {
    if (phi[a] < 0 || std::size_t(phi[a]) >= k) return fail("no G' arrow matches Phi_G", {a});
    if (hit[phi[a]]) return fail("Phi_G is not injective", {a});
    hit[phi[a]] = true;
  }
  std::set<std::int64_t> gp_units(gp.units.begin(), gp.units.end());
  for (auto u : g.units())
    if (!gp_units.count(phi[u])) return fail("Phi_G sends a unit to a non-unit", {u});
  for (ArrowId a = 0; a < g.size(); ++a) {
    if (gp.inv[phi[a]] != phi[g.inv(a)]) return fail("Phi_G does not preserve inverses", {a});
    for (ArrowId b = 0; b < g.size(); ++b) {
      auto ab = g.try_compose(a, b);
      auto pab = gp.comp[phi[a] * k + phi[b]];
      if (!ab) {
        if (pab >= 0) return fail("G' composes images of a non-composable pair", {a, b});
        continue;
      }
      if (pab != phi[*ab]) return fail("Phi_G is not multiplicative", {a, b});
    }
  }
  return {};
}

/// Phi_Sigma(t, gamma) = (t delta_gamma)^up.  Checks it is an isomorphism
/// Sigma -> Sigma' whose composite with the quotient is Phi_G.
inline PhiVerdict phi_sigma_check(const NormalizerCatalog& cat, const UltrafilterGroupoid& ug,
                                  const std::vector<std::int64_t>& phi) {
  const auto& ctx = cat.context();
  auto tt = sigma_total(ctx->groupoid, ctx->omega);
  auto fail = [](std::string why, std::vector<std::int64_t> w) { return PhiVerdict{false, std::move(why), std::move(w)}; };
  if (tt.sigma.size() != ug.sigma_prime.size())
    return fail("|Sigma'| differs from |R^x| |G|", {std::int64_t(ug.sigma_prime.size()), std::int64_t(tt.sigma.size())});
  std::vector<std::int64_t> pos(cat.size(), -1);
  for (std::size_t i = 0; i < ug.minima.size(); ++i) pos[ug.minima[i]] = std::int64_t(i);
  std::vector<std::int64_t> ps(tt.sigma.size(), -1);
  std::vector<bool> hit(tt.sigma.size(), false);
  for (ArrowId s = 0; s < tt.sigma.size(); ++s) {
    auto x = AlgebraElement::delta(ctx, tt.base(s), tt.scalar(s));
    auto i = cat.find(x);
    if (!i || pos[*i] < 0) return fail("t delta_gamma is not an ultrafilter generator", {s});
    ps[s] = pos[*i];
    if (hit[ps[s]]) return fail("Phi_Sigma is not injective", {s});
    hit[ps[s]] = true;
    if (std::int64_t(ug.quotient[ps[s]]) != phi[tt.base(s)]) return fail("quotient square does not commute", {s});
  }
  for (ArrowId a = 0; a < tt.sigma.size(); ++a)
    for (ArrowId b = 0; b < tt.sigma.size(); ++b) {
      auto ab = tt.sigma.try_compose(a, b);
      auto pab = ug.sigma_prime.try_compose(ArrowId(ps[a]), ArrowId(ps[b]));
      if (ab.has_value() != pab.has_value() || (ab && std::int64_t(*pab) != ps[*ab]))
        return fail("Phi_Sigma is not multiplicative", {a, b});
    }
  return {};
}

// ---------------------------------------------------------- filter calculus

struct FilterCalculusVerdict {
  bool holds = true;
  std::string failure;
  std::size_t ultrafilters_checked = 0;
  std::size_t products_checked = 0;
};

/// Filter calculus for a sub-semigroup S of T = the full catalog:
///  - each minimal nonzero element of S is minimal in T, so U^up is an ultrafilter;
///  - U^up restricted to S is U;
///  - an ultrafilter W of T meeting S recovers itself as (W n S)^up;
///  - composable ultrafilters of S satisfy (UV)^up = (U^up V^up)^up.
inline FilterCalculusVerdict filter_calculus(const NormalizerCatalog& cat, const std::vector<std::size_t>& s) {
  FilterCalculusVerdict v;
  auto fail = [&](std::string why) {
    v.holds = false;
    v.failure = std::move(why);
    return v;
  };
  std::set<std::size_t> sset(s.begin(), s.end());
  auto all = all_indices(cat);
  auto tmin = minimal_nonzero(cat, all);
  std::set<std::size_t> tmin_set(tmin.begin(), tmin.end());
  auto smin = minimal_nonzero(cat, s);
  auto restrict_s = [&](const std::vector<std::size_t>& xs) {
    std::vector<std::size_t> out;
    for (auto x : xs)
      if (sset.count(x)) out.push_back(x);
    return out;
  };
  auto up_of_set = [&](const std::vector<std::size_t>& xs) {
    auto lo = detail::least(cat, xs);
    if (!lo) return std::vector<std::size_t>{};
    return up_set(cat, *lo);
  };
  for (auto a : smin) {
    ++v.ultrafilters_checked;
    if (!tmin_set.count(a)) return fail("a minimal element of S is not minimal in T: " + cat[a].n.to_string());
    auto u_s = up_set(cat, a, &s);
    auto u_t = up_set(cat, a);
    if (restrict_s(u_t) != u_s) return fail("U^up restricted to S differs from U");
  }
  for (auto w : tmin) {
    auto wt = up_set(cat, w);
    auto ws = restrict_s(wt);
    if (ws.empty()) continue;
    if (up_of_set(ws) != wt) return fail("(W n S)^up differs from W");
  }
  for (auto a : smin)
    for (auto b : smin) {
      const auto& x = cat[a];
      const auto& y = cat[b];
      if ((x.dagger * x.n * (y.n * y.dagger)).is_zero()) continue;
      ++v.products_checked;
      auto us = up_set(cat, a, &s), vs = up_set(cat, b, &s);
      auto ut = up_set(cat, a), vt = up_set(cat, b);
      std::set<std::size_t> p1, p2;
      for (auto i : us)
        for (auto j : vs) p1.insert(detail::catalog_index(cat, cat[i].n * cat[j].n, "product"));
      for (auto i : ut)
        for (auto j : vt) p2.insert(detail::catalog_index(cat, cat[i].n * cat[j].n, "product"));
      if (up_of_set({p1.begin(), p1.end()}) != up_of_set({p2.begin(), p2.end()}))
        return fail("(UV)^up differs from (U^up V^up)^up");
    }
  return v;
}

}  // namespace cartan_lab
