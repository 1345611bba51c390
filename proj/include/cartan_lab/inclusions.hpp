#pragma once

// Classification of intermediate inclusions D <= C <= A, the Galois
// correspondence with wide subgroupoids, the singly-generated purely
// quasi-Cartan scan, the two-arrows and bad-apple constructions and the
// D-bimodule spectral test.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cartan_lab/config.hpp"
#include "cartan_lab/enumerate.hpp"
#include "cartan_lab/normalizers.hpp"
#include "cartan_lab/steinberg.hpp"

namespace cartan_lab {

enum class Verdict { not_quasi_cartan, aqp, acp, adp, undetermined };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::not_quasi_cartan: return "not-quasi-Cartan";
    case Verdict::aqp: return "AQP";
    case Verdict::acp: return "ACP";
    case Verdict::adp: return "ADP";
    case Verdict::undetermined: return "undetermined";
  }
  return "?";
}

inline bool is_quasi_cartan(Verdict v) { return v == Verdict::aqp || v == Verdict::acp || v == Verdict::adp; }

struct Witness {
  std::string description;
  std::vector<AlgebraElement> elements;
};

struct InclusionReport {
  std::optional<Basis> c_basis;
  /// Set when C was given as A(H) for a wide subgroupoid H.
  std::optional<ArrowSet> coordinate;
  std::optional<bool> wt, regular, delta_faithful, idempotent_implemented, maximal_abelian, free_span, lbh;
  std::optional<std::pair<Coefficient, Coefficient>> wt_witness;
  std::map<std::string, Witness> witnesses;
  std::map<std::string, std::string> skipped;
  std::size_t normalizer_count = 0;
  std::size_t dim = 0;
  Verdict verdict = Verdict::undetermined;
  /// free_span => maximal_abelian => idempotent_implemented, given the base conditions.
  bool monotone = true;
};

namespace detail {

/// Verdict from flags per the definitions: the base conditions are WT,
/// regularity and faithfulness; then the strongest of ADP, ACP, AQP.
inline Verdict verdict_from(const InclusionReport& r) {
  for (const auto& f : {r.wt, r.regular, r.delta_faithful})
    if (f && !*f) return Verdict::not_quasi_cartan;
  for (const auto& f : {r.wt, r.regular, r.delta_faithful})
    if (!f) return Verdict::undetermined;
  if (r.free_span && *r.free_span) return Verdict::adp;
  if (r.maximal_abelian && *r.maximal_abelian) return Verdict::acp;
  if (r.idempotent_implemented && *r.idempotent_implemented) return Verdict::aqp;
  if (!r.free_span || !r.maximal_abelian || !r.idempotent_implemented) return Verdict::undetermined;
  return Verdict::not_quasi_cartan;
}

/// Delta(n) = e n = n e for an idempotent e of D, decided unit by unit.
inline bool implemented_by_idempotent(const AlgebraElement& n) {
  const auto& ctx = n.context();
  const auto& g = ctx->groupoid;
  auto idem = ring_idempotents(ctx->ring);
  for (auto u : g.units()) {
    bool some = false;
    for (const auto& e : idem) {
      bool ok = true;
      for (const auto& [a, c] : n.terms()) {
        if (g.tgt(a) != u && g.src(a) != u) continue;
        auto want = g.is_unit(a) ? c : Coefficient::zero(ctx->ring);
        if ((g.tgt(a) == u && !(e * c == want)) || (g.src(a) == u && !(c * e == want))) {
          ok = false;
          break;
        }
      }
      if (ok) {
        some = true;
        break;
      }
    }
    if (!some) return false;
  }
  return true;
}

/// R-submodule generated by gens, by additive closure.  Guarded.
inline std::size_t module_span_size(const ContextPtr& ctx, const std::vector<AlgebraElement>& gens, std::uint64_t limit) {
  auto scalars = ring_elements(ctx->ring);
  std::vector<AlgebraElement> steps;
  for (const auto& g : gens)
    for (const auto& t : scalars)
      if (!t.is_zero()) steps.push_back(g.scaled(t));
  std::set<std::string> seen{AlgebraElement::zero(ctx).to_string()};
  std::vector<AlgebraElement> frontier{AlgebraElement::zero(ctx)};
  while (!frontier.empty()) {
    auto x = frontier.back();
    frontier.pop_back();
    for (const auto& s : steps) {
      auto y = x + s;
      if (seen.insert(y.to_string()).second) {
        if (seen.size() > limit) throw guard_exceeded("module span exceeds scan guard");
        frontier.push_back(y);
      }
    }
  }
  return seen.size();
}

inline ArrowSet isotropy_set(const FiniteGroupoid& g) {
  ArrowSet s = g.empty_set();
  for (const auto& a : g.arrows())
    if (a.src == a.tgt) s.set(a.id);
  return s;
}

}  // namespace detail

/// The normalizer catalog of (A, D), or nullopt when it cannot be enumerated.
inline std::optional<NormalizerCatalog> try_catalog(const ContextPtr& ctx, const Guards& guards, std::string* why) {
  try {
    return NormalizerCatalog::build(ctx, guards);
  } catch (const guard_exceeded& e) {
    if (why) *why = e.what();
    return std::nullopt;
  }
}

/// Flags that depend only on N(C, D) (idempotent implementation, LBH).
inline void classify_normalizer_flags(InclusionReport& r, const NormalizerCatalog& cat,
                                      const std::vector<std::size_t>& ncd) {
  r.normalizer_count = ncd.size();
  r.idempotent_implemented = true;
  r.lbh = true;
  const auto& g = cat.context()->groupoid;
  for (auto i : ncd) {
    const auto& n = cat[i].n;
    if (*r.idempotent_implemented && !detail::implemented_by_idempotent(n)) {
      r.idempotent_implemented = false;
      r.witnesses["idempotent_implemented"] = {"Delta(n) is not e n = n e for any idempotent e", {n, delta_expectation(n)}};
    }
    if (*r.lbh && !g.is_bisection(n.support())) {
      r.lbh = false;
      r.witnesses["lbh"] = {"normalizer support is not a bisection", {n}};
    }
  }
}

/// Classifies D <= C for C given by an echelon basis (field coefficients).
/// The catalog of N(A, D) is built when not supplied.
inline InclusionReport classify(const Basis& c, const NormalizerCatalog* catalog = nullptr, const Guards& guards = {}) {
  const auto& ctx = c.context();
  if (!c.contains_diagonal()) throw precondition_error("C does not contain D");
  if (!c.is_subalgebra()) throw precondition_error("C is not closed under convolution");
  InclusionReport r;
  r.c_basis = c;
  r.dim = c.dim();
  auto wt = wt_check(ctx->ring);
  r.wt = wt.holds;
  r.wt_witness = wt.witness;

  // maximal abelian: the commutant of D in C is C n A(Iso)
  auto comm = c.intersect(Basis::coordinate(ctx, detail::isotropy_set(ctx->groupoid)));
  r.maximal_abelian = comm.dim() == ctx->groupoid.num_units();
  if (!*r.maximal_abelian)
    for (const auto& v : comm.vectors())
      if (!v.in_diagonal()) {
        r.witnesses["maximal_abelian"] = {"element of C commuting with D but outside D", {v}};
        break;
      }

  std::optional<NormalizerCatalog> own;
  if (!catalog) {
    std::string why;
    own = try_catalog(ctx, guards, &why);
    if (!own) {
      for (auto f : {"regular", "delta_faithful", "idempotent_implemented", "free_span", "lbh"}) r.skipped[f] = why;
      r.verdict = detail::verdict_from(r);
      return r;
    }
    catalog = &*own;
  }
  auto ncd = normalizers_in(*catalog, c);
  classify_normalizer_flags(r, *catalog, ncd);

  std::vector<AlgebraElement> ns, frees;
  for (auto i : ncd) {
    ns.push_back((*catalog)[i].n);
    if (is_free_normalizer((*catalog)[i])) frees.push_back((*catalog)[i].n);
  }
  auto span_n = Basis::span_of(ctx, ns);
  r.regular = span_n.dim() == c.dim();
  if (!*r.regular)
    for (const auto& v : c.vectors())
      if (!span_n.contains(v)) {
        r.witnesses["regular"] = {"element of C outside span N(C,D)", {v}};
        break;
      }
  auto span_f = Basis::span_of(ctx, frees);
  r.free_span = span_f.dim() == c.dim();
  if (!*r.free_span)
    for (const auto& v : c.vectors())
      if (!span_f.contains(v)) {
        r.witnesses["free_span"] = {"element of C outside the span of free normalizers", {v}};
        break;
      }

  // faithful: a in C with Delta(n a) = 0 for all n in span N(C,D)
  auto cv = c.vectors();
  auto nv = span_n.vectors();
  const auto& units_list = ctx->groupoid.units();
  linalg::Mat sys;
  for (const auto& n : nv) {
    std::vector<AlgebraElement> prods;
    for (const auto& b : cv) prods.push_back(n * b);
    for (auto u : units_list) {
      linalg::Vec row;
      for (const auto& p : prods) row.push_back(p.at(u));
      sys.push_back(std::move(row));
    }
  }
  auto null = linalg::nullspace(ctx->ring, cv.size(), sys);
  r.delta_faithful = null.empty();
  if (!null.empty()) {
    auto a = AlgebraElement::zero(ctx);
    for (std::size_t i = 0; i < cv.size(); ++i) a += cv[i].scaled(null[0][i]);
    r.witnesses["delta_faithful"] = {"nonzero a in C with Delta(n a) = 0 for every normalizer n", {a}};
  }

  r.verdict = detail::verdict_from(r);
  if (r.wt.value_or(false) && r.regular.value_or(false) && r.delta_faithful.value_or(false)) {
    if (*r.free_span && !*r.maximal_abelian) r.monotone = false;
    if (*r.maximal_abelian && !*r.idempotent_implemented) r.monotone = false;
  }
  return r;
}

/// Classifies D <= A(H) for a wide subgroupoid H, over any finite ring.
/// Non-field rings use exhaustive module spans and scans.
inline InclusionReport classify_coordinate(const ContextPtr& ctx, const ArrowSet& h,
                                           const NormalizerCatalog* catalog = nullptr, const Guards& guards = {}) {
  const auto& g = ctx->groupoid;
  if (!is_subgroupoid(g, h) || !is_wide(g, h)) throw precondition_error("A(H) needs a wide subgroupoid H");
  if (ctx->ring.is_field()) {
    auto r = classify(Basis::coordinate(ctx, h), catalog, guards);
    r.coordinate = h;
    return r;
  }
  InclusionReport r;
  r.coordinate = h;
  r.dim = h.count();
  auto wt = wt_check(ctx->ring);
  r.wt = wt.holds;
  r.wt_witness = wt.witness;
  auto iso = detail::isotropy_set(g) & h;
  r.maximal_abelian = iso == g.unit_set();
  if (!*r.maximal_abelian)
    for (auto a = iso.find_first(); a != ArrowSet::npos; a = iso.find_next(a))
      if (!g.is_unit(ArrowId(a))) {
        r.witnesses["maximal_abelian"] = {"isotropy delta in C outside D", {AlgebraElement::delta(ctx, ArrowId(a))}};
        break;
      }
  std::optional<NormalizerCatalog> own;
  std::string why;
  if (!catalog) {
    own = try_catalog(ctx, guards, &why);
    if (own) catalog = &*own;
  }
  if (!catalog) {
    for (auto f : {"regular", "delta_faithful", "idempotent_implemented", "free_span", "lbh"}) r.skipped[f] = why;
    r.verdict = detail::verdict_from(r);
    return r;
  }
  auto in_h = [&](const AlgebraElement& x) { return x.support().is_subset_of(h); };
  std::vector<std::size_t> ncd;
  for (std::size_t i = 0; i < catalog->size(); ++i)
    if (in_h((*catalog)[i].n) && in_h((*catalog)[i].dagger)) ncd.push_back(i);
  classify_normalizer_flags(r, *catalog, ncd);
  std::vector<AlgebraElement> ns, frees;
  for (auto i : ncd) {
    ns.push_back((*catalog)[i].n);
    if (is_free_normalizer((*catalog)[i])) frees.push_back((*catalog)[i].n);
  }
  try {
    auto full = checked_power(ctx->ring, h.count(), guards.max_scan, "A(H) scan");
    r.regular = detail::module_span_size(ctx, ns, guards.max_scan) == full;
    r.free_span = detail::module_span_size(ctx, frees, guards.max_scan) == full;
    std::vector<AlgebraElement> deltas;
    for (auto a = h.find_first(); a != ArrowSet::npos; a = h.find_next(a)) deltas.push_back(AlgebraElement::delta(ctx, ArrowId(a)));
    r.delta_faithful = true;
    for_each_combination(ctx, deltas, guards.max_scan, [&](const AlgebraElement& a) {
      if (a.is_zero()) return true;
      for (const auto& n : ns)
        if (!delta_expectation(n * a).is_zero()) return true;
      r.delta_faithful = false;
      r.witnesses["delta_faithful"] = {"nonzero a in C with Delta(n a) = 0 for every normalizer n", {a}};
      return false;
    });
  } catch (const guard_exceeded& e) {
    for (auto f : {"regular", "delta_faithful", "free_span"}) r.skipped[f] = e.what();
    r.regular.reset();
    r.free_span.reset();
    r.delta_faithful.reset();
  }
  r.verdict = detail::verdict_from(r);
  return r;
}

// ------------------------------------------------------- generator scans

/// alg(D u {c}) only depends on the non-unit part of c up to a nonzero
/// scalar.  Returns one representative per class: non-unit coordinates with
/// leading coefficient 1, plus zero.
inline std::vector<AlgebraElement> canonical_generators(const ContextPtr& ctx, const Guards& guards = {}) {
  const auto& g = ctx->groupoid;
  std::vector<ArrowId> coords;
  for (ArrowId a = 0; a < g.size(); ++a)
    if (!g.is_unit(a)) coords.push_back(a);
  checked_power(ctx->ring, coords.size(), guards.max_generators, "generator scan");
  std::vector<AlgebraElement> out{AlgebraElement::zero(ctx)};
  auto elems = ring_elements(ctx->ring);
  for (std::size_t lead = 0; lead < coords.size(); ++lead) {
    std::vector<AlgebraElement> rest;
    for (std::size_t j = lead + 1; j < coords.size(); ++j) rest.push_back(AlgebraElement::delta(ctx, coords[j]));
    auto head = AlgebraElement::delta(ctx, coords[lead]);
    for_each_combination(ctx, rest, guards.max_generators, [&](const AlgebraElement& tail) {
      out.push_back(head + tail);
      return true;
    });
  }
  return out;
}

/// Canonical representative of c's class.
inline AlgebraElement canonical_generator(const AlgebraElement& c) {
  auto x = c - delta_expectation(c);
  if (x.is_zero()) return x;
  return x.scaled(x.terms().front().second.inverse());
}

inline Basis closure_with_diagonal(const AlgebraElement& c) {
  auto gens = diagonal_basis(c.context());
  gens.push_back(c);
  return Basis::algebra_of(c.context(), gens);
}

struct DistinctClosure {
  Basis basis;
  /// First canonical generator producing it.
  AlgebraElement generator;
};

/// Deduplicated singly generated closures alg(D u {c}) in generator order.
inline std::vector<DistinctClosure> singly_generated_closures(const ContextPtr& ctx, const Guards& guards = {}) {
  std::vector<DistinctClosure> out;
  std::set<std::string> seen;
  for (const auto& c : canonical_generators(ctx, guards)) {
    auto b = closure_with_diagonal(c);
    if (seen.insert(b.key()).second) out.push_back({std::move(b), c});
  }
  return out;
}

// ------------------------------------------------------------------ galois

struct LatticeReport {
  std::vector<ArrowSet> wide;
  std::vector<Basis> algebras;
  /// wide index -> algebra index
  std::vector<std::int64_t> h_to_c;
  /// algebra index -> wide index
  std::vector<std::int64_t> c_to_h;
  std::size_t closures_scanned = 0;
  std::size_t saturation_added = 0;
  bool bijection = true;
  bool order_isomorphism = true;
  bool meets_match = true;
  bool joins_match = true;
  bool lattice_closed = true;
  std::vector<std::string> failures;
  /// meet/join tables over algebra indices
  std::vector<std::vector<std::int64_t>> meet, join;
  bool isomorphism() const { return bijection && order_isomorphism && meets_match && joins_match && lattice_closed; }
};

inline Basis lattice_meet(const Basis& a, const Basis& b, const NormalizerCatalog& cat) {
  auto inter = a.intersect(b);
  std::vector<AlgebraElement> ns;
  for (auto i : normalizers_in(cat, inter)) ns.push_back(cat[i].n);
  return Basis::span_of(a.context(), ns);
}

inline Basis lattice_join(const Basis& a, const Basis& b) {
  auto gens = a.vectors();
  for (const auto& v : b.vectors()) gens.push_back(v);
  return Basis::algebra_of(a.context(), gens);
}

/// G_C: arrows where some element of C is nonzero.
inline ArrowSet groupoid_of(const Basis& c) { return c.support(); }

inline LatticeReport galois(const ContextPtr& ctx, const Guards& guards = {}) {
  LatticeReport rep;
  const auto& g = ctx->groupoid;
  auto cat = NormalizerCatalog::build(ctx, guards);
  rep.wide = wide_subgroupoids(g, guards);

  std::vector<Basis> found;
  std::map<std::string, std::size_t> index;
  auto consider = [&](const Basis& b) -> std::int64_t {
    auto k = b.key();
    if (auto it = index.find(k); it != index.end()) return std::int64_t(it->second);
    auto r = classify(b, &cat, guards);
    if (r.verdict == Verdict::undetermined) throw guard_exceeded("classification undetermined during Galois scan");
    if (!is_quasi_cartan(r.verdict)) return -1;
    index.emplace(k, found.size());
    found.push_back(b);
    return std::int64_t(found.size() - 1);
  };
  auto closures = singly_generated_closures(ctx, guards);
  rep.closures_scanned = closures.size();
  for (const auto& dc : closures) consider(dc.basis);
  const auto base_count = found.size();
  // saturate under meet and join
  for (bool grew = true; grew;) {
    grew = false;
    const auto n = found.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        for (const auto& x : {lattice_meet(found[i], found[j], cat), lattice_join(found[i], found[j])}) {
          auto before = found.size();
          if (consider(x) < 0) {
            rep.lattice_closed = false;
            rep.failures.push_back("meet or join of quasi-Cartan subalgebras " + std::to_string(i) + "," +
                                   std::to_string(j) + " is not quasi-Cartan");
          }
          if (found.size() > before) grew = true;
        }
      }
  }
  rep.saturation_added = found.size() - base_count;
  // order the algebras by their groupoids for stable reports
  std::vector<std::size_t> perm(found.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    auto ga = groupoid_of(found[a]), gb = groupoid_of(found[b]);
    if (ga.count() != gb.count()) return ga.count() < gb.count();
    return ga < gb;
  });
  for (auto i : perm) rep.algebras.push_back(found[i]);

  rep.h_to_c.assign(rep.wide.size(), -1);
  rep.c_to_h.assign(rep.algebras.size(), -1);
  for (std::size_t i = 0; i < rep.wide.size(); ++i) {
    auto ah = Basis::coordinate(ctx, rep.wide[i]);
    if (!(groupoid_of(ah) == rep.wide[i])) {
      rep.bijection = false;
      rep.failures.push_back("G_{A(H)} != H for wide subgroupoid " + std::to_string(i));
    }
    for (std::size_t j = 0; j < rep.algebras.size(); ++j)
      if (rep.algebras[j] == ah) rep.h_to_c[i] = std::int64_t(j);
    if (rep.h_to_c[i] < 0) {
      rep.bijection = false;
      rep.failures.push_back("A(H) for wide subgroupoid " + std::to_string(i) + " is not among the quasi-Cartan subalgebras");
    }
  }
  for (std::size_t j = 0; j < rep.algebras.size(); ++j) {
    auto gc = groupoid_of(rep.algebras[j]);
    if (!is_subgroupoid(g, gc)) {
      rep.bijection = false;
      rep.failures.push_back("G_C is not a subgroupoid for algebra " + std::to_string(j));
      continue;
    }
    if (!(Basis::coordinate(ctx, gc) == rep.algebras[j])) {
      rep.bijection = false;
      rep.failures.push_back("A(G_C) != C for algebra " + std::to_string(j));
    }
    for (std::size_t i = 0; i < rep.wide.size(); ++i)
      if (rep.wide[i] == gc) rep.c_to_h[j] = std::int64_t(i);
    if (rep.c_to_h[j] < 0) rep.bijection = false;
  }
  if (rep.wide.size() != rep.algebras.size()) {
    rep.bijection = false;
    rep.failures.push_back("counts differ: " + std::to_string(rep.wide.size()) + " wide subgroupoids vs " +
                           std::to_string(rep.algebras.size()) + " quasi-Cartan subalgebras");
  }
  if (!rep.bijection) return rep;

  const auto n = rep.algebras.size();
  rep.meet.assign(n, std::vector<std::int64_t>(n, -1));
  rep.join.assign(n, std::vector<std::int64_t>(n, -1));
  auto algebra_index = [&](const Basis& b) -> std::int64_t {
    for (std::size_t j = 0; j < n; ++j)
      if (rep.algebras[j] == b) return std::int64_t(j);
    return -1;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& hi = rep.wide[rep.c_to_h[i]];
      const auto& hj = rep.wide[rep.c_to_h[j]];
      if (hi.is_subset_of(hj) != rep.algebras[j].contains(rep.algebras[i])) rep.order_isomorphism = false;
      rep.meet[i][j] = algebra_index(lattice_meet(rep.algebras[i], rep.algebras[j], cat));
      rep.join[i][j] = algebra_index(lattice_join(rep.algebras[i], rep.algebras[j]));
      auto hm = hi & hj;
      auto hjn = subgroupoid_join(g, hi, hj);
      if (rep.meet[i][j] < 0 || !(rep.wide[rep.c_to_h[rep.meet[i][j]]] == hm)) rep.meets_match = false;
      if (rep.join[i][j] < 0 || !(rep.wide[rep.c_to_h[rep.join[i][j]]] == hjn)) rep.joins_match = false;
    }
  if (!rep.order_isomorphism) rep.failures.push_back("C -> G_C is not an order isomorphism");
  if (!rep.meets_match) rep.failures.push_back("meets do not match subgroupoid intersections");
  if (!rep.joins_match) rep.failures.push_back("joins do not match generated subgroupoids");
  return rep;
}

/// Every subspace D + W with W inside the span of the non-unit deltas, in
/// reduced echelon form over the non-unit coordinates.  fn returns false to stop.
inline void for_each_intermediate_subspace(const ContextPtr& ctx, const Guards& guards,
                                          const std::function<bool(const Basis&)>& fn) {
  const auto& g = ctx->groupoid;
  const auto& R = ctx->ring;
  if (!R.is_field() || !R.is_finite()) throw guard_exceeded("subspace enumeration needs a finite field");
  if (g.size() > guards.max_subspace_dim)
    throw guard_exceeded("subspace enumeration: dim A = " + std::to_string(g.size()) + " exceeds guard " +
                         std::to_string(guards.max_subspace_dim));
  std::vector<ArrowId> coords;
  for (ArrowId a = 0; a < g.size(); ++a)
    if (!g.is_unit(a)) coords.push_back(a);
  const auto m = coords.size();
  auto elems = ring_elements(R);
  bool stop = false;
  // choose pivot sets by bitmask, then fill the free entries
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m) && !stop; ++mask) {
    std::vector<std::size_t> piv;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) piv.push_back(i);
    // free slots: (row r, column j) with j > piv[r] and j not a pivot
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t r = 0; r < piv.size(); ++r)
      for (std::size_t j = piv[r] + 1; j < m; ++j)
        if (!(mask >> j & 1)) slots.emplace_back(r, j);
    std::uint64_t combos = checked_power(R, slots.size(), guards.max_scan, "subspace enumeration");
    std::vector<std::size_t> digit(slots.size(), 0);
    for (std::uint64_t k = 0; k < combos && !stop; ++k) {
      auto b = Basis::diagonal(ctx);
      for (std::size_t r = 0; r < piv.size(); ++r) {
        auto v = linalg::zeros(R, g.size());
        v[coords[piv[r]]] = Coefficient::one(R);
        for (std::size_t s = 0; s < slots.size(); ++s)
          if (slots[s].first == r) v[coords[slots[s].second]] = elems[digit[s]];
        b.insert(AlgebraElement::from_dense(ctx, v));
      }
      if (!fn(b)) stop = true;
      for (std::size_t s = 0; s < slots.size() && ++digit[s] == elems.size(); ++s) digit[s] = 0;
    }
  }
}

struct SubspaceCensus {
  std::size_t subspaces = 0;
  std::size_t subalgebras = 0;
  std::vector<Basis> quasi_cartan;
};

/// Exhaustive oracle for the algebra side of the Galois correspondence.
inline SubspaceCensus subspace_census(const ContextPtr& ctx, const Guards& guards = {}) {
  SubspaceCensus out;
  auto cat = NormalizerCatalog::build(ctx, guards);
  for_each_intermediate_subspace(ctx, guards, [&](const Basis& b) {
    ++out.subspaces;
    if (!b.is_subalgebra()) return true;
    ++out.subalgebras;
    if (is_quasi_cartan(classify(b, &cat, guards).verdict)) out.quasi_cartan.push_back(b);
    return true;
  });
  return out;
}

// ---------------------------------------------------------------- pqc scan

struct PqcFailure {
  Basis basis;
  AlgebraElement generator;
  InclusionReport report;
};

struct PqcResult {
  bool pure = true;
  std::uint64_t generators_covered = 0;
  std::size_t canonical_generators = 0;
  std::size_t distinct_closures = 0;
  std::vector<PqcFailure> failures;
  bool i2i = false;
  /// The i2i comparison applies to trivial twists over fields.
  bool comparison_applies = false;
  bool agrees_with_i2i = true;
  std::string scope = "singly-generated";
};

inline PqcResult pqc_scan(const ContextPtr& ctx, const Guards& guards = {}, bool stop_at_first = false) {
  if (!ctx->ring.is_field() || !ctx->ring.is_finite()) throw guard_exceeded("pqc scan needs a finite field");
  PqcResult res;
  auto cat = NormalizerCatalog::build(ctx, guards);
  res.generators_covered = checked_power(ctx->ring, ctx->size(), std::uint64_t(-1), "generator count");
  auto gens = canonical_generators(ctx, guards);
  res.canonical_generators = gens.size();
  std::set<std::string> seen;
  for (const auto& c : gens) {
    auto b = closure_with_diagonal(c);
    if (!seen.insert(b.key()).second) continue;
    auto r = classify(b, &cat, guards);
    if (r.verdict == Verdict::undetermined) throw guard_exceeded("classification undetermined during pqc scan");
    if (!is_quasi_cartan(r.verdict)) {
      res.pure = false;
      res.failures.push_back({b, c, std::move(r)});
      if (stop_at_first) break;
    }
  }
  res.distinct_closures = seen.size();
  res.i2i = is_i2i(ctx->groupoid);
  res.comparison_applies = ctx->omega.is_trivial();
  res.agrees_with_i2i = !res.comparison_applies || res.pure == res.i2i;
  return res;
}

/// For each gamma in S_c: some normalizer n of (A, D) inside alg(D u {c})
/// has gamma in S_n and c restricted to S_n equal to a nonzero multiple of n.
inline std::optional<ArrowId> normalizer_reach_failure(const AlgebraElement& c, const NormalizerCatalog& cat) {
  auto closure = closure_with_diagonal(c);
  for (const auto& [gamma, cg] : c.terms()) {
    bool ok = false;
    for (const auto& cert : cat.items()) {
      const auto& n = cert.n;
      if (n.at(gamma).is_zero() || !closure.contains(n)) continue;
      auto lambda = cg * n.at(gamma).inverse();
      bool multiple = true;
      for (const auto& [a, na] : n.terms())
        if (!(c.at(a) == lambda * na)) {
          multiple = false;
          break;
        }
      if (multiple) {
        ok = true;
        break;
      }
    }
    if (!ok) return gamma;
  }
  return std::nullopt;
}

// -------------------------------------------------------- counterexamples

struct TwoArrowsResult {
  ArrowId gamma1, gamma2;
  AlgebraElement f;
  Basis c_basis;
  bool f_squared_zero;
  bool equal_values_on_basis;
  bool not_coordinate;
  InclusionReport report;
};

inline TwoArrowsResult counterexample_two_arrows(const ContextPtr& ctx, const Guards& guards = {}) {
  const auto& g = ctx->groupoid;
  for (auto u : g.units())
    for (auto v : g.units()) {
      if (u == v || g.hom(u, v).size() < 2) continue;
      auto g1 = g.hom(u, v)[0], g2 = g.hom(u, v)[1];
      auto f = AlgebraElement::delta(ctx, g1) + AlgebraElement::delta(ctx, g2);
      auto c = closure_with_diagonal(f);
      bool equal = true;
      for (const auto& h : c.vectors()) equal = equal && h.at(g1) == h.at(g2);
      bool coord = false;
      for (const auto& h : wide_subgroupoids(g, guards))
        if (Basis::coordinate(ctx, h) == c) coord = true;
      auto report = classify(c, nullptr, guards);
      return {g1, g2, f, c, (f * f).is_zero(), equal, !coord, std::move(report)};
    }
  throw precondition_error("no units u != v with |uGv| >= 2");
}

struct BadAppleResult {
  ArrowId v;
  std::vector<ArrowId> gamma;  // the cyclic subgroup, v first
  AlgebraElement sigma;        // sum of delta_i over gamma minus v
  Basis a_basis;               // span{delta_v, sigma}
  Basis c_basis;               // preimage of A under restriction
  /// sigma * sigma = coeff_v delta_v + coeff_sigma sigma
  Coefficient coeff_v, coeff_sigma;
  bool a_closed;
  bool a_unital;
  bool a_covers;
  bool delta_s0_outside;
  ArrowSet g_c;
  bool c_proper_in_a_gc;
  InclusionReport report;
};

inline BadAppleResult counterexample_bad_apple(const ContextPtr& ctx, std::optional<ArrowId> v_opt = std::nullopt,
                                               const Guards& guards = {}) {
  const auto& g = ctx->groupoid;
  const auto& R = ctx->ring;
  if (Coefficient::one(R) == -Coefficient::one(R)) throw precondition_error("bad apple needs 1 != -1 in R");
  std::optional<ArrowId> v;
  std::vector<ArrowId> cyc;
  for (auto u : g.units()) {
    if (v_opt && u != *v_opt) continue;
    bool isolated = true;
    for (auto x : g.units())
      if (x != u && (!g.hom(u, x).empty() || !g.hom(x, u).empty())) isolated = false;
    if (!isolated) continue;
    // an isotropy element of order >= 3 generating the cyclic subgroup
    for (auto gam : g.hom(u, u)) {
      std::vector<ArrowId> powers{u};
      ArrowId p = gam;
      while (p != u) {
        powers.push_back(p);
        p = g.compose(p, gam);
      }
      if (powers.size() >= 3) {
        v = u;
        cyc = powers;
        break;
      }
    }
    if (v) break;
  }
  if (!v) throw precondition_error("bad apple needs an isolated unit with an isotropy element of order >= 3");
  for (auto a : cyc)
    for (auto b : cyc)
      if (!ctx->omega(a, b).is_one()) throw precondition_error("bad apple needs the twist to be trivial on the isotropy");

  auto sigma = AlgebraElement::zero(ctx);
  for (std::size_t i = 1; i < cyc.size(); ++i) sigma += AlgebraElement::delta(ctx, cyc[i]);
  auto dv = AlgebraElement::delta(ctx, *v);
  auto sq = sigma * sigma;
  auto coeff_v = sq.at(*v), coeff_sigma = sq.at(cyc[1]);
  auto a_basis = Basis::span_of(ctx, {dv, sigma});
  bool closed = a_basis.contains(sq) && a_basis.contains(dv * sigma) && a_basis.contains(sigma * dv);
  // C = p^-1(A): every arrow away from v, plus delta_v and sigma.
  std::vector<AlgebraElement> cgens{dv, sigma};
  for (ArrowId a = 0; a < g.size(); ++a)
    if (g.src(a) != *v) cgens.push_back(AlgebraElement::delta(ctx, a));
  auto c_basis = Basis::span_of(ctx, cgens);
  if (!c_basis.is_subalgebra()) throw consistency_failure("preimage of A is not a subalgebra");
  auto gc = groupoid_of(c_basis);
  bool proper = c_basis.dim() < Basis::coordinate(ctx, gc).dim();
  auto report = classify(c_basis, nullptr, guards);
  BadAppleResult out{*v, cyc, sigma, a_basis, c_basis, coeff_v, coeff_sigma, closed, true,
                     (dv + sigma).support().count() == cyc.size(),
                     !a_basis.contains(AlgebraElement::delta(ctx, cyc[1])), gc, proper, std::move(report)};
  return out;
}

/// |Z_n| product audit: every product of two elements of A, over all
/// coefficient choices, lies in A again.  Exhaustive over R^4.
inline bool bad_apple_closure_exhaustive(const BadAppleResult& b, const Guards& guards = {}) {
  const auto& ctx = b.sigma.context();
  auto dv = AlgebraElement::delta(ctx, b.v);
  bool ok = true;
  std::vector<AlgebraElement> pair_basis{dv, b.sigma};
  for_each_combination(ctx, pair_basis, guards.max_scan, [&](const AlgebraElement& x) {
    for_each_combination(ctx, pair_basis, guards.max_scan, [&](const AlgebraElement& y) {
      if (!b.a_basis.contains(x * y)) ok = false;
      return ok;
    });
    return ok;
  });
  return ok;
}

// ---------------------------------------------------------------- bimodules

struct BimoduleResult {
  bool spectral;
  ArrowSet support;
  std::size_t dim;
  /// When not spectral: a functional sum_x l_x a(x) vanishing on bi(c),
  /// given as (arrow, coefficient) pairs.
  std::vector<std::pair<ArrowId, Coefficient>> relation;
  Basis bimodule;
};

/// bi(c) = span{d c d'} compared with A(S_c).
inline BimoduleResult bimodule_spectral(const AlgebraElement& c) {
  const auto& ctx = c.context();
  auto ds = diagonal_basis(ctx);
  std::vector<AlgebraElement> gens;
  for (const auto& d : ds)
    for (const auto& e : ds) gens.push_back(d * c * e);
  auto bi = Basis::span_of(ctx, gens);
  auto s = c.support();
  BimoduleResult out{bi.dim() == s.count(), s, bi.dim(), {}, bi};
  if (!out.spectral) {
    std::vector<ArrowId> coords;
    for (auto a = s.find_first(); a != ArrowSet::npos; a = s.find_next(a)) coords.push_back(ArrowId(a));
    linalg::Mat rows;
    for (const auto& v : bi.vectors()) {
      linalg::Vec row;
      for (auto a : coords) row.push_back(v.at(a));
      rows.push_back(std::move(row));
    }
    auto null = linalg::nullspace(ctx->ring, coords.size(), rows);
    if (null.empty()) throw consistency_failure("bimodule is smaller than A(S_c) but no relation found");
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (!null[0][i].is_zero()) out.relation.emplace_back(coords[i], null[0][i]);
  }
  return out;
}

}  // namespace cartan_lab
