#pragma once

// Finite groupoids stored as full composition and inversion tables.
// Units are ordinary arrows whose id is their own source and target.

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cartan_lab/config.hpp"
#include "cartan_lab/errors.hpp"

namespace cartan_lab {

using ArrowId = std::uint32_t;
using ArrowSet = boost::dynamic_bitset<>;

struct Arrow {
  ArrowId id;
  ArrowId src;
  ArrowId tgt;
};

/// Unvalidated tables, as read from JSON or produced by a builder.
/// comp is row-major n*n with -1 for undefined products.
struct GroupoidTables {
  std::vector<ArrowId> units;
  std::vector<Arrow> arrows;
  std::vector<std::int64_t> comp;
  std::vector<std::int64_t> inv;
};

struct AxiomVerdict {
  bool valid = true;
  std::string violation;
  std::vector<ArrowId> witness;
};

/// Checks every groupoid axiom exhaustively.  Dangling ids and wrongly
/// sized tables are input errors; failed identities are reported.
inline AxiomVerdict check_axioms(const GroupoidTables& t) {
  const std::size_t n = t.arrows.size();
  if (n == 0) throw input_error("groupoid has no arrows");
  if (t.comp.size() != n * n) throw input_error("composition table must be n x n");
  if (t.inv.size() != n) throw input_error("inverse table must have n entries");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = t.arrows[i];
    if (a.id != i) throw input_error("arrow ids must be dense and in order; bad id at " + std::to_string(i));
    if (a.src >= n || a.tgt >= n) throw input_error("arrow " + std::to_string(i) + " has a dangling endpoint");
    if (t.inv[i] < 0 || static_cast<std::size_t>(t.inv[i]) >= n)
      throw input_error("inverse of arrow " + std::to_string(i) + " is dangling");
  }
  for (auto v : t.comp)
    if (v < -1 || v >= static_cast<std::int64_t>(n)) throw input_error("composition table has a dangling id");
  std::vector<bool> is_unit(n, false);
  for (auto u : t.units) {
    if (u >= n) throw input_error("unit id " + std::to_string(u) + " is dangling");
    is_unit[u] = true;
  }

  auto fail = [](std::string what, std::vector<ArrowId> w) {
    return AxiomVerdict{false, std::move(what), std::move(w)};
  };
  auto c = [&](std::size_t a, std::size_t b) { return t.comp[a * n + b]; };

  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = t.arrows[i];
    if (is_unit[i] && (a.src != i || a.tgt != i)) return fail("unit is not its own source and target", {ArrowId(i)});
    if (!is_unit[a.src]) return fail("source is not a unit", {ArrowId(i)});
    if (!is_unit[a.tgt]) return fail("target is not a unit", {ArrowId(i)});
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      bool composable = t.arrows[a].src == t.arrows[b].tgt;
      auto ab = c(a, b);
      if (composable != (ab >= 0))
        return fail(composable ? "composable pair has no product" : "product defined for non-composable pair",
                    {ArrowId(a), ArrowId(b)});
      if (ab < 0) continue;
      if (t.arrows[ab].tgt != t.arrows[a].tgt || t.arrows[ab].src != t.arrows[b].src)
        return fail("product has wrong endpoints", {ArrowId(a), ArrowId(b)});
    }
  for (std::size_t a = 0; a < n; ++a) {
    if (c(t.arrows[a].tgt, a) != std::int64_t(a) || c(a, t.arrows[a].src) != std::int64_t(a))
      return fail("units do not act as identities", {ArrowId(a)});
    auto ai = static_cast<std::size_t>(t.inv[a]);
    if (c(ai, a) != t.arrows[a].src || c(a, ai) != t.arrows[a].tgt)
      return fail("inverse identity fails", {ArrowId(a)});
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      auto ab = c(a, b);
      if (ab < 0) continue;
      for (std::size_t d = 0; d < n; ++d) {
        auto bd = c(b, d);
        if (bd < 0) continue;
        if (c(ab, d) != c(a, bd)) return fail("associativity fails", {ArrowId(a), ArrowId(b), ArrowId(d)});
      }
    }
  return {};
}

class FiniteGroupoid {
 public:
  /// Validates and adopts the tables; throws input_error naming the
  /// violated axiom and witnesses.
  static FiniteGroupoid from_tables(GroupoidTables t) {
    auto v = check_axioms(t);
    if (!v.valid) {
      std::string msg = "invalid groupoid: " + v.violation + " at (";
      for (std::size_t i = 0; i < v.witness.size(); ++i) msg += (i ? "," : "") + std::to_string(v.witness[i]);
      throw input_error(msg + ")");
    }
    return FiniteGroupoid(std::move(t));
  }

  std::size_t size() const { return t_.arrows.size(); }
  std::size_t num_units() const { return t_.units.size(); }
  /// Unit ids in increasing order.
  const std::vector<ArrowId>& units() const { return t_.units; }
  const std::vector<Arrow>& arrows() const { return t_.arrows; }
  const GroupoidTables& tables() const { return t_; }

  ArrowId src(ArrowId a) const { return t_.arrows[a].src; }
  ArrowId tgt(ArrowId a) const { return t_.arrows[a].tgt; }
  ArrowId inv(ArrowId a) const { return static_cast<ArrowId>(t_.inv[a]); }
  bool is_unit(ArrowId a) const { return unit_index_[a] >= 0; }
  /// Position of a unit within units().
  std::size_t unit_index(ArrowId u) const { return static_cast<std::size_t>(unit_index_[u]); }
  bool composable(ArrowId a, ArrowId b) const { return src(a) == tgt(b); }
  std::optional<ArrowId> try_compose(ArrowId a, ArrowId b) const {
    auto c = t_.comp[a * size() + b];
    if (c < 0) return std::nullopt;
    return static_cast<ArrowId>(c);
  }
  ArrowId compose(ArrowId a, ArrowId b) const {
    auto c = t_.comp[a * size() + b];
    if (c < 0) throw precondition_error("arrows " + std::to_string(a) + "," + std::to_string(b) + " are not composable");
    return static_cast<ArrowId>(c);
  }

  /// Arrows v <- u (target v, source u).
  const std::vector<ArrowId>& hom(ArrowId v, ArrowId u) const {
    return hom_[unit_index(v) * num_units() + unit_index(u)];
  }
  std::size_t iso_size(ArrowId u) const { return hom(u, u).size(); }

  ArrowSet empty_set() const { return ArrowSet(size()); }
  ArrowSet unit_set() const {
    ArrowSet s(size());
    for (auto u : t_.units) s.set(u);
    return s;
  }
  ArrowSet all_arrows() const {
    ArrowSet s(size());
    s.set();
    return s;
  }

  /// r and s injective on the set.
  bool is_bisection(const ArrowSet& s) const {
    std::vector<bool> seen_r(size(), false), seen_s(size(), false);
    for (auto a = s.find_first(); a != ArrowSet::npos; a = s.find_next(a)) {
      if (seen_r[tgt(a)] || seen_s[src(a)]) return false;
      seen_r[tgt(a)] = seen_s[src(a)] = true;
    }
    return true;
  }

  friend bool operator==(const FiniteGroupoid& a, const FiniteGroupoid& b) {
    return a.t_.units == b.t_.units && a.t_.comp == b.t_.comp && a.t_.inv == b.t_.inv;
  }

 private:
  explicit FiniteGroupoid(GroupoidTables t) : t_(std::move(t)) {
    std::sort(t_.units.begin(), t_.units.end());
    t_.units.erase(std::unique(t_.units.begin(), t_.units.end()), t_.units.end());
    unit_index_.assign(size(), -1);
    for (std::size_t i = 0; i < t_.units.size(); ++i) unit_index_[t_.units[i]] = static_cast<std::int64_t>(i);
    hom_.assign(num_units() * num_units(), {});
    for (const auto& a : t_.arrows) hom_[unit_index(a.tgt) * num_units() + unit_index(a.src)].push_back(a.id);
  }

  GroupoidTables t_;
  std::vector<std::int64_t> unit_index_;
  std::vector<std::vector<ArrowId>> hom_;
};

// ---------------------------------------------------------------- builders

namespace detail {

inline void check_group_table(const std::vector<std::vector<std::int64_t>>& m) {
  const auto n = m.size();
  if (n == 0) throw input_error("empty group table");
  for (const auto& row : m) {
    if (row.size() != n) throw input_error("group table must be square");
    for (auto v : row)
      if (v < 0 || static_cast<std::size_t>(v) >= n) throw input_error("group table entry out of range");
  }
}

inline std::size_t group_identity(const std::vector<std::vector<std::int64_t>>& m) {
  for (std::size_t e = 0; e < m.size(); ++e) {
    bool ok = true;
    for (std::size_t x = 0; x < m.size() && ok; ++x) ok = m[e][x] == std::int64_t(x) && m[x][e] == std::int64_t(x);
    if (ok) return e;
  }
  throw input_error("group table has no identity");
}

}  // namespace detail

using GroupTable = std::vector<std::vector<std::int64_t>>;

/// One-unit groupoid; element i is arrow i and the identity is the unit.
inline FiniteGroupoid build_group(const GroupTable& m) {
  detail::check_group_table(m);
  const auto n = m.size();
  const auto e = detail::group_identity(m);
  GroupoidTables t;
  t.units = {ArrowId(e)};
  t.comp.resize(n * n);
  t.inv.assign(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    t.arrows.push_back({ArrowId(a), ArrowId(e), ArrowId(e)});
    for (std::size_t b = 0; b < n; ++b) {
      t.comp[a * n + b] = m[a][b];
      if (m[a][b] == std::int64_t(e)) t.inv[a] = std::int64_t(b);
    }
    if (t.inv[a] < 0) throw input_error("group element " + std::to_string(a) + " has no inverse");
  }
  auto v = check_axioms(t);
  if (!v.valid) throw input_error("invalid group table: " + v.violation);
  return FiniteGroupoid::from_tables(std::move(t));
}

inline GroupTable cyclic_table(std::size_t n) {
  if (n == 0) throw input_error("cyclic group needs n >= 1");
  GroupTable m(n, std::vector<std::int64_t>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) m[a][b] = std::int64_t((a + b) % n);
  return m;
}

inline FiniteGroupoid build_cyclic(std::size_t n) { return build_group(cyclic_table(n)); }

/// Pair groupoid on n points.  Units are 0..n-1; the non-unit arrow
/// (i <- j) follows in lexicographic (target, source) order.
inline FiniteGroupoid build_pair(std::size_t n) {
  if (n == 0) throw input_error("pair groupoid needs n >= 1");
  std::vector<std::vector<ArrowId>> id(n, std::vector<ArrowId>(n));
  GroupoidTables t;
  for (std::size_t i = 0; i < n; ++i) {
    id[i][i] = ArrowId(i);
    t.units.push_back(ArrowId(i));
  }
  ArrowId next = ArrowId(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) id[i][j] = next++;
  const std::size_t total = n * n;
  t.arrows.resize(total);
  t.inv.resize(total);
  t.comp.assign(total * total, -1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto a = id[i][j];
      t.arrows[a] = {a, ArrowId(j), ArrowId(i)};
      t.inv[a] = id[j][i];
      for (std::size_t k = 0; k < n; ++k) t.comp[a * total + id[j][k]] = id[i][k];
    }
  return FiniteGroupoid::from_tables(std::move(t));
}

/// Id of the pair-groupoid arrow with the given target and source.
inline ArrowId pair_arrow(std::size_t n, std::size_t tgt, std::size_t src) {
  if (tgt == src) return ArrowId(tgt);
  return ArrowId(n + tgt * (n - 1) + (src < tgt ? src : src - 1));
}

/// Transformation groupoid.  action[t][x] is t.x; arrow (t, x) has id
/// t*|X| + x, source x and target t.x.
inline FiniteGroupoid build_action(const GroupTable& m, const std::vector<std::vector<std::int64_t>>& action) {
  detail::check_group_table(m);
  const auto ng = m.size();
  if (action.size() != ng) throw input_error("action needs one permutation per group element");
  const auto nx = action.empty() ? 0 : action[0].size();
  if (nx == 0) throw input_error("action needs a nonempty point set");
  for (const auto& p : action) {
    if (p.size() != nx) throw input_error("action permutations must all have |X| entries");
    std::vector<bool> hit(nx, false);
    for (auto y : p) {
      if (y < 0 || static_cast<std::size_t>(y) >= nx || hit[y]) throw input_error("action is not by bijections");
      hit[y] = true;
    }
  }
  const auto e = detail::group_identity(m);
  for (std::size_t x = 0; x < nx; ++x)
    if (action[e][x] != std::int64_t(x)) throw input_error("identity does not act trivially");
  for (std::size_t a = 0; a < ng; ++a)
    for (std::size_t b = 0; b < ng; ++b)
      for (std::size_t x = 0; x < nx; ++x)
        if (action[m[a][b]][x] != action[a][action[b][x]]) throw input_error("map is not a group action");

  const auto n = ng * nx;
  auto id = [nx](std::size_t g, std::size_t x) { return ArrowId(g * nx + x); };
  GroupoidTables t;
  for (std::size_t x = 0; x < nx; ++x) t.units.push_back(id(e, x));
  t.arrows.resize(n);
  t.inv.resize(n);
  t.comp.assign(n * n, -1);
  std::vector<std::size_t> ginv(ng);
  for (std::size_t a = 0; a < ng; ++a)
    for (std::size_t b = 0; b < ng; ++b)
      if (m[a][b] == std::int64_t(e)) ginv[a] = b;
  for (std::size_t g = 0; g < ng; ++g)
    for (std::size_t x = 0; x < nx; ++x) {
      auto gx = static_cast<std::size_t>(action[g][x]);
      auto a = id(g, x);
      t.arrows[a] = {a, id(e, x), id(e, gx)};
      t.inv[a] = id(ginv[g], gx);
      // (h, g.x)(g, x) = (hg, x)
      for (std::size_t h = 0; h < ng; ++h) t.comp[id(h, gx) * n + a] = id(static_cast<std::size_t>(m[h][g]), x);
    }
  return FiniteGroupoid::from_tables(std::move(t));
}

/// Z/2 acting on {-k..k} by x -> -x; point i of the unit list is i-k.
inline FiniteGroupoid build_sign_flip(std::size_t k) {
  const auto nx = 2 * k + 1;
  std::vector<std::vector<std::int64_t>> act(2, std::vector<std::int64_t>(nx));
  for (std::size_t x = 0; x < nx; ++x) {
    act[0][x] = std::int64_t(x);
    act[1][x] = std::int64_t(nx - 1 - x);
  }
  return build_action(cyclic_table(2), act);
}

inline FiniteGroupoid build_disjoint_union(const std::vector<FiniteGroupoid>& parts) {
  if (parts.empty()) throw input_error("disjoint union needs at least one part");
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  GroupoidTables t;
  t.arrows.resize(n);
  t.inv.resize(n);
  t.comp.assign(n * n, -1);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const auto& pt = p.tables();
    const auto m = p.size();
    for (auto u : pt.units) t.units.push_back(ArrowId(u + off));
    for (std::size_t a = 0; a < m; ++a) {
      t.arrows[a + off] = {ArrowId(a + off), ArrowId(pt.arrows[a].src + off), ArrowId(pt.arrows[a].tgt + off)};
      t.inv[a + off] = pt.inv[a] + std::int64_t(off);
      for (std::size_t b = 0; b < m; ++b)
        if (pt.comp[a * m + b] >= 0) t.comp[(a + off) * n + b + off] = pt.comp[a * m + b] + std::int64_t(off);
    }
    off += m;
  }
  return FiniteGroupoid::from_tables(std::move(t));
}

/// Product groupoid; arrow (a, b) has id a*|H| + b.
inline FiniteGroupoid build_product(const FiniteGroupoid& g, const FiniteGroupoid& h) {
  const auto ng = g.size(), nh = h.size(), n = ng * nh;
  GroupoidTables t;
  for (auto u : g.units())
    for (auto v : h.units()) t.units.push_back(ArrowId(u * nh + v));
  t.arrows.resize(n);
  t.inv.resize(n);
  t.comp.assign(n * n, -1);
  for (ArrowId a = 0; a < ng; ++a)
    for (ArrowId b = 0; b < nh; ++b) {
      auto ab = ArrowId(a * nh + b);
      t.arrows[ab] = {ab, ArrowId(g.src(a) * nh + h.src(b)), ArrowId(g.tgt(a) * nh + h.tgt(b))};
      t.inv[ab] = std::int64_t(g.inv(a) * nh + h.inv(b));
    }
  for (ArrowId a = 0; a < ng; ++a)
    for (ArrowId c = 0; c < ng; ++c) {
      auto ac = g.try_compose(a, c);
      if (!ac) continue;
      for (ArrowId b = 0; b < nh; ++b)
        for (ArrowId d = 0; d < nh; ++d) {
          auto bd = h.try_compose(b, d);
          if (bd) t.comp[(a * nh + b) * n + c * nh + d] = std::int64_t(*ac * nh + *bd);
        }
    }
  return FiniteGroupoid::from_tables(std::move(t));
}

/// Adjoins isotropy H at an isolated unit u, so that u's isotropy becomes
/// uGu x H.  Existing arrow ids are kept; (a, h) for h != e are appended
/// in (a, h) order.
inline FiniteGroupoid build_attach_isotropy(const FiniteGroupoid& base, ArrowId u, const GroupTable& m) {
  detail::check_group_table(m);
  if (u >= base.size() || !base.is_unit(u)) throw input_error("attach_isotropy: not a unit of the base");
  for (const auto& a : base.arrows())
    if ((a.src == u) != (a.tgt == u))
      throw precondition_error("attach_isotropy: unit " + std::to_string(u) + " is not isolated (arrow " +
                               std::to_string(a.id) + ")");
  const auto e = detail::group_identity(m);
  const auto& iso = base.hom(u, u);
  const auto nb = base.size(), nh = m.size();
  // local index of (a, h): a base arrow when h == e
  std::map<std::pair<ArrowId, std::size_t>, ArrowId> id;
  ArrowId next = ArrowId(nb);
  for (auto a : iso)
    for (std::size_t h = 0; h < nh; ++h) id[{a, h}] = h == e ? a : next++;
  const std::size_t n = next;
  GroupoidTables t;
  t.units = base.units();
  t.arrows.resize(n);
  t.inv.resize(n);
  t.comp.assign(n * n, -1);
  for (ArrowId a = 0; a < nb; ++a) {
    t.arrows[a] = base.arrows()[a];
    t.inv[a] = base.inv(a);
    for (ArrowId b = 0; b < nb; ++b)
      if (auto c = base.try_compose(a, b)) t.comp[a * n + b] = *c;
  }
  std::vector<std::size_t> hinv(nh);
  for (std::size_t x = 0; x < nh; ++x)
    for (std::size_t y = 0; y < nh; ++y)
      if (m[x][y] == std::int64_t(e)) hinv[x] = y;
  for (auto a : iso)
    for (std::size_t h = 0; h < nh; ++h) {
      auto ah = id[{a, h}];
      t.arrows[ah] = {ah, u, u};
      t.inv[ah] = id[{base.inv(a), hinv[h]}];
      for (auto b : iso)
        for (std::size_t k = 0; k < nh; ++k)
          t.comp[ah * n + id[{b, k}]] = id[{base.compose(a, b), static_cast<std::size_t>(m[h][k])}];
    }
  return FiniteGroupoid::from_tables(std::move(t));
}

// -------------------------------------------------------------- predicates

struct GroupoidPredicates {
  bool principal = false;
  /// Equal to principal: a finite discrete groupoid's isotropy is open.
  bool effective = false;
  bool i2i = false;
  /// |uGu| per unit, in units() order.
  std::vector<std::size_t> iso_sizes;
};

/// The raw i2i condition: |vGw| > 1 forces v = w, vG = Gv = vGv and |vGv| = 2.
inline bool is_i2i(const FiniteGroupoid& g) {
  for (auto v : g.units())
    for (auto w : g.units()) {
      if (g.hom(v, w).size() <= 1) continue;
      if (v != w || g.hom(v, v).size() != 2) return false;
      for (auto x : g.units())
        if (x != v && (!g.hom(v, x).empty() || !g.hom(x, v).empty())) return false;
    }
  return true;
}

inline GroupoidPredicates predicates(const FiniteGroupoid& g) {
  GroupoidPredicates p;
  p.principal = true;
  for (auto u : g.units()) {
    p.iso_sizes.push_back(g.iso_size(u));
    if (g.iso_size(u) > 1) p.principal = false;
  }
  p.effective = p.principal;
  p.i2i = is_i2i(g);
  return p;
}

/// Arrows beyond units whose range equals their source.
inline std::vector<ArrowId> nontrivial_isotropy(const FiniteGroupoid& g) {
  std::vector<ArrowId> out;
  for (const auto& a : g.arrows())
    if (!g.is_unit(a.id) && a.src == a.tgt) out.push_back(a.id);
  return out;
}

// ----------------------------------------------------------- subgroupoids

inline bool is_subgroupoid(const FiniteGroupoid& g, const ArrowSet& s) {
  for (auto a = s.find_first(); a != ArrowSet::npos; a = s.find_next(a)) {
    if (!s.test(g.inv(a)) || !s.test(g.src(a)) || !s.test(g.tgt(a))) return false;
    for (auto b = s.find_first(); b != ArrowSet::npos; b = s.find_next(b))
      if (auto c = g.try_compose(ArrowId(a), ArrowId(b)); c && !s.test(*c)) return false;
  }
  return true;
}

inline bool is_wide(const FiniteGroupoid& g, const ArrowSet& s) { return g.unit_set().is_subset_of(s); }

/// Least wide subgroupoid containing the seed.
inline ArrowSet subgroupoid_generated(const FiniteGroupoid& g, const ArrowSet& seed) {
  if (seed.size() != g.size()) throw input_error("seed mask has the wrong size");
  ArrowSet s = seed | g.unit_set();
  std::vector<ArrowId> frontier;
  for (auto a = s.find_first(); a != ArrowSet::npos; a = s.find_next(a)) frontier.push_back(ArrowId(a));
  auto add = [&](ArrowId c) {
    if (!s.test(c)) {
      s.set(c);
      frontier.push_back(c);
    }
  };
  while (!frontier.empty()) {
    auto a = frontier.back();
    frontier.pop_back();
    add(g.inv(a));
    for (auto b = s.find_first(); b != ArrowSet::npos; b = s.find_next(b)) {
      if (auto c = g.try_compose(a, ArrowId(b))) add(*c);
      if (auto c = g.try_compose(ArrowId(b), a)) add(*c);
    }
  }
  return s;
}

inline ArrowSet subgroupoid_join(const FiniteGroupoid& g, const ArrowSet& a, const ArrowSet& b) {
  return subgroupoid_generated(g, a | b);
}

/// All wide subgroupoids, sorted.  Every wide subgroupoid is a join of
/// singly generated ones, so saturating under joins finds them all.
inline std::vector<ArrowSet> wide_subgroupoids(const FiniteGroupoid& g, const Guards& guards = {}) {
  const auto nonunit = g.size() - g.num_units();
  if (nonunit > guards.max_nonunit_arrows)
    throw guard_exceeded("wide subgroupoid enumeration: " + std::to_string(nonunit) + " non-unit arrows > guard " +
                         std::to_string(guards.max_nonunit_arrows));
  std::vector<ArrowSet> atoms;
  for (ArrowId a = 0; a < g.size(); ++a) {
    if (g.is_unit(a)) continue;
    ArrowSet seed = g.empty_set();
    seed.set(a);
    atoms.push_back(subgroupoid_generated(g, seed));
  }
  std::set<ArrowSet> found{g.unit_set()};
  std::vector<ArrowSet> frontier{g.unit_set()};
  while (!frontier.empty()) {
    auto h = frontier.back();
    frontier.pop_back();
    for (const auto& at : atoms) {
      if (at.is_subset_of(h)) continue;
      auto j = subgroupoid_join(g, h, at);
      if (found.insert(j).second) {
        if (found.size() > guards.max_scan) throw guard_exceeded("wide subgroupoid count exceeds scan guard");
        frontier.push_back(j);
      }
    }
  }
  return {found.begin(), found.end()};
}

/// Restriction to an invariant set of units, with the old-to-new id map.
struct Restriction {
  FiniteGroupoid groupoid;
  /// new id -> old id
  std::vector<ArrowId> to_parent;
  /// old id -> new id, or -1 when dropped
  std::vector<std::int64_t> from_parent;
};

/// An arrow with exactly one endpoint in X, if any.
inline std::optional<ArrowId> invariance_witness(const FiniteGroupoid& g, const ArrowSet& units_x) {
  for (const auto& a : g.arrows())
    if (units_x.test(a.src) != units_x.test(a.tgt)) return a.id;
  return std::nullopt;
}

inline Restriction restrict_to(const FiniteGroupoid& g, const ArrowSet& units_x) {
  if (units_x.size() != g.size()) throw input_error("unit mask has the wrong size");
  for (auto u = units_x.find_first(); u != ArrowSet::npos; u = units_x.find_next(u))
    if (!g.is_unit(ArrowId(u))) throw input_error("restriction set contains non-unit " + std::to_string(u));
  if (units_x.none()) throw precondition_error("restriction to the empty unit set");
  if (auto w = invariance_witness(g, units_x))
    throw precondition_error("unit set is not invariant; witness arrow " + std::to_string(*w));
  std::vector<ArrowId> keep;
  std::vector<std::int64_t> from(g.size(), -1);
  for (const auto& a : g.arrows())
    if (units_x.test(a.src)) {
      from[a.id] = std::int64_t(keep.size());
      keep.push_back(a.id);
    }
  const auto n = keep.size();
  GroupoidTables t;
  t.arrows.resize(n);
  t.inv.resize(n);
  t.comp.assign(n * n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    auto a = keep[i];
    if (g.is_unit(a)) t.units.push_back(ArrowId(i));
    t.arrows[i] = {ArrowId(i), ArrowId(from[g.src(a)]), ArrowId(from[g.tgt(a)])};
    t.inv[i] = from[g.inv(a)];
    for (std::size_t j = 0; j < n; ++j)
      if (auto c = g.try_compose(a, keep[j])) t.comp[i * n + j] = from[*c];
  }
  return {FiniteGroupoid::from_tables(std::move(t)), std::move(keep), std::move(from)};
}

}  // namespace cartan_lab
