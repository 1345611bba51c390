#pragma once

// Conditional expectations: restriction onto A(H), the explicit averaging
// expectation on F[Z3], sign families and the averaging formula for Delta on
// principal groupoids, and the obstruction for non-principal ones.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cartan_lab/config.hpp"
#include "cartan_lab/enumerate.hpp"
#include "cartan_lab/random.hpp"
#include "cartan_lab/steinberg.hpp"

namespace cartan_lab {

using ExpectationMap = std::function<AlgebraElement(const AlgebraElement&)>;

struct ExpectationReport {
  bool linear = true;
  bool image_in_c = true;
  bool identity_on_c = true;
  bool bimodule = true;
  std::optional<bool> faithful;
  /// true when checked on every element of A, false when on basis tuples.
  bool exhaustive = false;
  std::map<std::string, std::vector<AlgebraElement>> witnesses;
  bool is_expectation() const { return linear && image_in_c && identity_on_c && bimodule; }
};

/// Normalizers of a (not necessarily commutative) subalgebra C in A by the
/// literal definition: some k with nkn = n, knk = k and nCk, kCn inside C.
inline std::vector<AlgebraElement> normalizers_of(const Basis& c, const Guards& guards = {}) {
  const auto& ctx = c.context();
  std::vector<AlgebraElement> all;
  for_each_element(ctx, guards.max_scan, [&](const AlgebraElement& a) {
    all.push_back(a);
    return true;
  });
  if (all.size() * all.size() > guards.max_scan) throw guard_exceeded("normalizer pair scan exceeds guard");
  auto cv = c.vectors();
  std::vector<AlgebraElement> out;
  for (const auto& n : all)
    for (const auto& k : all) {
      if (!(n * k * n == n) || !(k * n * k == k)) continue;
      bool ok = true;
      for (const auto& v : cv)
        if (!c.contains(n * v * k) || !c.contains(k * v * n)) {
          ok = false;
          break;
        }
      if (ok) {
        out.push_back(n);
        break;
      }
    }
  return out;
}

/// Checks the conditional-expectation axioms for E: A -> C.  Exhaustive over
/// A when it is small enough, otherwise on basis tuples.  Faithfulness is
/// checked against N(A, C) when that can be enumerated.
inline ExpectationReport check_expectation(const ExpectationMap& e, const Basis& c, const Guards& guards = {},
                                           std::uint64_t exhaustive_limit = 2000) {
  const auto& ctx = c.context();
  const auto& R = ctx->ring;
  ExpectationReport rep;
  std::vector<AlgebraElement> sample;
  bool small = false;
  if (R.is_finite()) {
    try {
      small = checked_power(R, ctx->size(), exhaustive_limit, "expectation scan") > 0;
    } catch (const guard_exceeded&) {
      small = false;
    }
  }
  if (small) {
    for_each_element(ctx, exhaustive_limit, [&](const AlgebraElement& a) {
      sample.push_back(a);
      return true;
    });
  } else {
    for (ArrowId a = 0; a < ctx->size(); ++a) sample.push_back(AlgebraElement::delta(ctx, a));
  }
  rep.exhaustive = small;
  std::vector<Coefficient> scalars = R.is_finite() ? ring_elements(R)
                                                   : std::vector<Coefficient>{Coefficient::from_int(R, -2),
                                                                              Coefficient::from_rational(R, Rational(1, 3))};
  auto fail = [&](bool& flag, const std::string& name, std::vector<AlgebraElement> w) {
    if (flag) rep.witnesses[name] = std::move(w);
    flag = false;
  };
  std::vector<AlgebraElement> images;
  for (const auto& a : sample) images.push_back(e(a));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!c.contains(images[i])) fail(rep.image_in_c, "image_in_c", {sample[i], images[i]});
  }
  // linearity
  for (std::size_t i = 0; i < sample.size() && rep.linear; ++i)
    for (std::size_t j = 0; j < sample.size() && rep.linear; ++j)
      for (const auto& t : scalars) {
        auto lhs = e(sample[i].scaled(t) + sample[j]);
        if (!(lhs == images[i].scaled(t) + images[j])) {
          fail(rep.linear, "linear", {sample[i], sample[j]});
          break;
        }
      }
  auto cv = c.vectors();
  std::vector<AlgebraElement> c_sample = cv;
  if (small) {
    c_sample.clear();
    for (const auto& a : sample)
      if (c.contains(a)) c_sample.push_back(a);
  }
  for (const auto& x : c_sample)
    if (!(e(x) == x)) fail(rep.identity_on_c, "identity_on_c", {x, e(x)});
  // bimodule over C: trilinear, so basis tuples suffice once E is linear
  std::vector<AlgebraElement> a_basis;
  for (ArrowId a = 0; a < ctx->size(); ++a) a_basis.push_back(AlgebraElement::delta(ctx, a));
  for (const auto& x : cv)
    for (const auto& y : cv)
      for (const auto& a : a_basis)
        if (!(e(x * a * y) == x * e(a) * y)) fail(rep.bimodule, "bimodule", {x, a, y});
  // faithful: E(n a) = 0 for every n in N(A, C) forces a = 0
  if (small) {
    try {
      auto ns = normalizers_of(c, guards);
      rep.faithful = true;
      for (const auto& a : sample) {
        if (a.is_zero()) continue;
        bool seen = false;
        for (const auto& n : ns)
          if (!e(n * a).is_zero()) {
            seen = true;
            break;
          }
        if (!seen) {
          rep.faithful = false;
          rep.witnesses["faithful"] = {a};
          break;
        }
      }
    } catch (const guard_exceeded&) {
      rep.faithful.reset();
    }
  }
  return rep;
}

struct SubalgebraExpectation {
  Basis target;
  ExpectationMap map;
  ExpectationReport report;
};

/// Restriction f -> f|_H onto A(H) for a wide subgroupoid H.
inline SubalgebraExpectation expectation_onto_subalgebra(const ContextPtr& ctx, const ArrowSet& h,
                                                         const Guards& guards = {}) {
  const auto& g = ctx->groupoid;
  if (!is_subgroupoid(g, h) || !is_wide(g, h)) throw precondition_error("expectation target must be a wide subgroupoid");
  ExpectationMap map = [h, ctx](const AlgebraElement& f) {
    std::vector<AlgebraElement::Term> terms;
    for (const auto& t : f.terms())
      if (h.test(t.first)) terms.push_back(t);
    return AlgebraElement::from_terms(ctx, std::move(terms));
  };
  auto target = Basis::coordinate(ctx, h);
  auto rep = check_expectation(map, target, guards);
  return {target, map, rep};
}

/// E(r0 d0 + r1 d1 + r2 d2) = r0 d0 + ((r1 + r2)/2)(d1 + d2) on R[Z3].
inline SubalgebraExpectation example_z3_expectation(const ContextPtr& ctx, const Guards& guards = {}) {
  const auto& g = ctx->groupoid;
  if (g.size() != 3 || g.num_units() != 1)
    throw precondition_error("averaging expectation needs the group Z3");
  auto two = Coefficient::from_int(ctx->ring, 2).try_inverse();
  if (!two) throw precondition_error("averaging expectation needs 2 invertible");
  auto half = *two;
  ArrowId u = g.units().front();
  std::vector<ArrowId> rest;
  for (ArrowId a = 0; a < 3; ++a)
    if (a != u) rest.push_back(a);
  auto s = AlgebraElement::delta(ctx, rest[0]) + AlgebraElement::delta(ctx, rest[1]);
  auto target = Basis::span_of(ctx, {AlgebraElement::delta(ctx, u), s});
  ExpectationMap map = [ctx, u, rest, s, half](const AlgebraElement& f) {
    return AlgebraElement::delta(ctx, u, f.at(u)) + s.scaled((f.at(rest[0]) + f.at(rest[1])) * half);
  };
  auto rep = check_expectation(map, target, guards);
  return {target, map, rep};
}

// ------------------------------------------------------------ sign families

struct SignFamily {
  std::vector<AlgebraElement> members;
  ArrowSet region;
};

inline void require_two_nonzero(const RingDescriptor& r) {
  if ((Coefficient::one(r) + Coefficient::one(r)).is_zero()) throw precondition_error("needs characteristic != 2");
}

/// Sign family for bisections B_1..B_k with r(B_i), s(B_i) disjoint: 2^k
/// elements of D with values +-1 on K and sum_j u_j(r(b)) u_j(s(b)) = 0 on
/// every b in some B_i.  K defaults to all units.
inline SignFamily sign_family(const ContextPtr& ctx, const std::vector<ArrowSet>& bisections,
                              std::optional<ArrowSet> region = std::nullopt) {
  const auto& g = ctx->groupoid;
  const auto& R = ctx->ring;
  require_two_nonzero(R);
  auto units_set = g.unit_set();
  ArrowSet k = region ? *region : units_set;
  if (!k.is_subset_of(units_set)) throw precondition_error("region must be a set of units");
  for (std::size_t i = 0; i < bisections.size(); ++i) {
    const auto& b = bisections[i];
    if (!g.is_bisection(b)) throw precondition_error("set " + std::to_string(i) + " is not a bisection");
    ArrowSet rs = g.empty_set(), ss = g.empty_set();
    for (auto a = b.find_first(); a != ArrowSet::npos; a = b.find_next(a)) {
      rs.set(g.tgt(ArrowId(a)));
      ss.set(g.src(ArrowId(a)));
    }
    auto both = rs & ss;
    if (both.any())
      throw precondition_error("bisection " + std::to_string(i) + " has range and source meeting at unit " +
                               std::to_string(both.find_first()));
    if (!rs.is_subset_of(k) || !ss.is_subset_of(k)) throw precondition_error("region does not contain r(B) and s(B)");
  }
  const auto one = Coefficient::one(R);
  const auto two = one + one;
  auto l = AlgebraElement::indicator(ctx, units_set);
  auto pair_sum = [&](const std::vector<AlgebraElement>& fam, ArrowId a) {
    auto s = Coefficient::zero(R);
    for (const auto& u : fam) s += u.at(g.tgt(a)) * u.at(g.src(a));
    return s;
  };
  std::vector<AlgebraElement> fam{l};
  for (const auto& b : bisections) {
    ArrowSet rb = g.empty_set();
    for (auto a = b.find_first(); a != ArrowSet::npos; a = b.find_next(a)) rb.set(g.tgt(ArrowId(a)));
    std::vector<AlgebraElement> w{l, l - AlgebraElement::indicator(ctx, rb, two)};
    std::vector<AlgebraElement> next;
    for (const auto& wl : w)
      for (const auto& uj : fam) next.push_back(wl * uj);
    for (ArrowId a = 0; a < g.size(); ++a)
      if (!(pair_sum(next, a) == pair_sum(w, a) * pair_sum(fam, a)))
        throw consistency_failure("sign family product identity fails at arrow " + std::to_string(a));
    fam = std::move(next);
  }
  for (const auto& b : bisections)
    for (auto a = b.find_first(); a != ArrowSet::npos; a = b.find_next(a))
      if (!pair_sum(fam, ArrowId(a)).is_zero())
        throw consistency_failure("sign family does not cancel at arrow " + std::to_string(a));
  for (const auto& u : fam)
    for (auto x = k.find_first(); x != ArrowSet::npos; x = k.find_next(x))
      if (!(u.at(ArrowId(x)) == one) && !(u.at(ArrowId(x)) == -one))
        throw consistency_failure("sign family value outside {-1, 1}");
  return {std::move(fam), k};
}

inline AlgebraElement sandwich_sum(const AlgebraElement& f, const std::vector<AlgebraElement>& fam) {
  auto s = AlgebraElement::zero(f.context());
  for (const auto& u : fam) s += u * f * u;
  return s;
}

struct AverageResult {
  AlgebraElement value;
  SignFamily family;
  std::vector<BisectionPiece> pieces;
  std::size_t k = 0;
  bool equals_delta = false;
};

/// Delta(f) = 2^-k sum_i u_i f u_i over a sign family for the non-unit pieces
/// of a disjoint range/source decomposition of f.
inline AverageResult average_expectation(const AlgebraElement& f, const std::vector<ArrowId>* order = nullptr) {
  const auto& ctx = f.context();
  const auto& R = ctx->ring;
  if (R.kind() == RingKind::int_mod_m) throw precondition_error("averaging needs an integral domain; " + R.to_string() + " is not");
  require_two_nonzero(R);
  if (!predicates(ctx->groupoid).principal) throw precondition_error("averaging needs a principal groupoid");
  AverageResult out{AlgebraElement::zero(ctx), {}, decompose_bisections(f, DecompositionMode::disjoint_range_source, order)};
  std::vector<ArrowSet> bis;
  for (const auto& p : out.pieces)
    if (!p.in_units) bis.push_back(p.support);
  out.k = bis.size();
  out.family = sign_family(ctx, bis);
  auto scale = Coefficient::one(R);
  for (std::size_t i = 0; i < out.k; ++i) scale = scale + scale;
  auto inv = scale.try_inverse();
  if (!inv) throw precondition_error("2^k is not invertible in " + R.to_string());
  out.value = sandwich_sum(f, out.family.members).scaled(*inv);
  out.equals_delta = out.value == delta_expectation(f);
  if (!out.equals_delta) throw consistency_failure("averaging does not reproduce Delta(f) = " + delta_expectation(f).to_string());
  return out;
}

// -------------------------------------------------------------- obstruction

struct ObstructionResult {
  ArrowId gamma = 0;
  std::size_t random_families = 0;
  bool identity_holds = true;
  std::size_t exhaustive_families = 0;
  std::size_t reproducing = 0;
  std::optional<std::vector<AlgebraElement>> reproducing_witness;
  std::optional<std::vector<AlgebraElement>> identity_witness;
};

/// Does (1/N) sum u_i f u_i equal Delta(f)?  False when N is not invertible.
inline bool family_reproduces_delta(const AlgebraElement& f, const std::vector<AlgebraElement>& fam) {
  const auto& R = f.context()->ring;
  auto n = Coefficient::from_int(R, std::int64_t(fam.size())).try_inverse();
  if (!n) return false;
  return sandwich_sum(f, fam).scaled(*n) == delta_expectation(f);
}

/// The proportionality identity at gamma and r(gamma) for one family.
inline bool obstruction_identity(const AlgebraElement& f, ArrowId gamma, const std::vector<AlgebraElement>& fam) {
  const auto& ctx = f.context();
  const auto& g = ctx->groupoid;
  auto r = g.tgt(gamma);
  auto s = sandwich_sum(f, fam);
  auto q = Coefficient::zero(ctx->ring);
  for (const auto& u : fam) q += u.at(r) * u.at(r);
  bool at_gamma = s.at(gamma) == q * f.at(gamma);
  bool at_unit = s.at(r) == q * f.at(r);
  return at_gamma && at_unit && (s.at(gamma).is_zero() == s.at(r).is_zero());
}

inline ArrowId obstruction_arrow(const AlgebraElement& f) {
  const auto& g = f.context()->groupoid;
  if (predicates(g).principal) throw precondition_error("groupoid is principal; nothing to obstruct");
  for (const auto& [a, c] : f.terms())
    if (!g.is_unit(a) && g.src(a) == g.tgt(a) && !f.at(g.tgt(a)).is_zero()) return a;
  throw precondition_error("f needs f(gamma) != 0 and f(r(gamma)) != 0 for an isotropy arrow gamma");
}

/// Random families of sizes 1..max_size, then every multiset family of size
/// up to exhaustive_size over all of D.
inline ObstructionResult averaging_obstruction(const AlgebraElement& f, std::size_t random_trials, std::uint64_t seed,
                                               std::size_t exhaustive_size, const Guards& guards = {},
                                               std::size_t max_size = 4) {
  const auto& ctx = f.context();
  ObstructionResult out;
  out.gamma = obstruction_arrow(f);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> size_dist(1, max_size);
  for (std::size_t t = 0; t < random_trials; ++t) {
    std::vector<AlgebraElement> fam;
    auto n = size_dist(rng);
    for (std::size_t i = 0; i < n; ++i) fam.push_back(random_diagonal(ctx, rng));
    ++out.random_families;
    if (!obstruction_identity(f, out.gamma, fam)) {
      out.identity_holds = false;
      if (!out.identity_witness) out.identity_witness = fam;
    }
    if (family_reproduces_delta(f, fam)) {
      ++out.reproducing;
      if (!out.reproducing_witness) out.reproducing_witness = fam;
    }
  }
  if (exhaustive_size > 0) {
    auto diag = diagonal_basis(ctx);
    std::vector<AlgebraElement> ds;
    for_each_combination(ctx, diag, guards.max_scan, [&](const AlgebraElement& d) {
      ds.push_back(d);
      return true;
    });
    std::vector<std::size_t> idx;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
      if (!idx.empty()) {
        std::vector<AlgebraElement> fam;
        for (auto i : idx) fam.push_back(ds[i]);
        ++out.exhaustive_families;
        if (out.exhaustive_families > guards.max_scan) throw guard_exceeded("family scan exceeds guard");
        if (!obstruction_identity(f, out.gamma, fam)) {
          out.identity_holds = false;
          if (!out.identity_witness) out.identity_witness = fam;
        }
        if (family_reproduces_delta(f, fam)) {
          ++out.reproducing;
          if (!out.reproducing_witness) out.reproducing_witness = fam;
        }
      }
      if (idx.size() == exhaustive_size) return;
      for (std::size_t i = start; i < ds.size(); ++i) {
        idx.push_back(i);
        rec(i);
        idx.pop_back();
      }
    };
    rec(0);
  }
  return out;
}

}  // namespace cartan_lab
