#pragma once

// Discrete twists as normalized 2-cocycles with values in R^x, and the
// total space Sigma = R^x x_omega G built from them.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cartan_lab/coeff.hpp"
#include "cartan_lab/groupoid.hpp"

namespace cartan_lab {

class Cocycle {
 public:
  static Cocycle trivial(const FiniteGroupoid& g, const RingDescriptor& r) {
    Cocycle c(g.size(), r);
    return c;
  }

  /// omega(a, b) evaluated on every composable pair.  Non-unit values are
  /// rejected; the cocycle identity is left to validate_cocycle.
  static Cocycle from_function(const FiniteGroupoid& g, const RingDescriptor& r,
                               const std::function<Coefficient(ArrowId, ArrowId)>& f) {
    Cocycle c(g.size(), r);
    for (ArrowId a = 0; a < g.size(); ++a)
      for (ArrowId b = 0; b < g.size(); ++b)
        if (g.composable(a, b)) c.set(a, b, f(a, b));
    return c;
  }

  struct Entry {
    ArrowId a;
    ArrowId b;
    Coefficient value;
  };

  /// Sparse form: omitted composable pairs are 1.
  static Cocycle from_entries(const FiniteGroupoid& g, const RingDescriptor& r, const std::vector<Entry>& es) {
    Cocycle c(g.size(), r);
    for (const auto& e : es) {
      if (e.a >= g.size() || e.b >= g.size()) throw input_error("cocycle entry has a dangling arrow id");
      if (!g.composable(e.a, e.b))
        throw input_error("cocycle entry (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") is not composable");
      c.set(e.a, e.b, e.value);
    }
    return c;
  }

  const RingDescriptor& ring() const { return ring_; }
  std::size_t arrows() const { return n_; }
  bool is_trivial() const { return trivial_; }

  /// Value on a composable pair; 1 elsewhere.
  const Coefficient& operator()(ArrowId a, ArrowId b) const {
    if (trivial_) return one_;
    return table_[a * n_ + b];
  }

  /// Non-trivial entries in (a, b) order.
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    if (trivial_) return out;
    for (ArrowId a = 0; a < n_; ++a)
      for (ArrowId b = 0; b < n_; ++b)
        if (!table_[a * n_ + b].is_one()) out.push_back({a, b, table_[a * n_ + b]});
    return out;
  }

  void set(ArrowId a, ArrowId b, const Coefficient& v) {
    if (!(v.ring() == ring_)) throw context_mismatch("cocycle value from ring " + v.ring().to_string());
    if (!v.is_unit()) throw input_error("cocycle value " + v.to_string() + " is not a unit");
    if (trivial_ && v.is_one()) return;
    if (trivial_) {
      table_.assign(n_ * n_, one_);
      trivial_ = false;
    }
    table_[a * n_ + b] = v;
  }

  friend bool operator==(const Cocycle& x, const Cocycle& y) {
    return x.ring_ == y.ring_ && x.entries().size() == y.entries().size() && [&] {
      for (ArrowId a = 0; a < x.n_; ++a)
        for (ArrowId b = 0; b < x.n_; ++b)
          if (!(x(a, b) == y(a, b))) return false;
      return true;
    }();
  }

 private:
  Cocycle(std::size_t n, const RingDescriptor& r) : ring_(r), n_(n), one_(Coefficient::one(r)) {}

  RingDescriptor ring_;
  std::size_t n_;
  Coefficient one_;
  bool trivial_ = true;
  std::vector<Coefficient> table_;
};

struct CocycleVerdict {
  bool valid = true;
  std::string violation;
  std::vector<ArrowId> witness;
};

inline CocycleVerdict validate_cocycle(const FiniteGroupoid& g, const Cocycle& w) {
  if (w.arrows() != g.size()) throw input_error("cocycle and groupoid sizes differ");
  if (w.is_trivial()) return {};
  for (ArrowId a = 0; a < g.size(); ++a) {
    if (!w(g.tgt(a), a).is_one()) return {false, "not normalized: omega(r(a), a) != 1", {g.tgt(a), a}};
    if (!w(a, g.src(a)).is_one()) return {false, "not normalized: omega(a, s(a)) != 1", {a, g.src(a)}};
  }
  for (ArrowId a = 0; a < g.size(); ++a)
    for (ArrowId b = 0; b < g.size(); ++b) {
      auto ab = g.try_compose(a, b);
      if (!ab) continue;
      for (ArrowId c = 0; c < g.size(); ++c) {
        auto bc = g.try_compose(b, c);
        if (!bc) continue;
        if (!(w(a, b) * w(*ab, c) == w(a, *bc) * w(b, c))) return {false, "cocycle identity fails", {a, b, c}};
      }
    }
  return {};
}

/// omega(a, a^-1) == omega(a^-1, a) on every arrow; a consequence of the
/// normalized identity.  Returns the first violating arrow.
inline std::optional<ArrowId> inverse_symmetry_violation(const FiniteGroupoid& g, const Cocycle& w) {
  for (ArrowId a = 0; a < g.size(); ++a)
    if (!(w(a, g.inv(a)) == w(g.inv(a), a))) return a;
  return std::nullopt;
}

/// Sigma with arrow (t, gamma) at id t_index * |G| + gamma, where t_index
/// indexes units(R).
struct TwistTotal {
  FiniteGroupoid sigma;
  std::vector<Coefficient> scalars;
  std::size_t base_size;

  ArrowId encode(std::size_t t_index, ArrowId gamma) const { return ArrowId(t_index * base_size + gamma); }
  ArrowId base(ArrowId s) const { return ArrowId(s % base_size); }
  std::size_t scalar_index(ArrowId s) const { return s / base_size; }
  const Coefficient& scalar(ArrowId s) const { return scalars[scalar_index(s)]; }
  std::size_t index_of(const Coefficient& t) const {
    for (std::size_t i = 0; i < scalars.size(); ++i)
      if (scalars[i] == t) return i;
    throw precondition_error(t.to_string() + " is not a unit");
  }
};

inline TwistTotal sigma_total(const FiniteGroupoid& g, const Cocycle& w) {
  auto v = validate_cocycle(g, w);
  if (!v.valid) throw precondition_error("sigma_total on an invalid cocycle: " + v.violation);
  auto us = units(w.ring());
  const auto n = g.size(), k = us.size(), total = n * k;
  auto index_of = [&](const Coefficient& c) {
    for (std::size_t i = 0; i < k; ++i)
      if (us[i] == c) return i;
    throw consistency_failure("twist scalar " + c.to_string() + " is not a unit");
  };
  auto encode = [n](std::size_t ti, ArrowId a) { return ArrowId(ti * n + a); };
  const std::size_t one = index_of(Coefficient::one(w.ring()));
  GroupoidTables t;
  t.arrows.resize(total);
  t.inv.resize(total);
  t.comp.assign(total * total, -1);
  for (std::size_t ti = 0; ti < k; ++ti)
    for (ArrowId a = 0; a < n; ++a) {
      auto s = encode(ti, a);
      t.arrows[s] = {s, encode(one, g.src(a)), encode(one, g.tgt(a))};
      auto inv_scale = (us[ti] * w(a, g.inv(a))).inverse();
      t.inv[s] = encode(index_of(inv_scale), g.inv(a));
      for (std::size_t tj = 0; tj < k; ++tj)
        for (ArrowId b = 0; b < n; ++b) {
          auto ab = g.try_compose(a, b);
          if (!ab) continue;
          t.comp[s * total + encode(tj, b)] = encode(index_of(us[ti] * us[tj] * w(a, b)), *ab);
        }
    }
  for (auto u : g.units()) t.units.push_back(encode(one, u));
  TwistTotal tt{FiniteGroupoid::from_tables(std::move(t)), us, n};
  // centrality: (t, r(s)) s = s (t, s(s))
  for (std::size_t ti = 0; ti < k; ++ti)
    for (ArrowId s = 0; s < total; ++s) {
      auto left = tt.sigma.compose(tt.encode(ti, g.tgt(tt.base(s))), s);
      auto right = tt.sigma.compose(s, tt.encode(ti, g.src(tt.base(s))));
      if (left != right) throw consistency_failure("twist total space is not central at arrow " + std::to_string(s));
    }
  return tt;
}

// Contravariant functions on Sigma: F(t.sigma) = t^-1 F(sigma).  Functions
// are dense vectors indexed by arrow id.

using DenseFunction = std::vector<Coefficient>;

/// F(t, gamma) = t^-1 f(gamma).
inline DenseFunction contravariant_lift(const TwistTotal& tt, const DenseFunction& f) {
  DenseFunction out;
  out.reserve(tt.sigma.size());
  for (ArrowId s = 0; s < tt.sigma.size(); ++s) out.push_back(tt.scalar(s).inverse() * f[tt.base(s)]);
  return out;
}

/// Restricts a contravariant function along the section gamma -> (1, gamma).
/// Throws consistency_failure when F is not contravariant.
inline DenseFunction contravariant_descend(const TwistTotal& tt, const DenseFunction& big) {
  const auto& r = tt.scalars.front().ring();
  auto one = tt.index_of(Coefficient::one(r));
  DenseFunction f;
  for (ArrowId a = 0; a < tt.base_size; ++a) f.push_back(big[tt.encode(one, a)]);
  for (ArrowId s = 0; s < tt.sigma.size(); ++s)
    if (!(big[s] == tt.scalar(s).inverse() * f[tt.base(s)]))
      throw consistency_failure("function on Sigma is not contravariant at arrow " + std::to_string(s));
  return f;
}

/// Convolution of contravariant functions on Sigma, summing over the
/// section (1, eta): (F*G)(s) = sum_{r(eta) = r(s)} F(1, eta) G((1, eta)^-1 s).
inline DenseFunction sigma_convolve(const FiniteGroupoid& g, const TwistTotal& tt, const DenseFunction& F,
                                    const DenseFunction& G) {
  const auto& r = tt.scalars.front().ring();
  auto one = tt.index_of(Coefficient::one(r));
  DenseFunction out(tt.sigma.size(), Coefficient::zero(r));
  for (ArrowId s = 0; s < tt.sigma.size(); ++s) {
    auto target = g.tgt(tt.base(s));
    for (ArrowId eta = 0; eta < g.size(); ++eta) {
      if (g.tgt(eta) != target) continue;
      auto lift = tt.encode(one, eta);
      out[s] += F[lift] * G[tt.sigma.compose(tt.sigma.inv(lift), s)];
    }
  }
  return out;
}

}  // namespace cartan_lab
