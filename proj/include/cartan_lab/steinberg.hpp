#pragma once

// Twisted Steinberg algebras of finite groupoids: finitely supported
// R-valued functions on arrows with omega-twisted convolution.

#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cartan_lab/coeff.hpp"
#include "cartan_lab/groupoid.hpp"
#include "cartan_lab/linalg.hpp"
#include "cartan_lab/twist.hpp"

namespace cartan_lab {

struct Context {
  FiniteGroupoid groupoid;
  RingDescriptor ring;
  Cocycle omega;

  std::size_t size() const { return groupoid.size(); }
};

using ContextPtr = std::shared_ptr<const Context>;

/// Validates the cocycle and freezes the triple.
inline ContextPtr make_context(FiniteGroupoid g, const RingDescriptor& r, std::optional<Cocycle> omega = std::nullopt) {
  Cocycle w = omega ? *omega : Cocycle::trivial(g, r);
  if (!(w.ring() == r)) throw context_mismatch("cocycle ring differs from context ring");
  auto v = validate_cocycle(g, w);
  if (!v.valid) {
    std::string msg = "invalid cocycle: " + v.violation + " at (";
    for (std::size_t i = 0; i < v.witness.size(); ++i) msg += (i ? "," : "") + std::to_string(v.witness[i]);
    throw input_error(msg + ")");
  }
  return std::make_shared<const Context>(Context{std::move(g), r, std::move(w)});
}

class AlgebraElement {
 public:
  using Term = std::pair<ArrowId, Coefficient>;

  explicit AlgebraElement(ContextPtr ctx) : ctx_(std::move(ctx)) {}

  static AlgebraElement zero(const ContextPtr& ctx) { return AlgebraElement(ctx); }
  static AlgebraElement delta(const ContextPtr& ctx, ArrowId a) { return delta(ctx, a, Coefficient::one(ctx->ring)); }
  static AlgebraElement delta(const ContextPtr& ctx, ArrowId a, const Coefficient& c) {
    AlgebraElement f(ctx);
    if (a >= ctx->size()) throw input_error("arrow id " + std::to_string(a) + " out of range");
    if (!c.is_zero()) f.terms_.emplace_back(a, c);
    return f;
  }
  static AlgebraElement indicator(const ContextPtr& ctx, const ArrowSet& s) {
    return indicator(ctx, s, Coefficient::one(ctx->ring));
  }
  static AlgebraElement indicator(const ContextPtr& ctx, const ArrowSet& s, const Coefficient& c) {
    AlgebraElement f(ctx);
    if (c.is_zero()) return f;
    for (auto a = s.find_first(); a != ArrowSet::npos; a = s.find_next(a)) f.terms_.emplace_back(ArrowId(a), c);
    return f;
  }
  /// 1 on the given unit set; the identity of A when the set is all units.
  static AlgebraElement unit_sum(const ContextPtr& ctx) { return indicator(ctx, ctx->groupoid.unit_set()); }
  static AlgebraElement from_dense(const ContextPtr& ctx, const linalg::Vec& v) {
    if (v.size() != ctx->size()) throw input_error("dense vector has the wrong length");
    AlgebraElement f(ctx);
    for (std::size_t a = 0; a < v.size(); ++a)
      if (!v[a].is_zero()) f.terms_.emplace_back(ArrowId(a), v[a]);
    return f;
  }
  static AlgebraElement from_terms(const ContextPtr& ctx, std::vector<Term> terms) {
    auto v = linalg::zeros(ctx->ring, ctx->size());
    for (auto& [a, c] : terms) {
      if (a >= ctx->size()) throw input_error("arrow id " + std::to_string(a) + " out of range");
      v[a] += c;
    }
    return from_dense(ctx, v);
  }

  const ContextPtr& context() const { return ctx_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Coefficient at(ArrowId a) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), a,
                               [](const Term& t, ArrowId x) { return t.first < x; });
    if (it != terms_.end() && it->first == a) return it->second;
    return Coefficient::zero(ctx_->ring);
  }

  ArrowSet support() const {
    ArrowSet s(ctx_->size());
    for (const auto& t : terms_) s.set(t.first);
    return s;
  }

  linalg::Vec dense() const {
    auto v = linalg::zeros(ctx_->ring, ctx_->size());
    for (const auto& [a, c] : terms_) v[a] = c;
    return v;
  }

  bool in_diagonal() const {
    for (const auto& t : terms_)
      if (!ctx_->groupoid.is_unit(t.first)) return false;
    return true;
  }

  AlgebraElement operator+(const AlgebraElement& o) const { return combine(o, false); }
  AlgebraElement operator-(const AlgebraElement& o) const { return combine(o, true); }
  AlgebraElement operator-() const { return scaled(-Coefficient::one(ctx_->ring)); }
  AlgebraElement& operator+=(const AlgebraElement& o) { return *this = *this + o; }

  AlgebraElement scaled(const Coefficient& c) const {
    if (!(c.ring() == ctx_->ring)) throw context_mismatch("scalar from ring " + c.ring().to_string());
    AlgebraElement f(ctx_);
    if (c.is_zero()) return f;
    for (const auto& [a, x] : terms_) {
      auto y = c * x;
      if (!y.is_zero()) f.terms_.emplace_back(a, y);
    }
    return f;
  }

  /// (f*g)(gamma) = sum over alpha beta = gamma of omega(alpha, beta) f(alpha) g(beta).
  AlgebraElement operator*(const AlgebraElement& o) const {
    check(o);
    const auto& g = ctx_->groupoid;
    const auto& w = ctx_->omega;
    auto acc = linalg::zeros(ctx_->ring, ctx_->size());
    std::vector<bool> touched(ctx_->size(), false);
    for (const auto& [a, x] : terms_)
      for (const auto& [b, y] : o.terms_) {
        auto ab = g.try_compose(a, b);
        if (!ab) continue;
        acc[*ab] += w.is_trivial() ? x * y : w(a, b) * x * y;
        touched[*ab] = true;
      }
    AlgebraElement f(ctx_);
    for (ArrowId a = 0; a < ctx_->size(); ++a)
      if (touched[a] && !acc[a].is_zero()) f.terms_.emplace_back(a, acc[a]);
    return f;
  }

  friend bool operator==(const AlgebraElement& a, const AlgebraElement& b) {
    return a.ctx_ == b.ctx_ && a.terms_ == b.terms_;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [a, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += c.to_string() + "*d" + std::to_string(a);
    }
    return s;
  }

 private:
  void check(const AlgebraElement& o) const {
    if (ctx_ != o.ctx_) throw context_mismatch("elements from different contexts");
  }
  AlgebraElement combine(const AlgebraElement& o, bool subtract) const {
    check(o);
    AlgebraElement f(ctx_);
    std::size_t i = 0, j = 0;
    while (i < terms_.size() || j < o.terms_.size()) {
      if (j == o.terms_.size() || (i < terms_.size() && terms_[i].first < o.terms_[j].first)) {
        f.terms_.push_back(terms_[i++]);
      } else if (i == terms_.size() || o.terms_[j].first < terms_[i].first) {
        f.terms_.emplace_back(o.terms_[j].first, subtract ? -o.terms_[j].second : o.terms_[j].second);
        ++j;
      } else {
        auto c = subtract ? terms_[i].second - o.terms_[j].second : terms_[i].second + o.terms_[j].second;
        if (!c.is_zero()) f.terms_.emplace_back(terms_[i].first, c);
        ++i;
        ++j;
      }
    }
    return f;
  }

  ContextPtr ctx_;
  std::vector<Term> terms_;
};

inline AlgebraElement convolve(const AlgebraElement& f, const AlgebraElement& g) { return f * g; }

/// Restriction to the unit space.
inline AlgebraElement delta_expectation(const AlgebraElement& f) {
  std::vector<AlgebraElement::Term> keep;
  for (const auto& t : f.terms())
    if (f.context()->groupoid.is_unit(t.first)) keep.push_back(t);
  return AlgebraElement::from_terms(f.context(), std::move(keep));
}

/// The idempotent 1_{r(S_f) u s(S_f)} in D, a two-sided unit for f.
inline AlgebraElement local_unit(const AlgebraElement& f) {
  const auto& g = f.context()->groupoid;
  ArrowSet s = g.empty_set();
  for (const auto& t : f.terms()) {
    s.set(g.src(t.first));
    s.set(g.tgt(t.first));
  }
  return AlgebraElement::indicator(f.context(), s);
}

/// D-basis: the unit deltas in unit order.
inline std::vector<AlgebraElement> diagonal_basis(const ContextPtr& ctx) {
  std::vector<AlgebraElement> out;
  for (auto u : ctx->groupoid.units()) out.push_back(AlgebraElement::delta(ctx, u));
  return out;
}

// ------------------------------------------------------- bisection pieces

struct BisectionPiece {
  ArrowSet support;
  Coefficient value;
  bool in_units;
};

enum class DecompositionMode {
  /// Constant-coefficient bisections.
  bisections,
  /// Additionally every non-unit piece has r(B) and s(B) disjoint; needs a principal groupoid.
  disjoint_range_source,
};

/// Splits S_f by coefficient value, then greedily into bisections.  The
/// arrow visiting order can be permuted to obtain other valid splittings.
inline std::vector<BisectionPiece> decompose_bisections(const AlgebraElement& f,
                                                        DecompositionMode mode = DecompositionMode::bisections,
                                                        const std::vector<ArrowId>* order = nullptr) {
  const auto& ctx = f.context();
  const auto& g = ctx->groupoid;
  if (mode == DecompositionMode::disjoint_range_source && !predicates(g).principal)
    throw precondition_error("disjoint range/source decomposition needs a principal groupoid");
  std::vector<ArrowId> arrows;
  if (order) {
    for (auto a : *order)
      if (!f.at(a).is_zero()) arrows.push_back(a);
  } else {
    for (const auto& t : f.terms()) arrows.push_back(t.first);
  }
  struct Work {
    BisectionPiece piece;
    ArrowSet ranges, sources;
  };
  std::vector<Work> work;
  for (auto a : arrows) {
    auto c = f.at(a);
    bool unit = g.is_unit(a);
    bool placed = false;
    for (auto& w : work) {
      if (!(w.piece.value == c) || w.piece.in_units != unit) continue;
      if (w.ranges.test(g.tgt(a)) || w.sources.test(g.src(a))) continue;
      if (mode == DecompositionMode::disjoint_range_source && !unit &&
          (w.sources.test(g.tgt(a)) || w.ranges.test(g.src(a))))
        continue;
      w.piece.support.set(a);
      w.ranges.set(g.tgt(a));
      w.sources.set(g.src(a));
      placed = true;
      break;
    }
    if (placed) continue;
    Work w{{g.empty_set(), c, unit}, g.empty_set(), g.empty_set()};
    w.piece.support.set(a);
    w.ranges.set(g.tgt(a));
    w.sources.set(g.src(a));
    work.push_back(std::move(w));
  }
  std::vector<BisectionPiece> out;
  for (auto& w : work) {
    if (!g.is_bisection(w.piece.support)) throw consistency_failure("decomposition produced a non-bisection piece");
    out.push_back(std::move(w.piece));
  }
  return out;
}

inline AlgebraElement reassemble(const ContextPtr& ctx, const std::vector<BisectionPiece>& pieces) {
  auto f = AlgebraElement::zero(ctx);
  for (const auto& p : pieces) f += AlgebraElement::indicator(ctx, p.support, p.value);
  return f;
}

// ------------------------------------------------------------------ bases

/// A subspace of A in reduced echelon form under the arrow-id order.
class Basis {
 public:
  explicit Basis(ContextPtr ctx) : ctx_(std::move(ctx)), ech_(linalg::empty_span(ctx_->ring, ctx_->size())) {}

  static Basis span_of(const ContextPtr& ctx, const std::vector<AlgebraElement>& gens) {
    Basis b(ctx);
    for (const auto& g : gens) b.insert(g);
    return b;
  }

  /// Subalgebra generated by gens.  Every inserted generator is multiplied
  /// with every other exactly once in each order.
  static Basis algebra_of(const ContextPtr& ctx, const std::vector<AlgebraElement>& gens) {
    Basis b(ctx);
    std::vector<AlgebraElement> spanning;
    auto add = [&](const AlgebraElement& x) {
      if (b.insert(x)) spanning.push_back(x);
    };
    for (const auto& g : gens) add(g);
    std::size_t done = 0, rounds = 0;
    while (done < spanning.size()) {
      if (++rounds > ctx->size() * ctx->size() + 1)
        throw consistency_failure("algebra closure failed to stabilize");
      auto x = spanning[done];
      for (std::size_t j = 0; j <= done; ++j) {
        auto y = spanning[j];
        add(x * y);
        add(y * x);
      }
      ++done;
    }
    return b;
  }

  /// A(H): every function supported on the arrow set.
  static Basis coordinate(const ContextPtr& ctx, const ArrowSet& s) {
    Basis b(ctx);
    for (auto a = s.find_first(); a != ArrowSet::npos; a = s.find_next(a)) b.insert(AlgebraElement::delta(ctx, ArrowId(a)));
    return b;
  }
  static Basis diagonal(const ContextPtr& ctx) { return coordinate(ctx, ctx->groupoid.unit_set()); }
  static Basis full(const ContextPtr& ctx) { return coordinate(ctx, ctx->groupoid.all_arrows()); }

  static Basis from_echelon(const ContextPtr& ctx, linalg::Echelon e) {
    Basis b(ctx);
    b.ech_ = std::move(e);
    return b;
  }

  const ContextPtr& context() const { return ctx_; }
  std::size_t dim() const { return ech_.rank(); }
  const linalg::Echelon& echelon() const { return ech_; }
  const std::vector<std::size_t>& pivots() const { return ech_.pivots; }

  std::vector<AlgebraElement> vectors() const {
    std::vector<AlgebraElement> out;
    for (const auto& r : ech_.rows) out.push_back(AlgebraElement::from_dense(ctx_, r));
    return out;
  }

  bool insert(const AlgebraElement& f) {
    if (f.context() != ctx_) throw context_mismatch("element from a different context");
    return ech_.insert(f.dense());
  }
  bool contains(const AlgebraElement& f) const {
    if (f.context() != ctx_) throw context_mismatch("element from a different context");
    return ech_.contains(f.dense());
  }
  bool contains(const Basis& o) const { return linalg::is_subspace(o.ech_, ech_); }

  /// Union of supports of all elements of the span.
  ArrowSet support() const {
    ArrowSet s(ctx_->size());
    for (const auto& r : ech_.rows)
      for (std::size_t a = 0; a < r.size(); ++a)
        if (!r[a].is_zero()) s.set(a);
    return s;
  }

  bool contains_diagonal() const {
    for (auto u : ctx_->groupoid.units())
      if (!contains(AlgebraElement::delta(ctx_, u))) return false;
    return true;
  }

  bool is_subalgebra() const {
    auto vs = vectors();
    for (const auto& x : vs)
      for (const auto& y : vs)
        if (!contains(x * y)) return false;
    return true;
  }

  Basis intersect(const Basis& o) const { return from_echelon(ctx_, linalg::intersect(ech_, o.ech_)); }

  /// Canonical text key, usable for deduplication.
  std::string key() const {
    std::string k;
    for (const auto& r : ech_.rows) {
      for (const auto& c : r) k += c.to_string() + ",";
      k += ";";
    }
    return k;
  }

  friend bool operator==(const Basis& a, const Basis& b) { return a.ctx_ == b.ctx_ && a.ech_ == b.ech_; }

 private:
  ContextPtr ctx_;
  linalg::Echelon ech_;
};

inline Basis span_closure(const ContextPtr& ctx, const std::vector<AlgebraElement>& gens) {
  return Basis::span_of(ctx, gens);
}
inline Basis algebra_closure(const ContextPtr& ctx, const std::vector<AlgebraElement>& gens) {
  return Basis::algebra_of(ctx, gens);
}

// ------------------------------------------------------------ restriction

struct RestrictedContext {
  ContextPtr context;
  Restriction map;
};

inline RestrictedContext restrict_context(const ContextPtr& ctx, const ArrowSet& units_x) {
  auto r = restrict_to(ctx->groupoid, units_x);
  const auto& w = ctx->omega;
  auto sub_w = Cocycle::from_function(r.groupoid, ctx->ring,
                                      [&](ArrowId a, ArrowId b) { return w(r.to_parent[a], r.to_parent[b]); });
  auto g = r.groupoid;
  return {make_context(std::move(g), ctx->ring, sub_w), std::move(r)};
}

/// f restricted to the arrows of G|X.
inline AlgebraElement restriction_map(const AlgebraElement& f, const RestrictedContext& rc) {
  std::vector<AlgebraElement::Term> terms;
  for (const auto& [a, c] : f.terms())
    if (rc.map.from_parent[a] >= 0) terms.emplace_back(ArrowId(rc.map.from_parent[a]), c);
  return AlgebraElement::from_terms(rc.context, std::move(terms));
}

/// Pushes an element of A(G|X) back into A(G) by extension with zero.
inline AlgebraElement extend_from_restriction(const ContextPtr& parent, const AlgebraElement& f,
                                              const RestrictedContext& rc) {
  std::vector<AlgebraElement::Term> terms;
  for (const auto& [a, c] : f.terms()) terms.emplace_back(rc.map.to_parent[a], c);
  return AlgebraElement::from_terms(parent, std::move(terms));
}

}  // namespace cartan_lab
