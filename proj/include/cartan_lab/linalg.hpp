#pragma once

// Dense exact linear algebra over Q and F_p.  Subspaces are kept in reduced
// row echelon form, which is canonical: two spans are equal iff their RREF
// row lists are equal.

#include <optional>
#include <vector>

#include "cartan_lab/coeff.hpp"

namespace cartan_lab::linalg {

using Vec = std::vector<Coefficient>;
using Mat = std::vector<Vec>;

inline void require_field(const RingDescriptor& r) {
  if (!r.is_field()) throw precondition_error("echelon linear algebra needs a field, got " + r.to_string());
}

inline bool is_zero(const Vec& v) {
  for (const auto& c : v)
    if (!c.is_zero()) return false;
  return true;
}

inline Vec zeros(const RingDescriptor& r, std::size_t n) { return Vec(n, Coefficient::zero(r)); }

/// Echelon form of a subspace.  rows[i] has a 1 at pivots[i], zeros at
/// every other pivot column, and pivots increase.
struct Echelon {
  RingDescriptor ring;
  std::size_t cols = 0;
  Mat rows;
  std::vector<std::size_t> pivots;

  std::size_t rank() const { return rows.size(); }

  /// Subtracts the span's component along pivot columns; zero iff v is in the span.
  Vec reduce(Vec v) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto c = v[pivots[i]];
      if (c.is_zero()) continue;
      for (std::size_t j = pivots[i]; j < cols; ++j)
        if (!rows[i][j].is_zero()) v[j] -= c * rows[i][j];
    }
    return v;
  }
  bool contains(const Vec& v) const { return is_zero(reduce(v)); }

  /// Coordinates of v in the row basis, when v lies in the span.
  std::optional<Vec> coordinates(const Vec& v) const {
    if (!contains(v)) return std::nullopt;
    Vec out;
    for (auto p : pivots) out.push_back(v[p]);
    return out;
  }

  /// Inserts v, keeping full RREF.  Returns false when v was already in the span.
  bool insert(const Vec& v0) {
    auto v = reduce(v0);
    std::size_t p = 0;
    while (p < cols && v[p].is_zero()) ++p;
    if (p == cols) return false;
    auto inv = v[p].inverse();
    for (auto& c : v) c *= inv;
    for (auto& row : rows) {
      auto c = row[p];
      if (c.is_zero()) continue;
      for (std::size_t j = p; j < cols; ++j)
        if (!v[j].is_zero()) row[j] -= c * v[j];
    }
    std::size_t pos = 0;
    while (pos < pivots.size() && pivots[pos] < p) ++pos;
    rows.insert(rows.begin() + static_cast<std::ptrdiff_t>(pos), std::move(v));
    pivots.insert(pivots.begin() + static_cast<std::ptrdiff_t>(pos), p);
    return true;
  }

  friend bool operator==(const Echelon& a, const Echelon& b) {
    return a.ring == b.ring && a.cols == b.cols && a.pivots == b.pivots && a.rows == b.rows;
  }
};

inline Echelon empty_span(const RingDescriptor& r, std::size_t cols) {
  require_field(r);
  return Echelon{r, cols, {}, {}};
}

inline Echelon span(const RingDescriptor& r, std::size_t cols, const Mat& vs) {
  auto e = empty_span(r, cols);
  for (const auto& v : vs) e.insert(v);
  return e;
}

/// Basis of {x : M x = 0}, where M has the given number of columns.
inline Mat nullspace(const RingDescriptor& r, std::size_t cols, const Mat& m) {
  auto e = span(r, cols, m);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  Mat out;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    auto x = zeros(r, cols);
    x[f] = Coefficient::one(r);
    for (std::size_t i = 0; i < e.rows.size(); ++i) x[e.pivots[i]] = -e.rows[i][f];
    out.push_back(std::move(x));
  }
  return out;
}

/// Some x with M x = b, if any.
inline std::optional<Vec> solve(const RingDescriptor& r, std::size_t cols, const Mat& m, const Vec& b) {
  require_field(r);
  // Row-reduce the augmented system [M | b].
  Mat aug;
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto row = m[i];
    row.push_back(b[i]);
    aug.push_back(std::move(row));
  }
  auto e = span(r, cols + 1, aug);
  Vec x = zeros(r, cols);
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    if (e.pivots[i] == cols) return std::nullopt;
    x[e.pivots[i]] = e.rows[i][cols];
  }
  return x;
}

inline Echelon intersect(const Echelon& a, const Echelon& b) {
  // x in a and b  <=>  x = sum c_i a_i with the b-reduction of x equal to zero.
  const auto& r = a.ring;
  auto out = empty_span(r, a.cols);
  if (a.rank() == 0 || b.rank() == 0) return out;
  // Columns of the system: coordinates c over a's rows.
  Mat reduced;
  for (const auto& row : a.rows) reduced.push_back(b.reduce(row));
  // Transpose: constraints are, for each column j, sum_i c_i reduced[i][j] = 0.
  Mat sys(a.cols, zeros(r, a.rank()));
  for (std::size_t i = 0; i < a.rank(); ++i)
    for (std::size_t j = 0; j < a.cols; ++j) sys[j][i] = reduced[i][j];
  for (const auto& c : nullspace(r, a.rank(), sys)) {
    auto x = zeros(r, a.cols);
    for (std::size_t i = 0; i < a.rank(); ++i)
      if (!c[i].is_zero())
        for (std::size_t j = 0; j < a.cols; ++j) x[j] += c[i] * a.rows[i][j];
    out.insert(x);
  }
  return out;
}

inline bool is_subspace(const Echelon& a, const Echelon& b) {
  for (const auto& row : a.rows)
    if (!b.contains(row)) return false;
  return true;
}

}  // namespace cartan_lab::linalg
