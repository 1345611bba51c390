#pragma once

// Exact commutative coefficient rings: the rationals, prime fields F_p and
// residue rings Z/mZ.  Every value is kept in canonical form (reduced
// fraction with positive denominator, or residue in [0, m)), so structural
// equality is mathematical equality.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cartan_lab/errors.hpp"

namespace cartan_lab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class RingKind { rationals, prime_field, int_mod_m };

namespace detail {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  auto r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace detail

class RingDescriptor {
 public:
  static RingDescriptor rationals() { return RingDescriptor(RingKind::rationals, 0); }
  static RingDescriptor prime_field(std::uint32_t p) {
    if (!detail::is_prime(p))
      throw input_error("prime field modulus " + std::to_string(p) + " is not prime");
    return RingDescriptor(RingKind::prime_field, p);
  }
  static RingDescriptor int_mod(std::uint32_t m) {
    if (m < 2) throw input_error("Z/mZ needs m >= 2");
    // Z/p is a field; keep one canonical descriptor for it.
    if (detail::is_prime(m)) return RingDescriptor(RingKind::prime_field, m);
    return RingDescriptor(RingKind::int_mod_m, m);
  }

  /// Parses "Q", "F5", "Z6".
  static RingDescriptor parse(std::string_view s) {
    if (s == "Q") return rationals();
    if (s.size() < 2 || (s[0] != 'F' && s[0] != 'Z'))
      throw input_error("bad ring descriptor '" + std::string(s) + "'");
    std::uint64_t m = 0;
    for (char c : s.substr(1)) {
      if (c < '0' || c > '9' || m > 1'000'000)
        throw input_error("bad ring descriptor '" + std::string(s) + "'");
      m = m * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return s[0] == 'F' ? prime_field(static_cast<std::uint32_t>(m))
                       : int_mod(static_cast<std::uint32_t>(m));
  }

  RingKind kind() const { return kind_; }
  std::uint32_t modulus() const { return modulus_; }
  bool is_finite() const { return kind_ != RingKind::rationals; }
  bool is_field() const { return kind_ != RingKind::int_mod_m; }
  bool is_integral_domain() const { return is_field(); }
  /// Number of elements; 0 for the rationals.
  std::uint64_t size() const { return modulus_; }
  std::uint64_t characteristic() const { return modulus_; }

  std::string to_string() const {
    switch (kind_) {
      case RingKind::rationals: return "Q";
      case RingKind::prime_field: return "F" + std::to_string(modulus_);
      case RingKind::int_mod_m: return "Z" + std::to_string(modulus_);
    }
    return "?";
  }

  friend bool operator==(const RingDescriptor&, const RingDescriptor&) = default;

 private:
  RingDescriptor(RingKind k, std::uint32_t m) : kind_(k), modulus_(m) {}
  RingKind kind_;
  std::uint32_t modulus_;
};

class Coefficient {
 public:
  static Coefficient zero(const RingDescriptor& r) { return from_int(r, 0); }
  static Coefficient one(const RingDescriptor& r) { return from_int(r, 1); }

  static Coefficient from_int(const RingDescriptor& r, std::int64_t v) {
    if (r.kind() == RingKind::rationals) return Coefficient(r, Rational(v));
    return Coefficient(r, detail::mod_floor(v, r.modulus()));
  }

  static Coefficient from_rational(const RingDescriptor& r, const Rational& q) {
    if (r.kind() == RingKind::rationals) return Coefficient(r, q);
    auto num = from_int(r, static_cast<std::int64_t>(
                               boost::multiprecision::numerator(q) % r.modulus()));
    auto den = from_int(r, static_cast<std::int64_t>(
                               boost::multiprecision::denominator(q) % r.modulus()));
    auto inv = den.try_inverse();
    if (!inv) throw input_error("denominator not invertible in " + r.to_string());
    return num * *inv;
  }

  /// Parses the canonical string form: "3" for residues, "-5/6" for rationals.
  /// Residue strings may be any integer and are reduced.
  static Coefficient parse(const RingDescriptor& r, std::string_view s) {
    try {
      if (r.kind() == RingKind::rationals) return Coefficient(r, Rational(std::string(s)));
      Rational q{std::string(s)};
      return from_rational(r, q);
    } catch (const input_error&) {
      throw;
    } catch (const std::exception&) {
      throw input_error("bad coefficient '" + std::string(s) + "' for " + r.to_string());
    }
  }

  const RingDescriptor& ring() const { return ring_; }
  bool is_zero() const {
    if (auto* q = std::get_if<Rational>(&value_)) return *q == 0;
    return std::get<std::int64_t>(value_) == 0;
  }
  bool is_one() const {
    if (auto* q = std::get_if<Rational>(&value_)) return *q == 1;
    return std::get<std::int64_t>(value_) == 1;
  }

  /// Residue representative in [0, m).  Only for finite rings.
  std::int64_t residue() const { return std::get<std::int64_t>(value_); }
  const Rational& rational() const { return std::get<Rational>(value_); }

  Coefficient operator+(const Coefficient& o) const {
    check(o);
    if (ring_.kind() == RingKind::rationals) return Coefficient(ring_, rational() + o.rational());
    return Coefficient(ring_, (residue() + o.residue()) % ring_.modulus());
  }
  Coefficient operator-(const Coefficient& o) const {
    check(o);
    if (ring_.kind() == RingKind::rationals) return Coefficient(ring_, rational() - o.rational());
    return Coefficient(ring_, detail::mod_floor(residue() - o.residue(), ring_.modulus()));
  }
  Coefficient operator-() const {
    if (ring_.kind() == RingKind::rationals) return Coefficient(ring_, Rational(-rational()));
    return Coefficient(ring_, detail::mod_floor(-residue(), ring_.modulus()));
  }
  Coefficient operator*(const Coefficient& o) const {
    check(o);
    if (ring_.kind() == RingKind::rationals) return Coefficient(ring_, rational() * o.rational());
    return Coefficient(ring_, (residue() * o.residue()) % ring_.modulus());
  }
  Coefficient& operator+=(const Coefficient& o) { return *this = *this + o; }
  Coefficient& operator-=(const Coefficient& o) { return *this = *this - o; }
  Coefficient& operator*=(const Coefficient& o) { return *this = *this * o; }

  /// The inverse when this is a unit, std::nullopt otherwise.
  std::optional<Coefficient> try_inverse() const {
    if (ring_.kind() == RingKind::rationals) {
      if (rational() == 0) return std::nullopt;
      return Coefficient(ring_, Rational(1 / rational()));
    }
    // extended Euclid on (a, m)
    std::int64_t m = ring_.modulus(), a = residue();
    std::int64_t old_r = a, r = m, old_s = 1, s = 0;
    while (r != 0) {
      auto q = old_r / r;
      old_r -= q * r;
      std::swap(old_r, r);
      old_s -= q * s;
      std::swap(old_s, s);
    }
    if (old_r != 1) return std::nullopt;
    return Coefficient(ring_, detail::mod_floor(old_s, m));
  }
  bool is_unit() const { return try_inverse().has_value(); }

  Coefficient inverse() const {
    auto inv = try_inverse();
    if (!inv) throw precondition_error(to_string() + " is not a unit in " + ring_.to_string());
    return *inv;
  }

  std::string to_string() const {
    if (ring_.kind() == RingKind::rationals) return rational().str();
    return std::to_string(residue());
  }

  std::size_t hash() const {
    if (ring_.kind() == RingKind::rationals) return std::hash<std::string>{}(rational().str());
    return std::hash<std::int64_t>{}(residue());
  }

  friend bool operator==(const Coefficient& a, const Coefficient& b) {
    return a.ring_ == b.ring_ && a.value_ == b.value_;
  }
  friend std::ostream& operator<<(std::ostream& os, const Coefficient& c) {
    return os << c.to_string();
  }

 private:
  Coefficient(const RingDescriptor& r, Rational q) : ring_(r), value_(std::move(q)) {}
  Coefficient(const RingDescriptor& r, std::int64_t v) : ring_(r), value_(v) {}

  void check(const Coefficient& o) const {
    if (!(ring_ == o.ring_))
      throw context_mismatch("ring mismatch: " + ring_.to_string() + " vs " + o.ring_.to_string());
  }

  RingDescriptor ring_;
  std::variant<std::int64_t, Rational> value_;
};

/// All elements of a finite ring in residue order.
inline std::vector<Coefficient> ring_elements(const RingDescriptor& r) {
  if (!r.is_finite()) throw precondition_error("cannot enumerate the infinite ring Q");
  std::vector<Coefficient> out;
  out.reserve(r.size());
  for (std::uint64_t v = 0; v < r.size(); ++v)
    out.push_back(Coefficient::from_int(r, static_cast<std::int64_t>(v)));
  return out;
}

inline std::vector<Coefficient> units(const RingDescriptor& r) {
  std::vector<Coefficient> out;
  for (auto& c : ring_elements(r))
    if (c.is_unit()) out.push_back(c);
  return out;
}

inline std::vector<Coefficient> idempotents(const RingDescriptor& r) {
  std::vector<Coefficient> out;
  for (auto& c : ring_elements(r))
    if (c * c == c) out.push_back(c);
  return out;
}

/// Idempotents of R, valid for every supported ring (Q has only 0 and 1).
inline std::vector<Coefficient> ring_idempotents(const RingDescriptor& r) {
  if (!r.is_finite()) return {Coefficient::zero(r), Coefficient::one(r)};
  return idempotents(r);
}

struct WtVerdict {
  bool holds = true;
  // (lambda, e): lambda != 0, e a nonzero idempotent, lambda * e == 0.
  std::optional<std::pair<Coefficient, Coefficient>> witness;
};

/// Without-torsion check for D = A_R(G^(0)).  Idempotents of D are the
/// idempotent-valued functions on units, so the check reduces to R itself.
inline WtVerdict wt_check(const RingDescriptor& r) {
  if (r.is_integral_domain()) return {};
  auto idem = idempotents(r);
  for (auto& lambda : ring_elements(r)) {
    if (lambda.is_zero()) continue;
    for (auto& e : idem) {
      if (e.is_zero()) continue;
      if ((lambda * e).is_zero()) return {false, std::make_pair(lambda, e)};
    }
  }
  return {};
}

}  // namespace cartan_lab

template <>
struct std::hash<cartan_lab::Coefficient> {
  std::size_t operator()(const cartan_lab::Coefficient& c) const { return c.hash(); }
};
