#pragma once

// JSON forms of groupoids, rings, cocycles and elements, and the context
// hash stamped on every report.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "cartan_lab/config.hpp"
#include "cartan_lab/groupoid.hpp"
#include "cartan_lab/steinberg.hpp"
#include "cartan_lab/twist.hpp"

namespace cartan_lab::io {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

namespace detail {

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw input_error(where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw input_error(where + ": bad \"" + key + "\": " + e.what());
  }
}

}  // namespace detail

/// {"table": [[...]]} or {"cyclic": n}.
inline GroupTable group_table_from_json(const json& j, const std::string& where) {
  if (j.is_object() && j.contains("cyclic")) return cyclic_table(detail::get<std::size_t>(j, "cyclic", where));
  if (j.is_object() && j.contains("table")) return detail::get<GroupTable>(j, "table", where);
  if (j.is_array()) return j.get<GroupTable>();
  throw input_error(where + ": group needs \"table\" or \"cyclic\"");
}

inline GroupoidTables tables_from_json(const json& j) {
  GroupoidTables t;
  t.units = detail::get<std::vector<ArrowId>>(j, "units", "groupoid");
  const auto& arrows = j.at("arrows");
  if (!arrows.is_array()) throw input_error("groupoid: \"arrows\" must be a list");
  for (std::size_t i = 0; i < arrows.size(); ++i) {
    const auto& a = arrows[i];
    if (a.is_array() && a.size() == 2)
      t.arrows.push_back({ArrowId(i), a[0].get<ArrowId>(), a[1].get<ArrowId>()});
    else
      t.arrows.push_back({detail::get<ArrowId>(a, "id", "arrow"), detail::get<ArrowId>(a, "src", "arrow"),
                          detail::get<ArrowId>(a, "tgt", "arrow")});
  }
  const auto n = t.arrows.size();
  auto comp = detail::get<std::vector<std::vector<std::int64_t>>>(j, "comp", "groupoid");
  if (comp.size() != n) throw input_error("groupoid: comp must have one row per arrow");
  for (const auto& row : comp) {
    if (row.size() != n) throw input_error("groupoid: comp rows must have one entry per arrow");
    t.comp.insert(t.comp.end(), row.begin(), row.end());
  }
  t.inv = detail::get<std::vector<std::int64_t>>(j, "inv", "groupoid");
  return t;
}

inline FiniteGroupoid groupoid_from_json(const json& j);

inline FiniteGroupoid build_from_json(const json& b) {
  auto kind = detail::get<std::string>(b, "kind", "build");
  if (kind == "pair") return build_pair(detail::get<std::size_t>(b, "n", "pair"));
  if (kind == "cyclic") return build_cyclic(detail::get<std::size_t>(b, "n", "cyclic"));
  if (kind == "group") return build_group(group_table_from_json(b, "group"));
  if (kind == "sign_flip") return build_sign_flip(detail::get<std::size_t>(b, "k", "sign_flip"));
  if (kind == "action") {
    if (!b.contains("group")) throw input_error("action: missing \"group\"");
    return build_action(group_table_from_json(b.at("group"), "action group"),
                        detail::get<std::vector<std::vector<std::int64_t>>>(b, "action", "action"));
  }
  if (kind == "disjoint_union") {
    if (!b.contains("parts") || !b.at("parts").is_array()) throw input_error("disjoint_union: missing \"parts\"");
    std::vector<FiniteGroupoid> parts;
    for (const auto& p : b.at("parts")) parts.push_back(groupoid_from_json(p));
    return build_disjoint_union(parts);
  }
  if (kind == "product") {
    if (!b.contains("left") || !b.contains("right")) throw input_error("product: needs \"left\" and \"right\"");
    return build_product(groupoid_from_json(b.at("left")), groupoid_from_json(b.at("right")));
  }
  if (kind == "attach_isotropy") {
    if (!b.contains("base") || !b.contains("group")) throw input_error("attach_isotropy: needs \"base\" and \"group\"");
    return build_attach_isotropy(groupoid_from_json(b.at("base")), detail::get<ArrowId>(b, "unit", "attach_isotropy"),
                                 group_table_from_json(b.at("group"), "attach_isotropy group"));
  }
  throw input_error("unknown groupoid kind \"" + kind + "\"");
}

/// Explicit tables or {"build": {...}}.  Always validated.
inline FiniteGroupoid groupoid_from_json(const json& j) {
  if (!j.is_object()) throw input_error("groupoid must be an object");
  if (j.contains("build")) return build_from_json(j.at("build"));
  return FiniteGroupoid::from_tables(tables_from_json(j));
}

inline json tables_to_json(const GroupoidTables& t) {
  json arrows = json::array();
  for (const auto& a : t.arrows) arrows.push_back({a.src, a.tgt});
  const auto n = t.arrows.size();
  json comp = json::array();
  for (std::size_t i = 0; i < n; ++i)
    comp.push_back(std::vector<std::int64_t>(t.comp.begin() + std::ptrdiff_t(i * n), t.comp.begin() + std::ptrdiff_t((i + 1) * n)));
  return {{"units", t.units}, {"arrows", arrows}, {"comp", comp}, {"inv", t.inv}};
}

inline json groupoid_to_json(const FiniteGroupoid& g) { return tables_to_json(g.tables()); }

inline RingDescriptor ring_from_json(const json& j) {
  if (!j.is_string()) throw input_error("ring must be a string such as \"Q\", \"F5\" or \"Z6\"");
  return RingDescriptor::parse(j.get<std::string>());
}

inline std::string coeff_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw input_error("coefficient must be a string or an integer");
}

/// Sparse list of {a, b, value}; "trivial" or absent means omega = 1.
inline Cocycle cocycle_from_json(const json& j, const FiniteGroupoid& g, const RingDescriptor& r) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "trivial")) return Cocycle::trivial(g, r);
  if (!j.is_array()) throw input_error("cocycle must be \"trivial\" or a list of {a, b, value}");
  std::vector<Cocycle::Entry> es;
  for (const auto& e : j) {
    if (!e.contains("value")) throw input_error("cocycle entry needs a value");
    es.push_back({detail::get<ArrowId>(e, "a", "cocycle entry"), detail::get<ArrowId>(e, "b", "cocycle entry"),
                  Coefficient::parse(r, coeff_string(e.at("value")))});
  }
  return Cocycle::from_entries(g, r, es);
}

inline json cocycle_to_json(const Cocycle& w) {
  if (w.is_trivial()) return "trivial";
  json out = json::array();
  for (const auto& e : w.entries()) out.push_back({{"a", e.a}, {"b", e.b}, {"value", e.value.to_string()}});
  return out;
}

/// {"groupoid": ..., "ring": ..., "cocycle": ...}; the cocycle is validated.
inline ContextPtr context_from_json(const json& j) {
  if (!j.is_object()) throw input_error("context must be an object");
  if (!j.contains("groupoid")) throw input_error("context: missing \"groupoid\"");
  if (!j.contains("ring")) throw input_error("context: missing \"ring\"");
  auto g = groupoid_from_json(j.at("groupoid"));
  auto r = ring_from_json(j.at("ring"));
  auto w = cocycle_from_json(j.contains("cocycle") ? j.at("cocycle") : json(), g, r);
  return make_context(std::move(g), r, std::move(w));
}

inline json context_to_json(const Context& ctx) {
  return {{"groupoid", groupoid_to_json(ctx.groupoid)}, {"ring", ctx.ring.to_string()}, {"cocycle", cocycle_to_json(ctx.omega)}};
}

/// FNV-1a over the canonical JSON dump of the resolved context.
inline std::string context_hash(const Context& ctx) {
  auto s = context_to_json(ctx).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// {"arrow id": "coefficient"}.
inline json element_to_json(const AlgebraElement& f) {
  json out = json::object();
  for (const auto& [a, c] : f.terms()) out[std::to_string(a)] = c.to_string();
  return out;
}

inline AlgebraElement element_from_json(const ContextPtr& ctx, const json& j) {
  if (!j.is_object()) throw input_error("element must be an object {arrow id: coefficient}");
  std::vector<AlgebraElement::Term> terms;
  for (const auto& [k, v] : j.items()) {
    std::size_t pos = 0;
    unsigned long id = 0;
    try {
      id = std::stoul(k, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != k.size() || k.empty()) throw input_error("element key \"" + k + "\" is not an arrow id");
    terms.emplace_back(ArrowId(id), Coefficient::parse(ctx->ring, coeff_string(v)));
  }
  return AlgebraElement::from_terms(ctx, std::move(terms));
}

inline json elements_to_json(const std::vector<AlgebraElement>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back(element_to_json(f));
  return out;
}

inline json arrow_set_to_json(const ArrowSet& s) {
  json out = json::array();
  for (auto a = s.find_first(); a != ArrowSet::npos; a = s.find_next(a)) out.push_back(a);
  return out;
}

inline ArrowSet arrow_set_from_json(const FiniteGroupoid& g, const json& j) {
  if (!j.is_array()) throw input_error("arrow set must be a list of ids");
  auto s = g.empty_set();
  for (const auto& a : j) {
    auto id = a.get<std::int64_t>();
    if (id < 0 || std::size_t(id) >= g.size()) throw input_error("arrow id " + std::to_string(id) + " out of range");
    s.set(std::size_t(id));
  }
  return s;
}

inline json guards_to_json(const Guards& g) {
  return {{"max_nonunit_arrows", g.max_nonunit_arrows}, {"max_scan", g.max_scan}, {"max_normalizers", g.max_normalizers},
          {"max_subspace_dim", g.max_subspace_dim}, {"max_generators", g.max_generators}};
}

inline Guards guards_from_json(const json& j, Guards g = {}) {
  if (j.is_null()) return g;
  if (!j.is_object()) throw input_error("guards must be an object");
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = detail::get<std::decay_t<decltype(field)>>(j, key, "guards");
  };
  take("max_nonunit_arrows", g.max_nonunit_arrows);
  take("max_scan", g.max_scan);
  take("max_normalizers", g.max_normalizers);
  take("max_subspace_dim", g.max_subspace_dim);
  take("max_generators", g.max_generators);
  return g;
}

inline json basis_to_json(const Basis& b) { return elements_to_json(b.vectors()); }

}  // namespace cartan_lab::io
