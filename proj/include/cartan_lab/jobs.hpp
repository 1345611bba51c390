#pragma once

// Job specs: a context, a command and options, with an optional expected
// verdict.  run_job turns them into a report and an exit status.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cartan_lab/expectation.hpp"
#include "cartan_lab/inclusions.hpp"
#include "cartan_lab/io.hpp"
#include "cartan_lab/random.hpp"
#include "cartan_lab/reconstruct.hpp"

namespace cartan_lab {

enum ExitCode : int { exit_ok = 0, exit_mismatch = 1, exit_input = 2, exit_guard = 3 };

inline const std::vector<std::string>& job_commands() {
  static const std::vector<std::string> cmds{"validate",   "classify",  "galois",   "reconstruct", "pqc-scan",
                                             "two-arrows", "bad-apple", "bimodule", "average",     "obstruct"};
  return cmds;
}

struct JobResult {
  int exit_code = exit_ok;
  io::json report;
};

namespace jobs {

using io::json;

inline json opt(const json& options, const char* key) {
  return options.is_object() && options.contains(key) ? options.at(key) : json();
}

inline std::uint64_t opt_uint(const json& options, const char* key, std::uint64_t dflt) {
  auto v = opt(options, key);
  if (v.is_null()) return dflt;
  if (!v.is_number_unsigned() && !v.is_number_integer()) throw input_error(std::string("option ") + key + " must be an integer");
  return v.get<std::uint64_t>();
}

inline json flag(const std::optional<bool>& f) { return f ? json(*f) : json("skipped"); }

inline json report_to_json(const InclusionReport& r) {
  json flags = {{"WT", flag(r.wt)},
                {"regular", flag(r.regular)},
                {"delta_faithful", flag(r.delta_faithful)},
                {"delta_idempotent_implemented", flag(r.idempotent_implemented)},
                {"maximal_abelian", flag(r.maximal_abelian)},
                {"free_span", flag(r.free_span)},
                {"LBH", flag(r.lbh)}};
  json wit = json::object();
  for (const auto& [k, w] : r.witnesses) wit[k] = {{"description", w.description}, {"elements", io::elements_to_json(w.elements)}};
  if (r.wt_witness)
    wit["WT"] = {{"description", "lambda * mu = 0 with lambda, mu nonzero and mu idempotent"},
                 {"pair", {r.wt_witness->first.to_string(), r.wt_witness->second.to_string()}}};
  json out = {{"verdict", to_string(r.verdict)},
              {"flags", flags},
              {"witnesses", wit},
              {"normalizer_count", r.normalizer_count},
              {"dim", r.dim},
              {"monotone", r.monotone}};
  if (!r.skipped.empty()) out["skipped"] = r.skipped;
  if (r.c_basis) out["c_basis"] = io::basis_to_json(*r.c_basis);
  if (r.coordinate) out["coordinate"] = io::arrow_set_to_json(*r.coordinate);
  return out;
}

inline ContextPtr context_of(const json& job) {
  if (!job.contains("context")) throw input_error("job: missing \"context\"");
  return io::context_from_json(job.at("context"));
}

inline json cmd_validate(const json& job, int& code) {
  const auto& c = job.at("context");
  if (!c.contains("groupoid")) throw input_error("context: missing \"groupoid\"");
  const auto& gj = c.at("groupoid");
  json out;
  if (gj.is_object() && !gj.contains("build")) {
    auto t = io::tables_from_json(gj);
    auto v = check_axioms(t);
    if (!v.valid) {
      code = exit_input;
      return {{"verdict", "invalid"}, {"violation", v.violation}, {"witness", v.witness}};
    }
  }
  auto g = io::groupoid_from_json(gj);
  auto p = predicates(g);
  out = {{"verdict", "valid"},
         {"arrows", g.size()},
         {"units", g.num_units()},
         {"principal", p.principal},
         {"effective", p.effective},
         {"effective_note", "finite discrete: effective coincides with principal"},
         {"i2i", p.i2i},
         {"iso_sizes", p.iso_sizes}};
  if (c.contains("ring")) {
    auto r = io::ring_from_json(c.at("ring"));
    auto w = io::cocycle_from_json(c.contains("cocycle") ? c.at("cocycle") : json(), g, r);
    auto cv = validate_cocycle(g, w);
    out["cocycle"] = {{"valid", cv.valid}, {"violation", cv.violation}, {"witness", cv.witness}};
    if (!cv.valid) {
      out["verdict"] = "invalid";
      code = exit_input;
    }
  }
  return out;
}

inline json cmd_classify(const ContextPtr& ctx, const json& options, const Guards& guards) {
  auto sub = opt(options, "subalgebra");
  InclusionReport r;
  if (sub.is_object() && sub.contains("coordinate")) {
    r = classify_coordinate(ctx, io::arrow_set_from_json(ctx->groupoid, sub.at("coordinate")), nullptr, guards);
  } else if (sub.is_object() && sub.contains("generators")) {
    if (!ctx->ring.is_field()) throw precondition_error("generated subalgebras need field coefficients");
    std::vector<AlgebraElement> gens = diagonal_basis(ctx);
    for (const auto& e : sub.at("generators")) gens.push_back(io::element_from_json(ctx, e));
    r = classify(Basis::algebra_of(ctx, gens), nullptr, guards);
  } else if (sub.is_object() && sub.contains("span")) {
    if (!ctx->ring.is_field()) throw precondition_error("spanned subalgebras need field coefficients");
    std::vector<AlgebraElement> gens;
    for (const auto& e : sub.at("span")) gens.push_back(io::element_from_json(ctx, e));
    r = classify(Basis::span_of(ctx, gens), nullptr, guards);
  } else if (sub.is_null()) {
    r = classify_coordinate(ctx, ctx->groupoid.all_arrows(), nullptr, guards);
  } else {
    throw input_error("subalgebra must have \"coordinate\", \"generators\" or \"span\"");
  }
  return report_to_json(r);
}

inline json cmd_galois(const ContextPtr& ctx, const json& options, const Guards& guards) {
  auto lr = galois(ctx, guards);
  json wide = json::array(), algs = json::array();
  for (const auto& h : lr.wide) wide.push_back(io::arrow_set_to_json(h));
  for (const auto& c : lr.algebras)
    algs.push_back({{"basis", io::basis_to_json(c)}, {"G_C", io::arrow_set_to_json(groupoid_of(c))}, {"dim", c.dim()}});
  json out = {{"verdict", lr.isomorphism() ? "isomorphism" : "failure"},
              {"wide_subgroupoids", wide},
              {"quasi_cartan_subalgebras", algs},
              {"H_to_C", lr.h_to_c},
              {"C_to_H", lr.c_to_h},
              {"meet", lr.meet},
              {"join", lr.join},
              {"closures_scanned", lr.closures_scanned},
              {"saturation_added", lr.saturation_added},
              {"failures", lr.failures},
              {"scope", "singly-generated"}};
  if (opt(options, "census").is_boolean() && opt(options, "census").get<bool>()) {
    auto sc = subspace_census(ctx, guards);
    bool agree = sc.quasi_cartan.size() == lr.algebras.size();
    for (const auto& b : sc.quasi_cartan)
      agree = agree && std::any_of(lr.algebras.begin(), lr.algebras.end(), [&](const Basis& x) { return x == b; });
    out["census"] = {{"subspaces", sc.subspaces},
                     {"subalgebras", sc.subalgebras},
                     {"quasi_cartan", sc.quasi_cartan.size()},
                     {"agrees", agree}};
    if (!agree) out["verdict"] = "failure";
  }
  return out;
}

inline json cmd_reconstruct(const ContextPtr& ctx, const Guards& guards) {
  auto cat = NormalizerCatalog::build(ctx, guards);
  auto cls = classify_coordinate(ctx, ctx->groupoid.all_arrows(), &cat, guards);
  if (!is_quasi_cartan(cls.verdict))
    throw precondition_error("reconstruction needs a quasi-Cartan pair; classification is " + to_string(cls.verdict));
  auto ug = ultrafilter_groupoid(cat);
  auto phi = phi_map(cat, ug);
  auto v = phi_check(ctx->groupoid, ug.g_prime, phi);
  auto vs = phi_sigma_check(cat, ug, phi);
  json minima = json::array();
  for (auto i : ug.minima) minima.push_back(io::element_to_json(cat[i].n));
  json phi_table = json::object();
  for (ArrowId a = 0; a < phi.size(); ++a) phi_table[std::to_string(a)] = phi[a];
  return {{"verdict", v.isomorphism && vs.isomorphism ? "isomorphism" : "mismatch"},
          {"classification", to_string(cls.verdict)},
          {"normalizers", cat.size()},
          {"minimal_elements", minima},
          {"sigma_prime_size", ug.sigma_prime.size()},
          {"g_prime_size", ug.g_prime.arrows.size()},
          {"units_size", units(ctx->ring).size()},
          {"phi", phi_table},
          {"phi_G", {{"isomorphism", v.isomorphism}, {"failure", v.failure}, {"witness", v.witness}}},
          {"phi_Sigma", {{"isomorphism", vs.isomorphism}, {"failure", vs.failure}, {"witness", vs.witness}}}};
}

inline json cmd_pqc(const ContextPtr& ctx, const json& options, const Guards& guards) {
  bool first = opt(options, "stop_at_first").is_boolean() && opt(options, "stop_at_first").get<bool>();
  auto res = pqc_scan(ctx, guards, first);
  json fails = json::array();
  for (const auto& f : res.failures)
    fails.push_back({{"generator", io::element_to_json(f.generator)},
                     {"basis", io::basis_to_json(f.basis)},
                     {"verdict", to_string(f.report.verdict)}});
  json out = {{"verdict", res.pure ? "pure" : "failure"},
              {"scope", res.scope},
              {"generators_covered", res.generators_covered},
              {"canonical_generators", res.canonical_generators},
              {"distinct_closures", res.distinct_closures},
              {"failure_count", res.failures.size()},
              {"failures", fails},
              {"i2i", res.i2i},
              {"comparison_applies", res.comparison_applies},
              {"agrees_with_i2i", res.agrees_with_i2i}};
  if (!res.failures.empty()) out["first_failure"] = fails[0];
  return out;
}

inline json cmd_two_arrows(const ContextPtr& ctx, const Guards& guards) {
  auto t = counterexample_two_arrows(ctx, guards);
  bool ok = t.f_squared_zero && t.equal_values_on_basis && t.not_coordinate && !is_quasi_cartan(t.report.verdict);
  return {{"verdict", to_string(t.report.verdict)},
          {"checks_pass", ok},
          {"gamma", {t.gamma1, t.gamma2}},
          {"f", io::element_to_json(t.f)},
          {"f_squared_zero", t.f_squared_zero},
          {"equal_values_on_basis", t.equal_values_on_basis},
          {"not_coordinate", t.not_coordinate},
          {"classification", report_to_json(t.report)}};
}

inline json cmd_bad_apple(const ContextPtr& ctx, const json& options, const Guards& guards) {
  std::optional<ArrowId> v;
  if (!opt(options, "unit").is_null()) v = opt(options, "unit").get<ArrowId>();
  auto b = counterexample_bad_apple(ctx, v, guards);
  bool closure = bad_apple_closure_exhaustive(b, guards);
  bool ok = b.a_closed && closure && b.a_unital && b.a_covers && b.delta_s0_outside && b.c_proper_in_a_gc &&
            !is_quasi_cartan(b.report.verdict);
  auto n = std::int64_t(b.gamma.size());
  return {{"verdict", to_string(b.report.verdict)},
          {"checks_pass", ok},
          {"unit", b.v},
          {"cyclic_subgroup", b.gamma},
          {"sigma_squared", {{"coefficient_on_unit", b.coeff_v.to_string()}, {"coefficient_on_sigma", b.coeff_sigma.to_string()}}},
          {"coefficient_audit",
           {{"n", n},
            {"n_minus_1", Coefficient::from_int(ctx->ring, n - 1).to_string()},
            {"n_minus_2", Coefficient::from_int(ctx->ring, n - 2).to_string()},
            {"sigma_coefficient_is_n_minus_2", b.coeff_sigma == Coefficient::from_int(ctx->ring, n - 2)}}},
          {"a_closed", b.a_closed},
          {"a_closed_exhaustive", closure},
          {"a_covers", b.a_covers},
          {"delta_s0_outside", b.delta_s0_outside},
          {"G_C", io::arrow_set_to_json(b.g_c)},
          {"c_proper_in_A_GC", b.c_proper_in_a_gc},
          {"classification", report_to_json(b.report)}};
}

inline json cmd_bimodule(const ContextPtr& ctx, const json& options) {
  std::vector<AlgebraElement> cs;
  if (!opt(options, "element").is_null()) cs.push_back(io::element_from_json(ctx, opt(options, "element")));
  auto trials = opt_uint(options, "trials", cs.empty() ? 100 : 0);
  Rng rng(opt_uint(options, "seed", 1));
  for (std::uint64_t i = 0; i < trials; ++i) cs.push_back(random_element(ctx, rng));
  bool all = true;
  json first_fail;
  std::size_t fails = 0;
  for (const auto& c : cs) {
    auto r = bimodule_spectral(c);
    if (r.spectral) continue;
    ++fails;
    if (all) {
      json rel = json::object();
      for (const auto& [a, l] : r.relation) rel[std::to_string(a)] = l.to_string();
      first_fail = {{"c", io::element_to_json(c)}, {"support", io::arrow_set_to_json(r.support)}, {"bimodule_dim", r.dim},
                    {"relation", rel}};
    }
    all = false;
  }
  json out = {{"verdict", all ? "spectral" : "synthesis-fails"},
              {"elements_tested", cs.size()},
              {"failures", fails},
              {"principal", predicates(ctx->groupoid).principal}};
  if (!all) out["witness"] = first_fail;
  return out;
}

inline json cmd_average(const ContextPtr& ctx, const json& options) {
  std::vector<AlgebraElement> fs;
  if (!opt(options, "element").is_null()) fs.push_back(io::element_from_json(ctx, opt(options, "element")));
  auto trials = opt_uint(options, "trials", fs.empty() ? 100 : 0);
  Rng rng(opt_uint(options, "seed", 1));
  for (std::uint64_t i = 0; i < trials; ++i) fs.push_back(random_element(ctx, rng));
  std::size_t equal = 0;
  json first;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::optional<AverageResult> res;
    try {
      res = average_expectation(fs[i]);
    } catch (const consistency_failure&) {
      res.reset();
    }
    bool ok = res && res->equals_delta;
    if (ok) ++equal;
    if (i == 0 && ok) {
      json pieces = json::array();
      for (const auto& p : res->pieces)
        pieces.push_back({{"support", io::arrow_set_to_json(p.support)}, {"value", p.value.to_string()}, {"in_units", p.in_units}});
      first = {{"f", io::element_to_json(fs[i])},
               {"average", io::element_to_json(res->value)},
               {"k", res->k},
               {"family", io::elements_to_json(res->family.members)},
               {"decomposition", pieces}};
    }
  }
  json out = {{"verdict", equal == fs.size() ? "equal" : "unequal"}, {"elements_tested", fs.size()}, {"equal_count", equal}};
  if (!first.is_null()) out["first"] = first;
  return out;
}

inline json cmd_obstruct(const ContextPtr& ctx, const json& options, const Guards& guards) {
  AlgebraElement f = AlgebraElement::zero(ctx);
  if (!opt(options, "element").is_null()) {
    f = io::element_from_json(ctx, opt(options, "element"));
  } else {
    auto iso = nontrivial_isotropy(ctx->groupoid);
    if (iso.empty()) throw precondition_error("groupoid is principal; nothing to obstruct");
    f = AlgebraElement::delta(ctx, iso[0]) + AlgebraElement::delta(ctx, ctx->groupoid.tgt(iso[0]));
  }
  auto res = averaging_obstruction(f, opt_uint(options, "trials", 200), opt_uint(options, "seed", 1),
                                   opt_uint(options, "exhaustive_size", 2), guards);
  json out = {{"verdict", res.identity_holds && res.reproducing == 0 ? "obstructed" : "not-obstructed"},
              {"gamma", res.gamma},
              {"f", io::element_to_json(f)},
              {"random_families", res.random_families},
              {"exhaustive_families", res.exhaustive_families},
              {"identity_holds", res.identity_holds},
              {"reproducing", res.reproducing}};
  if (res.reproducing_witness) out["reproducing_witness"] = io::elements_to_json(*res.reproducing_witness);
  if (res.identity_witness) out["identity_witness"] = io::elements_to_json(*res.identity_witness);
  return out;
}

/// Expectation check: a verdict string, or an object of top-level fields.
inline std::optional<std::string> expectation_mismatch(const json& expect, const json& report) {
  if (expect.is_null()) return std::nullopt;
  if (expect.is_string()) {
    if (report.value("verdict", "") == expect.get<std::string>()) return std::nullopt;
    return "expected verdict " + expect.get<std::string>() + ", got " + report.value("verdict", "");
  }
  if (!expect.is_object()) throw input_error("expect must be a verdict string or an object");
  for (const auto& [k, v] : expect.items()) {
    auto ptr = json::json_pointer(k.front() == '/' ? k : "/" + k);
    if (!report.contains(ptr)) return "expected field " + k + " missing from report";
    if (report.at(ptr) != v) return "expected " + k + " = " + v.dump() + ", got " + report.at(ptr).dump();
  }
  return std::nullopt;
}

}  // namespace jobs

/// Runs one job.  Errors become exit codes and an "error" field; the report
/// always carries the schema version and the guard settings.
inline JobResult run_job(const io::json& job, std::optional<Guards> guard_override = std::nullopt) {
  using io::json;
  JobResult res;
  json& out = res.report;
  out["schema_version"] = io::schema_version;
  try {
    if (!job.is_object()) throw input_error("job must be a JSON object");
    auto command = io::detail::get<std::string>(job, "command", "job");
    out["command"] = command;
    if (job.contains("name")) out["name"] = job.at("name");
    const auto options = job.contains("options") ? job.at("options") : json::object();
    Guards guards = guard_override ? *guard_override : io::guards_from_json(jobs::opt(options, "guards"));
    out["guards"] = io::guards_to_json(guards);
    out["scope_tags"] = {"singly-generated", "normalized-cocycle"};
    int code = exit_ok;
    json body;
    if (command == "validate") {
      if (!job.contains("context")) throw input_error("job: missing \"context\"");
      body = jobs::cmd_validate(job, code);
    } else {
      auto ctx = jobs::context_of(job);
      out["context_hash"] = io::context_hash(*ctx);
      out["context"] = {{"ring", ctx->ring.to_string()}, {"arrows", ctx->size()}, {"units", ctx->groupoid.num_units()},
                        {"twist", ctx->omega.is_trivial() ? "trivial" : "cocycle"}};
      if (command == "classify") body = jobs::cmd_classify(ctx, options, guards);
      else if (command == "galois") body = jobs::cmd_galois(ctx, options, guards);
      else if (command == "reconstruct") body = jobs::cmd_reconstruct(ctx, guards);
      else if (command == "pqc-scan") body = jobs::cmd_pqc(ctx, options, guards);
      else if (command == "two-arrows") body = jobs::cmd_two_arrows(ctx, guards);
      else if (command == "bad-apple") body = jobs::cmd_bad_apple(ctx, options, guards);
      else if (command == "bimodule") body = jobs::cmd_bimodule(ctx, options);
      else if (command == "average") body = jobs::cmd_average(ctx, options);
      else if (command == "obstruct") body = jobs::cmd_obstruct(ctx, options, guards);
      else throw input_error("unknown command \"" + command + "\"");
    }
    for (auto& [k, v] : body.items()) out[k] = v;
    if (code == exit_ok && job.contains("expect")) {
      auto miss = jobs::expectation_mismatch(job.at("expect"), out);
      out["expectation"] = miss ? json{{"met", false}, {"detail", *miss}} : json{{"met", true}};
      if (miss) code = exit_mismatch;
    }
    res.exit_code = code;
  } catch (const guard_exceeded& e) {
    out["error"] = {{"kind", "guard"}, {"message", e.what()}};
    res.exit_code = exit_guard;
  } catch (const consistency_failure& e) {
    out["error"] = {{"kind", "consistency"}, {"message", e.what()}};
    res.exit_code = exit_mismatch;
  } catch (const std::exception& e) {
    // input_error, precondition_error, context_mismatch and JSON errors
    out["error"] = {{"kind", "input"}, {"message", e.what()}};
    res.exit_code = exit_input;
  }
  return res;
}

inline io::json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw input_error("cannot open " + p.string());
  try {
    return io::json::parse(in);
  } catch (const io::json::parse_error& e) {
    throw input_error(p.string() + ": " + e.what());
  }
}

struct CorpusEntry {
  std::string file;
  std::string command;
  int exit_code;
  int expected_exit;
  bool pass;
  std::string detail;
};

struct CorpusSummary {
  std::vector<CorpusEntry> entries;
  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const CorpusEntry& e) { return e.pass; });
  }
};

/// Runs every *.json job in dir in filename order.  A job passes when its
/// exit status equals "expect_exit" (default 0).
inline CorpusSummary run_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw input_error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  CorpusSummary s;
  for (const auto& f : files) {
    CorpusEntry e{f.filename().string(), "", exit_input, exit_ok, false, ""};
    try {
      auto job = read_json_file(f);
      e.expected_exit = job.value("expect_exit", int(exit_ok));
      auto r = run_job(job);
      e.command = r.report.value("command", "");
      e.exit_code = r.exit_code;
      if (r.report.contains("error")) e.detail = r.report["error"].value("message", "");
      else if (r.report.contains("expectation") && !r.report["expectation"].value("met", true))
        e.detail = r.report["expectation"].value("detail", "");
      else e.detail = r.report.value("verdict", "");
    } catch (const std::exception& ex) {
      e.detail = ex.what();
    }
    e.pass = e.exit_code == e.expected_exit;
    s.entries.push_back(std::move(e));
  }
  return s;
}

}  // namespace cartan_lab
