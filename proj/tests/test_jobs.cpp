#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cartan_lab/jobs.hpp"

using namespace cartan_lab;
using io::json;

namespace {

json built(json b) { return {{"build", std::move(b)}}; }

json context(json build, const std::string& ring) { return {{"groupoid", built(std::move(build))}, {"ring", ring}}; }

json job(const std::string& command, json ctx, json options = json::object()) {
  return {{"command", command}, {"context", std::move(ctx)}, {"options", std::move(options)}};
}

json z(int n) { return {{"kind", "cyclic"}, {"n", n}}; }
json pair(int n) { return {{"kind", "pair"}, {"n", n}}; }

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  void write(const std::string& file, const json& j) const { std::ofstream(path / file) << j.dump(2); }
};

}  // namespace

TEST(Jobs, CommandList) {
  auto cmds = job_commands();
  EXPECT_EQ(cmds.size(), 10u);
  EXPECT_NE(std::find(cmds.begin(), cmds.end(), "pqc-scan"), cmds.end());
}

TEST(Jobs, ClassifyF3Z2) {
  auto r = run_job(job("classify", context(z(2), "F3")));
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_EQ(r.report["verdict"], "AQP");
  EXPECT_EQ(r.report["flags"]["maximal_abelian"], false);
  EXPECT_EQ(r.report["flags"]["LBH"], true);
  EXPECT_EQ(r.report["schema_version"], io::schema_version);
  EXPECT_TRUE(r.report.contains("context_hash"));
  EXPECT_TRUE(r.report.contains("guards"));
  EXPECT_EQ(r.report["scope_tags"][0], "singly-generated");
}

TEST(Jobs, ClassifyF5Z3IsNotQuasiCartan) {
  auto r = run_job(job("classify", context(z(3), "F5")));
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_EQ(r.report["verdict"], "not-quasi-Cartan");
  EXPECT_EQ(r.report["flags"]["maximal_abelian"], false);
  EXPECT_EQ(r.report["flags"]["regular"], true);
  EXPECT_TRUE(r.report["witnesses"].contains("idempotent_implemented"));
}

TEST(Jobs, ClassifyWithoutTorsion) {
  auto r = run_job(job("classify", context(z(2), "Z6")));
  EXPECT_EQ(r.report["verdict"], "not-quasi-Cartan");
  EXPECT_EQ(r.report["flags"]["WT"], false);
  auto p = r.report["witnesses"]["WT"]["pair"];
  EXPECT_TRUE((p == json{"2", "3"}) || (p == json{"3", "2"}));
}

TEST(Jobs, ClassifySubalgebraForms) {
  auto k = context(z(3), "F5");
  auto span = run_job(job("classify", k, {{"subalgebra", {{"span", {{{"0", 1}}, {{"1", 1}, {"2", 1}}}}}}}));
  EXPECT_EQ(span.exit_code, exit_ok);
  EXPECT_EQ(span.report["verdict"], "not-quasi-Cartan");
  EXPECT_EQ(span.report["dim"], 2);
  auto gen = run_job(job("classify", k, {{"subalgebra", {{"generators", {{{"1", 1}, {"2", 1}}}}}}}));
  EXPECT_EQ(gen.report["dim"], 2);
  auto coord = run_job(job("classify", k, {{"subalgebra", {{"coordinate", {0}}}}}));
  EXPECT_EQ(coord.report["verdict"], "ADP");
  auto bad = run_job(job("classify", k, {{"subalgebra", {{"nonsense", 1}}}}));
  EXPECT_EQ(bad.exit_code, exit_input);
}

TEST(Jobs, ExpectationsDecideExitCode) {
  auto j = job("pqc-scan", context(z(3), "F5"));
  j["expect"] = "failure";
  EXPECT_EQ(run_job(j).exit_code, exit_ok);
  j["expect"] = "pure";
  auto r = run_job(j);
  EXPECT_EQ(r.exit_code, exit_mismatch);
  EXPECT_EQ(r.report["expectation"]["met"], false);

  auto c = job("classify", context(z(2), "F3"));
  c["expect"] = {{"/flags/LBH", true}, {"verdict", "AQP"}};
  EXPECT_EQ(run_job(c).exit_code, exit_ok);
  c["expect"] = {{"/flags/maximal_abelian", true}};
  EXPECT_EQ(run_job(c).exit_code, exit_mismatch);
  c["expect"] = {{"/no/such/field", 1}};
  EXPECT_EQ(run_job(c).exit_code, exit_mismatch);
  c["expect"] = 7;
  EXPECT_EQ(run_job(c).exit_code, exit_input);
}

TEST(Jobs, ValidateBrokenTable) {
  auto t = io::tables_to_json(build_pair(2).tables());
  t["comp"][0][0] = 1;
  auto r = run_job({{"command", "validate"}, {"context", {{"groupoid", t}}}});
  EXPECT_EQ(r.exit_code, exit_input);
  EXPECT_EQ(r.report["verdict"], "invalid");
  EXPECT_FALSE(r.report["witness"].empty());
  auto ok = run_job({{"command", "validate"}, {"context", {{"groupoid", io::tables_to_json(build_pair(2).tables())}}}});
  EXPECT_EQ(ok.exit_code, exit_ok);
  EXPECT_EQ(ok.report["verdict"], "valid");
  EXPECT_EQ(ok.report["principal"], true);
}

TEST(Jobs, ValidateCocycle) {
  auto k = context(z(2), "F3");
  k["cocycle"] = json::array({{{"a", 1}, {"b", 1}, {"value", 2}}});
  auto r = run_job({{"command", "validate"}, {"context", k}});
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_EQ(r.report["cocycle"]["valid"], true);
  k["cocycle"] = json::array({{{"a", 0}, {"b", 1}, {"value", 2}}});
  auto bad = run_job({{"command", "validate"}, {"context", k}});
  EXPECT_EQ(bad.exit_code, exit_input);
  // the classify path validates too
  EXPECT_EQ(run_job(job("classify", k)).exit_code, exit_input);
}

TEST(Jobs, InputErrors) {
  EXPECT_EQ(run_job(json::array()).exit_code, exit_input);
  EXPECT_EQ(run_job({{"command", "classify"}}).exit_code, exit_input);
  EXPECT_EQ(run_job(job("frobnicate", context(z(2), "F3"))).exit_code, exit_input);
  EXPECT_EQ(run_job(job("classify", context({{"kind", "torus"}}, "F3"))).exit_code, exit_input);
  EXPECT_EQ(run_job(job("classify", context(z(2), "F4"))).exit_code, exit_input);
  EXPECT_EQ(run_job(job("average", context(z(2), "F2"))).exit_code, exit_input);
  EXPECT_EQ(run_job(job("obstruct", context(pair(2), "F3"))).exit_code, exit_input);
  EXPECT_EQ(run_job(job("reconstruct", context(z(3), "F5"))).exit_code, exit_input);
}

TEST(Jobs, GuardExceeded) {
  auto r = run_job(job("galois", context(pair(3), "F2"), {{"guards", {{"max_nonunit_arrows", 2}}}}));
  EXPECT_EQ(r.exit_code, exit_guard);
  EXPECT_EQ(r.report["error"]["kind"], "guard");
  EXPECT_EQ(r.report["guards"]["max_nonunit_arrows"], 2);
  Guards g;
  g.max_normalizers = 3;
  EXPECT_EQ(run_job(job("reconstruct", context(pair(2), "F3")), g).exit_code, exit_guard);
}

TEST(Jobs, Galois) {
  auto r = run_job(job("galois", context(pair(3), "F2"), {{"census", true}}));
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_EQ(r.report["verdict"], "isomorphism");
  EXPECT_EQ(r.report["wide_subgroupoids"].size(), 5u);
  EXPECT_EQ(r.report["quasi_cartan_subalgebras"].size(), 5u);
  EXPECT_EQ(r.report["census"]["quasi_cartan"], 5);
  EXPECT_EQ(r.report["census"]["agrees"], true);
}

TEST(Jobs, Reconstruct) {
  auto r = run_job(job("reconstruct", context(pair(3), "F3")));
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_EQ(r.report["verdict"], "isomorphism");
  EXPECT_EQ(r.report["sigma_prime_size"], 2 * 9);
  EXPECT_EQ(r.report["g_prime_size"], 9);
}

TEST(Jobs, PqcScan) {
  auto r = run_job(job("pqc-scan", context(z(2), "F3")));
  EXPECT_EQ(r.report["verdict"], "pure");
  EXPECT_EQ(r.report["agrees_with_i2i"], true);
  auto f = run_job(job("pqc-scan", context(z(3), "F5"), {{"stop_at_first", true}}));
  EXPECT_EQ(f.report["verdict"], "failure");
  EXPECT_EQ(f.report["failure_count"], 1);
  EXPECT_TRUE(f.report.contains("first_failure"));
}

TEST(Jobs, Counterexamples) {
  json k2z2 = {{"kind", "product"}, {"left", built(pair(2))}, {"right", built(z(2))}};
  auto t = run_job(job("two-arrows", context(k2z2, "F3")));
  EXPECT_EQ(t.exit_code, exit_ok);
  EXPECT_EQ(t.report["verdict"], "not-quasi-Cartan");
  EXPECT_EQ(t.report["checks_pass"], true);
  for (int n : {3, 4, 5}) {
    auto b = run_job(job("bad-apple", context(z(n), "F5")));
    EXPECT_EQ(b.exit_code, exit_ok) << n;
    EXPECT_EQ(b.report["checks_pass"], true) << n;
    EXPECT_EQ(b.report["coefficient_audit"]["sigma_coefficient_is_n_minus_2"], true) << n;
    EXPECT_EQ(b.report["sigma_squared"]["coefficient_on_sigma"], std::to_string(n - 2)) << n;
  }
}

TEST(Jobs, BimoduleAverageObstruct) {
  auto s = run_job(job("bimodule", context(pair(3), "F3"), {{"trials", 20}}));
  EXPECT_EQ(s.report["verdict"], "spectral");
  EXPECT_EQ(s.report["elements_tested"], 20);
  auto f = run_job(job("bimodule", context(z(2), "F3"), {{"element", {{"0", 1}, {"1", 1}}}}));
  EXPECT_EQ(f.report["verdict"], "synthesis-fails");
  EXPECT_TRUE(f.report.contains("witness"));
  auto a = run_job(job("average", context(pair(3), "Q"), {{"trials", 10}}));
  EXPECT_EQ(a.report["verdict"], "equal");
  EXPECT_EQ(a.report["equal_count"], 10);
  auto o = run_job(job("obstruct", context(z(2), "F3")));
  EXPECT_EQ(o.exit_code, exit_ok);
  EXPECT_EQ(o.report["verdict"], "obstructed");
  EXPECT_EQ(o.report["reproducing"], 0);
}

TEST(Jobs, ReportsAreDeterministic) {
  for (const auto& j : {job("bimodule", context(pair(3), "F3"), {{"trials", 10}, {"seed", 7}}),
                        job("average", context(pair(3), "F5"), {{"trials", 10}, {"seed", 7}}),
                        job("obstruct", context(z(2), "F3"), {{"trials", 30}, {"seed", 3}}),
                        job("classify", context(z(3), "F5"))}) {
    auto a = run_job(j).report.dump(), b = run_job(j).report.dump();
    EXPECT_EQ(a, b) << j["command"];
  }
  auto x = run_job(job("bimodule", context(pair(3), "F3"), {{"trials", 3}, {"seed", 1}})).report;
  auto y = run_job(job("bimodule", context(pair(3), "F3"), {{"trials", 3}, {"seed", 2}})).report;
  EXPECT_EQ(x["context_hash"], y["context_hash"]);
  auto h = run_job(job("bimodule", context(pair(2), "F3"), {{"trials", 1}})).report;
  EXPECT_NE(x["context_hash"], h["context_hash"]);
}

TEST(Corpus, EmptyDirectory) {
  TempDir dir("cartan_lab_corpus_empty");
  auto s = run_corpus(dir.path);
  EXPECT_TRUE(s.entries.empty());
  EXPECT_TRUE(s.all_pass());
}

TEST(Corpus, OneFailingExpectation) {
  TempDir dir("cartan_lab_corpus_fail");
  auto good = job("classify", context(z(2), "F3"));
  good["expect"] = "AQP";
  auto bad = good;
  bad["expect"] = "ADP";
  auto broken = job("validate", {{"groupoid", {{"units", {0}}}}});
  broken["expect_exit"] = 2;
  dir.write("b_bad.json", bad);
  dir.write("a_good.json", good);
  dir.write("c_broken.json", broken);
  std::ofstream(dir.path / "d_garbage.json") << "{ not json";
  std::ofstream(dir.path / "notes.txt") << "ignored";
  auto s = run_corpus(dir.path);
  ASSERT_EQ(s.entries.size(), 4u);
  EXPECT_EQ(s.entries[0].file, "a_good.json");
  EXPECT_TRUE(s.entries[0].pass);
  EXPECT_FALSE(s.entries[1].pass);
  EXPECT_EQ(s.entries[1].exit_code, exit_mismatch);
  EXPECT_TRUE(s.entries[2].pass);
  EXPECT_FALSE(s.entries[3].pass);
  EXPECT_EQ(s.entries[3].exit_code, exit_input);
  EXPECT_FALSE(s.all_pass());
  EXPECT_THROW(run_corpus(dir.path / "missing"), input_error);
}
