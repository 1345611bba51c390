// cartan-lab: batch front end over the job runner.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cartan_lab/jobs.hpp"

using cartan_lab::io::json;

namespace {

int emit(const json& report, const std::string& out_path) {
  auto text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return cartan_lab::exit_input;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite groupoids, twisted Steinberg algebras and their quasi-Cartan inclusions"};
  app.require_subcommand(1);

  std::string context_file, expect, out_path, options_text;
  std::optional<std::size_t> guard_dim;
  std::optional<std::uint64_t> seed;

  for (const auto& name : cartan_lab::job_commands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " job on a context or job file");
    sub->add_option("--context", context_file, "context JSON, or a job JSON with a \"context\" field")->required();
    sub->add_option("--expect", expect, "expected verdict; exit 1 when it differs");
    sub->add_option("--guard-dim", guard_dim, "maximum subspace dimension for exhaustive scans");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--options", options_text, "extra options as a JSON object");
    sub->add_option("--out", out_path, "write the report here instead of stdout");
  }
  std::string job_file;
  auto* run = app.add_subcommand("run", "run a job file as is");
  run->add_option("job", job_file, "job JSON")->required();
  run->add_option("--out", out_path, "write the report here instead of stdout");
  std::string corpus_dir;
  auto* corpus = app.add_subcommand("corpus", "run every job in a directory");
  corpus->add_option("dir", corpus_dir, "directory of job JSON files")->required();
  corpus->add_option("--out", out_path, "write the summary JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (corpus->parsed()) {
      auto s = cartan_lab::run_corpus(corpus_dir);
      json rows = json::array();
      for (const auto& e : s.entries) {
        std::cout << (e.pass ? "PASS " : "FAIL ") << e.file << "  [" << e.command << "] exit " << e.exit_code
                  << " (expected " << e.expected_exit << ")  " << e.detail << "\n";
        rows.push_back({{"file", e.file}, {"command", e.command}, {"exit", e.exit_code},
                        {"expected_exit", e.expected_exit}, {"pass", e.pass}, {"detail", e.detail}});
      }
      std::size_t passed = 0;
      for (const auto& e : s.entries) passed += e.pass;
      std::cout << passed << "/" << s.entries.size() << " jobs passed\n";
      if (!out_path.empty()) {
        json summary = {{"schema_version", cartan_lab::io::schema_version}, {"jobs", rows}, {"all_pass", s.all_pass()}};
        if (int rc = emit(summary, out_path)) return rc;
      }
      return s.all_pass() ? cartan_lab::exit_ok : cartan_lab::exit_mismatch;
    }
    if (run->parsed()) {
      auto r = cartan_lab::run_job(cartan_lab::read_json_file(job_file));
      if (int rc = emit(r.report, out_path)) return rc;
      return r.exit_code;
    }

    std::string command;
    for (auto* sub : app.get_subcommands()) command = sub->get_name();
    auto input = cartan_lab::read_json_file(context_file);
    json job = input.contains("context") ? input : json{{"context", input}};
    job["command"] = command;
    if (!job.contains("options")) job["options"] = json::object();
    if (!options_text.empty()) {
      auto extra = json::parse(options_text);
      if (!extra.is_object()) throw cartan_lab::input_error("--options must be a JSON object");
      for (auto& [k, v] : extra.items()) job["options"][k] = v;
    }
    if (seed) job["options"]["seed"] = *seed;
    if (guard_dim) job["options"]["guards"]["max_subspace_dim"] = *guard_dim;
    if (!expect.empty()) job["expect"] = expect;
    auto r = cartan_lab::run_job(job);
    if (int rc = emit(r.report, out_path)) return rc;
    return r.exit_code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cartan_lab::exit_input;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cartan_lab::exit_input;
  }
}
