#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "erprop/cli.hpp"
#include "erprop/error.hpp"
#include "erprop/planted.hpp"
#include "erprop/records.hpp"
#include "erprop/report.hpp"
#include "json.hpp"
#include "support/reference.hpp"

using namespace erprop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("erprop-test-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int call(std::vector<std::string> args) {
  args.insert(args.begin(), "erprop");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* saved = std::cout.rdbuf(sink.rdbuf());
  const int code = cli::main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(saved);
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string joined_values(const Record& r) {
  std::string s;
  for (const auto& a : r.attributes) s += a.value + "\x1f";
  return s;
}

}  // namespace

TEST_SUITE("planted") {

TEST_CASE("rate zero copies the base exactly") {
  PlantedSpec spec;
  spec.entities = 12;
  spec.sizes = {3};
  spec.corruption = 0.0;
  const auto data = generate_planted(spec);
  CHECK(data.records.size() == 36);
  for (RecordIndex i = 0; i < data.records.size(); ++i) {
    CHECK(data.records[i].attributes == data.bases[data.entity_of[i]].attributes);
    CHECK(data.edits[i] == 0);
  }
}

TEST_CASE("sizes and bookkeeping") {
  PlantedSpec spec;
  const auto data = generate_planted(spec);
  CHECK(data.records.size() == 300);
  CHECK(data.truth.entity_count() == 60);
  const auto stats = dataset_stats(data.records, data.truth);
  CHECK(stats.entities == 60);
  CHECK(stats.matches == 60 * 10);
  for (RecordIndex i = 0; i < data.records.size(); ++i) {
    CHECK(*data.truth.entity_of(data.records[i].id) == data.bases[data.entity_of[i]].id);
  }

  PlantedSpec mixed;
  mixed.entities = 4;
  mixed.sizes = {1, 2};
  CHECK(generate_planted(mixed).records.size() == 6);
}

TEST_CASE("generator is deterministic under its seed") {
  PlantedSpec spec;
  spec.entities = 10;
  spec.seed = 4;
  CHECK(generate_planted(spec).records == generate_planted(spec).records);
  PlantedSpec other = spec;
  other.seed = 5;
  CHECK_FALSE(generate_planted(spec).records == generate_planted(other).records);
}

TEST_CASE("invalid specs") {
  PlantedSpec spec;
  spec.corruption = 1.0;
  CHECK_THROWS_AS(generate_planted(spec), ValidationError);
  spec.corruption = -0.1;
  CHECK_THROWS_AS(generate_planted(spec), ValidationError);
  spec.corruption = 0.1;
  spec.entities = 0;
  CHECK_THROWS_AS(generate_planted(spec), ValidationError);
  spec.entities = 1;
  spec.sizes = {0};
  CHECK_THROWS_AS(generate_planted(spec), ValidationError);
}

TEST_CASE("edit distance follows the corruption rate") {
  double chars = 0.0;
  double distance = 0.0;
  double edits = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PlantedSpec spec;
    spec.seed = seed;
    const auto data = generate_planted(spec);
    for (RecordIndex i = 0; i < data.records.size(); ++i) {
      const std::string base = joined_values(data.bases[data.entity_of[i]]);
      const std::string copy = joined_values(data.records[i]);
      const std::size_t d = reference::levenshtein(base, copy);
      CHECK(d <= data.edits[i]);
      chars += static_cast<double>(base.size() - data.records[i].attributes.size());
      distance += static_cast<double>(d);
      edits += static_cast<double>(data.edits[i]);
    }
  }
  CHECK(edits / chars == doctest::Approx(0.1).epsilon(0.05));
  CHECK(distance / chars > 0.085);
  CHECK(distance / chars <= edits / chars);
}

}

TEST_SUITE("cli") {

TEST_CASE("run, determinism and artifacts") {
  TempDir tmp("run");
  REQUIRE(call({"gen-planted", "--entities", "20", "--seed", "2", "--out-dir", tmp.path.string()}) == 0);
  const std::string records = (tmp.path / "records.csv").string();
  const std::string truth = (tmp.path / "truth.csv").string();
  auto run_into = [&](const std::string& dir, const std::string& budget) {
    return call({"run", "--records", records, "--truth", truth, "--oracle", "true", "--budget", budget,
                 "--seed", "7", "--out-dir", (tmp.path / dir).string()});
  };
  const std::vector<std::string> files{"run.json", "transcript.jsonl", "iterations.csv", "manifest.json"};
  REQUIRE(run_into("a", "1.0") == 0);
  std::vector<std::string> first;
  for (const auto& f : files) {
    CHECK(fs::exists(tmp.path / "a" / f));
    first.push_back(slurp(tmp.path / "a" / f));
  }
  REQUIRE(run_into("a", "1.0") == 0);
  for (std::size_t i = 0; i < files.size(); ++i) CHECK(slurp(tmp.path / "a" / files[i]) == first[i]);
  const auto doc = nlohmann::json::parse(slurp(tmp.path / "a" / "run.json"));
  CHECK(doc["beta"].get<double>() <= 1.0);
  CHECK(doc["B"].get<double>() == 1.0);
  CHECK(doc["manifest"]["seed"] == 7);
  CHECK(doc.contains("metrics"));

  std::size_t lines = 0;
  double cost = 0.0;
  std::istringstream transcript(slurp(tmp.path / "a" / "transcript.jsonl"));
  for (std::string line; std::getline(transcript, line);) {
    ++lines;
    cost += nlohmann::json::parse(line)["cost"].get<double>();
  }
  CHECK(lines == doc["oracle_calls"].get<std::size_t>());
  CHECK(cost == doctest::Approx(doc["beta"].get<double>()).epsilon(1e-9));

  REQUIRE(run_into("zero", "0") == 0);
  const auto zero = nlohmann::json::parse(slurp(tmp.path / "zero" / "run.json"));
  CHECK(zero["oracle_calls"] == 0);
  CHECK(zero["beta"] == 0.0);
  CHECK(slurp(tmp.path / "zero" / "transcript.jsonl").empty());
  CHECK(zero["metrics"]["fp"].get<double>() < doc["metrics"]["fp"].get<double>());
}

TEST_CASE("sweep") {
  PlantedSpec spec;
  spec.entities = 20;
  spec.seed = 3;
  const auto data = generate_planted(spec);
  RunManifest m;
  const std::vector<double> one{0.1};
  CHECK_THROWS_AS(cli::sweep(m, one, data.records, data.truth), ValidationError);
  const std::vector<double> budgets{0.0, 0.001, 0.1};
  const auto rows = cli::sweep(m, budgets, data.records, data.truth);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].fp <= rows[1].fp);
  CHECK(rows[1].fp <= rows[2].fp);
  std::ostringstream out;
  cli::write_sweep_csv(out, rows);
  std::size_t lines = 0;
  std::istringstream in(out.str());
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 4);
  CHECK(out.str().starts_with("budget,fp,nmi,cost\n"));
}

TEST_CASE("usage errors") {
  TempDir tmp("usage");
  CHECK(call({}) == 2);
  CHECK(call({"knapsack-sim", "--density-l", "50", "--density-u", "50"}) == 2);
  CHECK(call({"run", "--records", (tmp.path / "missing.csv").string()}) == 1);
  REQUIRE(call({"gen-planted", "--entities", "5", "--out-dir", tmp.path.string()}) == 0);
  const std::string records = (tmp.path / "records.csv").string();
  const std::string truth = (tmp.path / "truth.csv").string();
  CHECK(call({"sweep", "--records", records, "--truth", truth, "--budgets", "0.1", "--k", "3"}) == 2);
  CHECK(call({"run", "--records", records, "--theta", "0", "--k", "3"}) == 2);
  CHECK(call({"run", "--records", records, "--oracle", "true", "--k", "3"}) == 2);
  CHECK(call({"gen-planted", "--corruption", "1.5", "--out-dir", tmp.path.string()}) == 2);
}

TEST_CASE("config file with flag override") {
  TempDir tmp("config");
  REQUIRE(call({"gen-planted", "--entities", "10", "--out-dir", tmp.path.string()}) == 0);
  {
    std::ofstream cfg(tmp.path / "run.toml");
    cfg << "[run]\nrecords = \"" << (tmp.path / "records.csv").string() << "\"\n"
        << "truth = \"" << (tmp.path / "truth.csv").string() << "\"\n"
        << "budget = 0.5\nk = 5\nseed = 3\n";
  }
  REQUIRE(call({"--config", (tmp.path / "run.toml").string(), "run", "--k", "4", "--out-dir",
                (tmp.path / "out").string()}) == 0);
  const auto manifest = nlohmann::json::parse(slurp(tmp.path / "out" / "manifest.json"));
  CHECK(manifest["budget"] == 0.5);
  CHECK(manifest["k"] == 4);
}

TEST_CASE("knapsack simulation command") {
  TempDir tmp("sim");
  const auto out = tmp.path / "sim.csv";
  REQUIRE(call({"knapsack-sim", "--instances", "50", "--seed", "4", "--out", out.string()}) == 0);
  const std::string first = slurp(out);
  REQUIRE(call({"knapsack-sim", "--instances", "50", "--seed", "4", "--out", out.string()}) == 0);
  CHECK(slurp(out) == first);
  std::istringstream in(first);
  std::string line;
  std::getline(in, line);
  CHECK(line == "instance,policy_value,offline_value,ratio");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const double ratio = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(ratio <= (std::log(50.0) + 1.0) * 1.05);
  }
  CHECK(rows == 50);
}

}
