#include "erprop/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "erprop/error.hpp"
#include "erprop/planted.hpp"
#include "erprop/rng.hpp"

namespace erprop::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::optional<GroundTruth> load_truth(const RunManifest& m, const Dataset& d) {
  if (m.truth_path.empty()) return std::nullopt;
  auto gt = load_ground_truth(m.truth_path);
  gt.validate_against(d);
  return gt;
}

/// Options shared by `run` and `sweep`.
struct RunFlags {
  std::string oracle = "true";
  std::string embedder = "local";
  std::string on_failure = "abort";
  std::size_t max_queries = 0;
};

void add_run_options(CLI::App* cmd, RunManifest& m, RunFlags& f) {
  auto& run = m.run;
  auto& sel = run.selection;
  cmd->add_option("--records", m.records_path, "Records file (CSV with leading id column, or JSONL)")
      ->required();
  cmd->add_option("--truth", m.truth_path, "Ground truth CSV: record_id,entity_id");
  cmd->add_option("--out-dir", m.out_dir, "Directory for run outputs");
  cmd->add_option("--oracle", f.oracle, "Oracle kind")
      ->check(CLI::IsMember({"true", "noisy", "llm"}))
      ->capture_default_str();
  cmd->add_option("--epsilon", m.oracle.epsilon, "Noisy-oracle error rate")->capture_default_str();
  cmd->add_option("--budget", run.budget, "Total query budget B")->capture_default_str();
  cmd->add_option("--k", run.graph.k, "Initial KNN neighbors")->capture_default_str();
  cmd->add_option("--alpha", run.graph.alpha, "KNN edge weight scale")->capture_default_str();
  cmd->add_option("--theta", run.theta, "Propagation confidence threshold")->capture_default_str();
  cmd->add_option("--m", run.m, "Candidates per oracle query")->capture_default_str();
  cmd->add_option("--delta-llm", sel.delta_llm, "Assumed oracle confidence")->capture_default_str();
  cmd->add_option("--sigma-llm", run.graph.sigma_llm, "Weight of oracle-verified edges")
      ->capture_default_str();
  cmd->add_option("--density-l", sel.bounds.lower, "Lower density bound L")->capture_default_str();
  cmd->add_option("--density-u", sel.bounds.upper, "Upper density bound U")->capture_default_str();
  cmd->add_option("--tmax", run.max_iterations, "Maximum iterations")->capture_default_str();
  cmd->add_option("--seed", run.seed, "Seed for every random stream")->capture_default_str();
  cmd->add_option("--price-in", sel.pricing.input_per_million, "Input price per 1M tokens")
      ->capture_default_str();
  cmd->add_option("--price-out", sel.pricing.output_per_million, "Output price per 1M tokens")
      ->capture_default_str();
  cmd->add_option("--max-queries-per-record", f.max_queries, "Per-record oracle cap (0 = unlimited)");
  cmd->add_flag("--shuffle", run.shuffle_visits, "Seeded random visit order per iteration");
  cmd->add_option("--on-oracle-failure", f.on_failure, "abort or none")
      ->check(CLI::IsMember({"abort", "none"}))
      ->capture_default_str();

  cmd->add_option("--embedder", f.embedder, "Embedding provider")
      ->check(CLI::IsMember({"local", "http"}))
      ->capture_default_str();
  cmd->add_option("--dim", m.embedder.dimension, "Local embedding dimension")->capture_default_str();
  cmd->add_option("--ngram", m.embedder.ngram, "Local character n-gram length")->capture_default_str();
  cmd->add_option("--hash-seed", m.embedder.hash_seed, "Local n-gram hash seed")->capture_default_str();
  cmd->add_option("--embed-endpoint", m.embedder.endpoint, "Embedding service URL");
  cmd->add_option("--embed-model", m.embedder.model, "Embedding model name");
  cmd->add_option("--embed-key-env", m.embedder.api_key_env, "Env var holding the embedding API key");

  cmd->add_option("--llm-endpoint", m.oracle.http.endpoint, "Chat-completions URL");
  cmd->add_option("--llm-model", m.oracle.http.model, "LLM model name");
  cmd->add_option("--llm-key-env", m.oracle.http.api_key_env, "Env var holding the LLM API key")
      ->capture_default_str();
  cmd->add_option("--llm-timeout", m.oracle.http.timeout_seconds, "LLM request timeout (s)")
      ->capture_default_str();
  cmd->add_option("--llm-retries", m.oracle.http.retries, "LLM transport retries")
      ->capture_default_str();
}

void resolve(RunManifest& m, const RunFlags& f) {
  static const std::map<std::string, OracleKind> kinds{
      {"true", OracleKind::kTrue}, {"noisy", OracleKind::kNoisy}, {"llm", OracleKind::kHttpLlm}};
  m.oracle.kind = kinds.at(f.oracle);
  m.embedder.provider = f.embedder == "http" ? EmbeddingProvider::kHttp : EmbeddingProvider::kLocal;
  m.run.on_oracle_failure =
      f.on_failure == "none" ? OracleFailurePolicy::kTreatAsNone : OracleFailurePolicy::kAbort;
  if (f.max_queries > 0) m.run.selection.max_queries_per_record = f.max_queries;
  m.run.validate();
  m.embedder.validate();
  m.oracle.validate();
}

void print_summary(const RunArtifacts& a) {
  const auto& b = a.budget;
  std::cout << "iterations: " << a.result.iterations.size()
            << (a.result.converged ? " (converged)" : "") << '\n'
            << "clusters:   " << a.result.clusters.cluster_count() << '\n'
            << "calls:      " << b.calls << "  tokens in/out: " << b.tokens_in << '/' << b.tokens_out
            << '\n'
            << "cost:       " << b.cost << " of " << b.budget << '\n';
  if (b.quality) {
    std::cout << "FP:         " << b.quality->fp << '\n' << "NMI:        " << b.quality->nmi << '\n';
  }
}

int cmd_run(const RunManifest& m) {
  const auto d = load_records(m.records_path, format_from_path(m.records_path));
  const auto truth = load_truth(m, d);
  auto artifacts = execute_run(m, d, truth ? &*truth : nullptr);
  if (!m.out_dir.empty()) write_run_artifacts(artifacts, m, d, m.out_dir);
  print_summary(artifacts);
  return 0;
}

int cmd_sweep(const RunManifest& m, const std::vector<double>& budgets) {
  if (m.truth_path.empty()) throw ValidationError("sweep needs --truth");
  const auto d = load_records(m.records_path, format_from_path(m.records_path));
  const auto truth = load_truth(m, d);
  const auto rows = sweep(m, budgets, d, *truth);
  write_sweep_csv(std::cout, rows);
  if (!m.out_dir.empty()) {
    std::filesystem::create_directories(m.out_dir);
    auto out = open_output(std::filesystem::path(m.out_dir) / "sweep.csv");
    write_sweep_csv(out, rows);
    auto manifest = open_output(std::filesystem::path(m.out_dir) / "manifest.json");
    manifest << manifest_json(m).dump(2) << '\n';
  }
  return 0;
}

int cmd_gen_planted(const PlantedSpec& spec, const std::string& out_dir) {
  const auto data = generate_planted(spec);
  std::filesystem::create_directories(out_dir);
  auto records = open_output(std::filesystem::path(out_dir) / "records.csv");
  write_records_csv(records, data.records);
  auto truth = open_output(std::filesystem::path(out_dir) / "truth.csv");
  write_ground_truth_csv(truth, data.truth);
  const auto stats = dataset_stats(data.records, data.truth);
  std::cout << "records: " << stats.n << "  entities: " << stats.entities
            << "  matches: " << stats.matches << "  dispersion: " << stats.dispersion << '\n';
  return 0;
}

int cmd_knapsack_sim(std::size_t instances, double budget, const DensityBounds& bounds,
                     std::uint64_t seed, const std::string& out_path) {
  if (instances < 1) throw ValidationError("need at least one instance");
  bounds.validate();
  const auto generated = generate_knapsack_instances(instances, budget, bounds, seed);
  const auto results = simulate_threshold_policy(generated, budget, bounds);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file = open_output(out_path);
    out = &file;
  }
  out->precision(17);
  *out << "instance,policy_value,offline_value,ratio\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    *out << i << ',' << results[i].policy_value << ',' << results[i].offline_value << ','
         << results[i].ratio << '\n';
    worst = std::max(worst, results[i].ratio);
  }
  const double bound = std::log(bounds.upper / bounds.lower) + 1.0;
  std::cerr << "max ratio: " << worst << "  bound ln(U/L)+1: " << bound << '\n';
  return 0;
}

}  // namespace

RunArtifacts execute_run(const RunManifest& m, const Dataset& d, const GroundTruth* truth) {
  m.run.validate();
  std::optional<std::vector<std::size_t>> entity;
  if (truth) entity = truth->entity_indices(d);

  auto oracle = make_oracle(m.oracle, entity ? &*entity : nullptr, derive_seed(m.run.seed, "oracle"),
                            m.run.selection.pricing, m.run.selection.tokens);

  RunArtifacts a;
  a.result = run(d, m.embedder, m.run, *oracle);

  std::optional<QualityMetrics> quality;
  if (entity) {
    const auto predicted = a.result.clusters.clusters();
    const auto expected = clustering_from_assignment(*entity);
    quality = QualityMetrics{fp_measure(predicted, expected), nmi(predicted, expected)};
  }
  a.budget = budget_report(a.result.ledger, a.result.transcript, quality);
  a.document = run_document(a.result, d, m, a.budget);
  return a;
}

void write_run_artifacts(const RunArtifacts& a, const RunManifest& m, const Dataset& d,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "run.json");
    out << a.document.dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "manifest.json");
    out << manifest_json(m).dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "transcript.jsonl");
    write_transcript_jsonl(out, a.result, d);
  }
  {
    auto out = open_output(dir / "iterations.csv");
    write_iterations_csv(out, a.result.iterations);
  }
}

std::vector<SweepRow> sweep(const RunManifest& m, std::span<const double> budgets, const Dataset& d,
                            const GroundTruth& truth) {
  if (budgets.size() < 2) throw ValidationError("a sweep needs at least two budgets");
  std::vector<SweepRow> rows;
  for (double b : budgets) {
    RunManifest each = m;
    each.run.budget = b;
    const auto a = execute_run(each, d, &truth);
    rows.push_back({b, a.budget.quality->fp, a.budget.quality->nmi, a.budget.cost, a.budget.calls});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  const auto precision = out.precision(17);
  out << "budget,fp,nmi,cost\n";
  for (const auto& r : rows) out << r.budget << ',' << r.fp << ',' << r.nmi << ',' << r.cost << '\n';
  out.precision(precision);
}

int main(int argc, char** argv) {
  CLI::App app{"Budgeted entity resolution by label propagation with oracle queries"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style key = value file; flags override it");

  RunManifest run_manifest;
  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Resolve a record file into entity clusters");
  add_run_options(run_cmd, run_manifest, run_flags);

  RunManifest sweep_manifest;
  RunFlags sweep_flags;
  std::vector<double> budgets;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run once per budget and report FP/NMI/cost");
  add_run_options(sweep_cmd, sweep_manifest, sweep_flags);
  sweep_cmd->add_option("--budgets", budgets, "Budgets to evaluate")->required()->delimiter(',');

  PlantedSpec planted;
  std::string planted_dir = ".";
  auto* gen_cmd = app.add_subcommand("gen-planted", "Write a synthetic dataset with known entities");
  gen_cmd->add_option("--entities", planted.entities, "Number of entities")->capture_default_str();
  gen_cmd->add_option("--sizes", planted.sizes, "Records per entity, cycled")
      ->delimiter(',')
      ->capture_default_str();
  gen_cmd->add_option("--corruption", planted.corruption, "Per-character corruption rate")
      ->capture_default_str();
  gen_cmd->add_option("--seed", planted.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out-dir", planted_dir, "Where records.csv and truth.csv go")
      ->capture_default_str();

  std::size_t sim_instances = 1000;
  double sim_budget = 1.0;
  DensityBounds sim_bounds;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("knapsack-sim", "Empirical competitive ratio of the admission rule");
  sim_cmd->add_option("--instances", sim_instances, "Random instances")->capture_default_str();
  sim_cmd->add_option("--budget", sim_budget, "Knapsack capacity")->capture_default_str();
  sim_cmd->add_option("--density-l", sim_bounds.lower, "Lower density bound L")->capture_default_str();
  sim_cmd->add_option("--density-u", sim_bounds.upper, "Upper density bound U")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Instance generator seed")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      resolve(run_manifest, run_flags);
      return cmd_run(run_manifest);
    }
    if (*sweep_cmd) {
      resolve(sweep_manifest, sweep_flags);
      if (budgets.size() < 2) throw ValidationError("a sweep needs at least two budgets");
      return cmd_sweep(sweep_manifest, budgets);
    }
    if (*gen_cmd) return cmd_gen_planted(planted, planted_dir);
    if (*sim_cmd) return cmd_knapsack_sim(sim_instances, sim_budget, sim_bounds, sim_seed, sim_out);
  } catch (const ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace erprop::cli
