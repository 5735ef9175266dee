#include "erprop/report.hpp"

#include <ostream>

namespace erprop {

namespace {

const char* oracle_kind_name(OracleKind k) {
  switch (k) {
    case OracleKind::kTrue: return "true";
    case OracleKind::kNoisy: return "noisy";
    case OracleKind::kHttpLlm: return "llm";
  }
  return "?";
}

nlohmann::ordered_json ids(const Dataset& d, std::span<const RecordIndex> members) {
  auto out = nlohmann::ordered_json::array();
  for (RecordIndex r : members) out.push_back(d[r].id);
  return out;
}

}  // namespace

nlohmann::ordered_json manifest_json(const RunManifest& m) {
  using json = nlohmann::ordered_json;
  const auto& run = m.run;
  const auto& sel = run.selection;
  json j;
  j["records"] = m.records_path;
  j["truth"] = m.truth_path;
  j["out_dir"] = m.out_dir;
  j["embedder"] = {{"provider", m.embedder.provider == EmbeddingProvider::kLocal ? "local" : "http"},
                   {"dimension", m.embedder.dimension},
                   {"ngram", m.embedder.ngram},
                   {"hash_seed", m.embedder.hash_seed},
                   {"endpoint", m.embedder.endpoint},
                   {"model", m.embedder.model},
                   {"api_key_env", m.embedder.api_key_env}};
  j["k"] = run.graph.k;
  j["alpha"] = run.graph.alpha;
  j["sigma_llm"] = run.graph.sigma_llm;
  j["theta"] = run.theta;
  j["m"] = run.m;
  j["budget"] = run.budget;
  j["tmax"] = run.max_iterations;
  j["seed"] = run.seed;
  j["shuffle_visits"] = run.shuffle_visits;
  j["on_oracle_failure"] = run.on_oracle_failure == OracleFailurePolicy::kAbort ? "abort" : "none";
  j["delta_llm"] = sel.delta_llm;
  j["density_l"] = sel.bounds.lower;
  j["density_u"] = sel.bounds.upper;
  j["price_in_per_million"] = sel.pricing.input_per_million;
  j["price_out_per_million"] = sel.pricing.output_per_million;
  j["chars_per_token"] = sel.tokens.chars_per_token;
  j["output_tokens_estimate"] = sel.tokens.output_tokens;
  j["max_queries_per_record"] =
      sel.max_queries_per_record ? json(*sel.max_queries_per_record) : json(nullptr);
  j["oracle"] = {{"kind", oracle_kind_name(m.oracle.kind)},
                 {"epsilon", m.oracle.epsilon},
                 {"endpoint", m.oracle.http.endpoint},
                 {"model", m.oracle.http.model},
                 {"api_key_env", m.oracle.http.api_key_env},
                 {"timeout_seconds", m.oracle.http.timeout_seconds},
                 {"retries", m.oracle.http.retries}};
  return j;
}

nlohmann::ordered_json run_document(const RunResult& r, const Dataset& d, const RunManifest& m,
                                    const BudgetReport& budget) {
  using json = nlohmann::ordered_json;
  json j;
  j["manifest"] = manifest_json(m);

  auto clusters = json::array();
  for (const auto& c : r.clusters.clusters()) clusters.push_back(ids(d, c));
  j["clusters"] = std::move(clusters);

  j["iterations"] = r.iterations.size();
  j["converged"] = r.converged;
  auto changes = json::array();
  auto calls = json::array();
  for (const auto& it : r.iterations) {
    changes.push_back(it.label_changes);
    calls.push_back(it.oracle_calls);
  }
  j["label_changes_per_iteration"] = std::move(changes);
  j["oracle_calls_per_iteration"] = std::move(calls);
  j["oracle_calls"] = budget.calls;
  j["beta"] = r.ledger.consumed();
  j["B"] = r.ledger.budget();
  j["tokens_in"] = budget.tokens_in;
  j["tokens_out"] = budget.tokens_out;
  j["psi_max"] = r.diagnostics.largest_cluster;
  j["diagnostics"] = {{"density_clamps", r.diagnostics.density_clamps},
                      {"budget_overages", r.diagnostics.budget_overages},
                      {"oracle_failures", r.diagnostics.oracle_failures},
                      {"no_candidate_fallbacks", r.diagnostics.no_candidate_fallbacks}};
  if (budget.quality) {
    j["metrics"] = {{"fp", budget.quality->fp},
                    {"nmi", budget.quality->nmi},
                    {"calls", budget.calls},
                    {"cost", budget.cost}};
  }
  return j;
}

void write_transcript_jsonl(std::ostream& out, const RunResult& r, const Dataset& d) {
  using json = nlohmann::ordered_json;
  for (const auto& e : r.transcript) {
    json j;
    j["iteration"] = e.iteration;
    j["target"] = d[e.target].id;
    auto candidates = json::array();
    for (const auto& c : e.candidates) candidates.push_back(d[c.record].id);
    j["candidates"] = std::move(candidates);
    j["answer"] = e.choice ? json(*e.choice) : json("NONE");
    j["response"] = e.response;
    j["tokens_in"] = e.tokens_in;
    j["tokens_out"] = e.tokens_out;
    j["estimated_cost"] = e.estimated_cost;
    j["cost"] = e.cost;
    if (e.failed) j["failed"] = true;
    out << j.dump() << '\n';
  }
}

void write_iterations_csv(std::ostream& out, std::span<const IterationReport> iterations) {
  out << "iteration,label_changes,oracle_calls,beta\n";
  const auto precision = out.precision(17);
  for (const auto& it : iterations) {
    out << it.iteration << ',' << it.label_changes << ',' << it.oracle_calls << ',' << it.beta << '\n';
  }
  out.precision(precision);
}

}  // namespace erprop
