#include "erprop/engine.hpp"

#include <cmath>
#include <numeric>

#include "erprop/error.hpp"
#include "erprop/rng.hpp"

namespace erprop {

namespace {

void check_state(const EntityGraph& g, const LabelState& ls, const ClusterIndex& ci,
                 const BudgetLedger& ledger, const RunConfig& cfg) {
  if (!ci.consistent_with(ls)) throw ValidationError("cluster index diverged from labels");
  if (ledger.consumed() > ledger.budget()) throw ValidationError("spend exceeds budget");
  if (auto problems = check_graph_invariants(g, cfg.graph); !problems.empty()) {
    throw ValidationError("graph invariant violated: " + problems.front());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in (0, 1]");
  if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
  if (m < 1) throw ValidationError("m must be at least 1");
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw ValidationError("budget must be finite and non-negative");
  }
  graph.validate();
  selection.validate();
}

RunResult refine(EntityGraph graph, std::span<const Embedding> embeddings, const Dataset& d,
                 const RunConfig& cfg, Oracle& oracle) {
  cfg.validate();
  const std::size_t n = d.size();
  if (graph.size() != n || embeddings.size() != n) {
    throw ValidationError("graph, embeddings and dataset sizes differ");
  }

  RunResult out;
  out.graph = std::move(graph);
  out.labels = LabelState(n);
  out.clusters = ClusterIndex(out.labels);
  out.ledger = BudgetLedger(cfg.budget);
  out.diagnostics.largest_cluster = out.clusters.largest_cluster();

  auto& g = out.graph;
  auto& ls = out.labels;
  auto& ci = out.clusters;
  auto& ledger = out.ledger;

  std::vector<RecordIndex> order(n);
  std::iota(order.begin(), order.end(), RecordIndex{0});
  Rng visit_rng(cfg.seed, "visit-order");
  std::vector<std::size_t> queries_per_record(n, 0);

  for (std::size_t t = 1; t <= cfg.max_iterations; ++t) {
    if (cfg.shuffle_visits) visit_rng.shuffle(order);
    IterationReport report;
    report.iteration = t;

    for (RecordIndex i : order) {
      const LabelDistribution pi = label_distribution(g, ls, i);
      if (pi.empty()) continue;

      bool queried = false;
      const double gain = marginal_value_gain(cfg.selection.delta_llm, wlp_confidence(pi));
      const bool capped = cfg.selection.max_queries_per_record &&
                          queries_per_record[i] >= *cfg.selection.max_queries_per_record;
      if (gain > 0.0 && ledger.remaining() > 0.0 && !capped) {
        auto query = select_candidates(pi, ci, embeddings, i, cfg.m);
        if (!query) {
          ++out.diagnostics.no_candidate_fallbacks;
        } else {
          query->prompt = render_prompt(*query, d);
          const double estimate = estimate_query_cost(query->prompt, cfg.selection);
          const auto decision = admit(gain, estimate, ledger, cfg.selection.bounds);
          if (decision.clamped) ++out.diagnostics.density_clamps;
          if (decision.admitted) {
            queried = true;
            ++queries_per_record[i];
            ++report.oracle_calls;

            OracleAnswer answer;
            bool failed = false;
            try {
              answer = oracle.ask(*query);
            } catch (const OracleTransportError&) {
              if (cfg.on_oracle_failure == OracleFailurePolicy::kAbort) throw;
              failed = true;
            }
            failed = failed || answer.unparsable;

            TranscriptEntry entry;
            entry.iteration = t;
            entry.target = i;
            entry.candidates = query->candidates;
            entry.response = answer.response;
            entry.tokens_in = answer.tokens_in;
            entry.tokens_out = answer.tokens_out;
            entry.estimated_cost = estimate;
            entry.cost = ledger.charge(i, t, estimate, answer.cost);
            entry.failed = failed;

            if (failed) {
              ++out.diagnostics.oracle_failures;
              if (cfg.on_oracle_failure == OracleFailurePolicy::kAbort) {
                out.transcript.push_back(std::move(entry));
                throw ResponseParseError("oracle reply for record '" + d[i].id +
                                         "' could not be parsed: '" + answer.response + "'");
              }
              answer.choice.reset();
            }
            entry.choice = answer.choice;
            out.transcript.push_back(std::move(entry));

            const auto update = apply_local_update(g, ls, ci, *query, answer, cfg.graph.sigma_llm);
            if (update.label_changed) ++report.label_changes;
          }
        }
      }

      if (!queried && wlp_update(ls, ci, i, pi, cfg.theta)) ++report.label_changes;

      out.diagnostics.largest_cluster =
          std::max(out.diagnostics.largest_cluster, ci.members(ls[i]).size());
      if (cfg.check_invariants) check_state(g, ls, ci, ledger, cfg);
    }

    report.beta = ledger.consumed();
    report.largest_cluster = ci.largest_cluster();
    out.iterations.push_back(report);
    if (report.label_changes == 0 && report.oracle_calls == 0) {
      out.converged = true;
      break;
    }
  }
  out.diagnostics.budget_overages = ledger.overages();
  return out;
}

RunResult run(const Dataset& d, const EmbedderConfig& embedder, const RunConfig& cfg,
              Oracle& oracle) {
  cfg.validate();
  const auto embeddings = embed_dataset(d, embedder);
  auto graph = build_knn_graph(embeddings, cfg.graph);
  return refine(std::move(graph), embeddings, d, cfg, oracle);
}

}  // namespace erprop
