#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "erprop/embed.hpp"
#include "erprop/graph.hpp"
#include "erprop/labels.hpp"
#include "erprop/oracle.hpp"
#include "erprop/records.hpp"
#include "erprop/select.hpp"

namespace erprop {

enum class OracleFailurePolicy { kAbort, kTreatAsNone };

struct RunConfig {
  double theta = 0.6;
  std::size_t max_iterations = 20;
  std::size_t m = 5;
  double budget = 0.0;
  std::uint64_t seed = 0;
  /// Visit records in a seeded random order each iteration instead of file order.
  bool shuffle_visits = false;
  OracleFailurePolicy on_oracle_failure = OracleFailurePolicy::kAbort;
#ifdef NDEBUG
  bool check_invariants = false;
#else
  bool check_invariants = true;
#endif
  GraphParams graph;
  SelectionParams selection;

  void validate() const;
};

struct IterationReport {
  std::size_t iteration = 0;  // 1-based
  std::size_t label_changes = 0;
  std::size_t oracle_calls = 0;
  double beta = 0.0;  // spend after the iteration
  std::size_t largest_cluster = 0;
};

struct TranscriptEntry {
  std::size_t iteration = 0;
  RecordIndex target = 0;
  std::vector<Candidate> candidates;
  std::optional<std::size_t> choice;
  std::string response;
  std::size_t tokens_in = 0;
  std::size_t tokens_out = 0;
  double estimated_cost = 0.0;
  double cost = 0.0;  // charged to the ledger
  bool failed = false;
};

struct RunDiagnostics {
  std::size_t density_clamps = 0;
  std::size_t budget_overages = 0;
  std::size_t oracle_failures = 0;
  std::size_t no_candidate_fallbacks = 0;
  std::size_t largest_cluster = 0;  // maximum over the whole refinement
};

struct RunResult {
  LabelState labels;
  ClusterIndex clusters;
  EntityGraph graph;
  BudgetLedger ledger;
  std::vector<IterationReport> iterations;
  std::vector<TranscriptEntry> transcript;
  RunDiagnostics diagnostics;
  bool converged = false;
};

/// Iterative refinement over a prebuilt graph: per record, either an oracle
/// query admitted by the budget policy or a weighted propagation step.
/// Stops after an iteration with no label change and no oracle call, or
/// after max_iterations.
RunResult refine(EntityGraph graph, std::span<const Embedding> embeddings, const Dataset& d,
                 const RunConfig& cfg, Oracle& oracle);

/// Full pipeline: embed, build the KNN graph, refine.
RunResult run(const Dataset& d, const EmbedderConfig& embedder, const RunConfig& cfg,
              Oracle& oracle);

}  // namespace erprop
