#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "erprop/embed.hpp"
#include "erprop/engine.hpp"
#include "erprop/metrics.hpp"
#include "erprop/oracle.hpp"
#include "json.hpp"

namespace erprop {

/// Every knob of a run, with defaults resolved. Embedded verbatim in outputs.
struct RunManifest {
  std::string records_path;
  std::string truth_path;
  std::string out_dir;
  EmbedderConfig embedder;
  RunConfig run;
  OracleConfig oracle;
};

nlohmann::ordered_json manifest_json(const RunManifest& m);

/// {manifest, clusters, iterations, label_changes_per_iteration,
///  oracle_calls, beta, B, ...} with clusters given as record ids.
nlohmann::ordered_json run_document(const RunResult& r, const Dataset& d, const RunManifest& m,
                                    const BudgetReport& budget);

/// One object per oracle call: {iteration, target, candidates, answer,
/// tokens_in, tokens_out, cost, ...}. `answer` is the index or "NONE".
void write_transcript_jsonl(std::ostream& out, const RunResult& r, const Dataset& d);

/// iteration,label_changes,oracle_calls,beta
void write_iterations_csv(std::ostream& out, std::span<const IterationReport> iterations);

}  // namespace erprop
