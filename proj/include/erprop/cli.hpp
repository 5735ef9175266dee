#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "erprop/metrics.hpp"
#include "erprop/records.hpp"
#include "erprop/report.hpp"

namespace erprop::cli {

struct RunArtifacts {
  RunResult result;
  BudgetReport budget;
  nlohmann::ordered_json document;
};

/// Runs the pipeline described by the manifest on an already loaded dataset.
/// `truth` is needed by the simulated oracles and for FP/NMI.
RunArtifacts execute_run(const RunManifest& m, const Dataset& d, const GroundTruth* truth);

/// Writes run.json, manifest.json, transcript.jsonl and iterations.csv.
void write_run_artifacts(const RunArtifacts& a, const RunManifest& m, const Dataset& d,
                         const std::filesystem::path& dir);

struct SweepRow {
  double budget = 0.0;
  double fp = 0.0;
  double nmi = 0.0;
  double cost = 0.0;
  std::size_t calls = 0;
};

/// One run per budget with a shared manifest otherwise. Throws
/// ValidationError for fewer than two budgets.
std::vector<SweepRow> sweep(const RunManifest& m, std::span<const double> budgets, const Dataset& d,
                            const GroundTruth& truth);

/// budget,fp,nmi,cost
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// Command-line entry point; returns the process exit code
/// (0 success, 1 runtime failure, 2 usage error).
int main(int argc, char** argv);

}  // namespace erprop::cli
