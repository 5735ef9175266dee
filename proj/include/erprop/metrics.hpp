#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "erprop/engine.hpp"
#include "erprop/records.hpp"

namespace erprop {

/// Disjoint clusters of record indices.
using Clustering = std::vector<std::vector<RecordIndex>>;

/// Groups indices 0..n-1 by their assigned cluster id.
Clustering clustering_from_assignment(std::span<const std::size_t> assignment);

/// Size-weighted share of each X cluster covered by its best Y cluster.
double purity(const Clustering& x, const Clustering& y);
double inverse_purity(const Clustering& x, const Clustering& y);

/// Harmonic mean of purity and inverse purity. Throws ValidationError when
/// the two clusterings do not cover the same records exactly once.
double fp_measure(const Clustering& x, const Clustering& y);

/// 2 I(X;Y) / (H(X) + H(Y)) with natural logs; 1 when both entropies are 0.
double nmi(const Clustering& x, const Clustering& y);

struct QualityMetrics {
  double fp = 0.0;
  double nmi = 0.0;
};

struct BudgetReport {
  std::size_t calls = 0;
  std::size_t tokens_in = 0;
  std::size_t tokens_out = 0;
  double cost = 0.0;
  double budget = 0.0;
  std::optional<QualityMetrics> quality;
};

BudgetReport budget_report(const BudgetLedger& ledger, std::span<const TranscriptEntry> transcript,
                           std::optional<QualityMetrics> quality);

}  // namespace erprop
