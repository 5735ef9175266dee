#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "erprop/labels.hpp"
#include "erprop/pricing.hpp"
#include "erprop/records.hpp"

namespace erprop {

/// Known range [lower, upper] of gain-per-cost densities.
struct DensityBounds {
  double lower = 20.0;
  double upper = 1000.0;

  void validate() const;
};

struct SelectionParams {
  double delta_llm = 0.95;
  DensityBounds bounds;
  Pricing pricing;
  TokenEstimator tokens;
  /// Oracle calls allowed per record over a whole run; nullopt = unlimited.
  std::optional<std::size_t> max_queries_per_record;

  void validate() const;
};

struct LedgerEntry {
  RecordIndex record = 0;
  std::size_t iteration = 0;
  double estimated = 0.0;
  double reported = 0.0;  // cost the oracle call actually incurred
  double charged = 0.0;   // reported, clamped to the remaining budget

  bool operator==(const LedgerEntry&) const = default;
};

/// Total budget B and the running spend beta. beta never exceeds B.
class BudgetLedger {
 public:
  BudgetLedger() = default;
  /// Throws ValidationError for a negative or non-finite budget.
  explicit BudgetLedger(double budget);

  double budget() const { return budget_; }
  double consumed() const { return consumed_; }
  double remaining() const { return budget_ - consumed_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }

  /// Number of charges whose reported cost overran the remaining budget.
  std::size_t overages() const { return overages_; }

  /// Records a call. When the reported cost would push spend past the
  /// budget, spend is pinned at the budget and the overage is counted.
  /// Returns the charged amount.
  double charge(RecordIndex record, std::size_t iteration, double estimated, double reported);

 private:
  double budget_ = 0.0;
  double consumed_ = 0.0;
  std::size_t overages_ = 0;
  std::vector<LedgerEntry> entries_;
};

/// exp(entropy) of the distribution, in [1, |labels|]. Throws
/// ValidationError for an empty distribution.
double label_perplexity(const LabelDistribution& pi);

/// (1 - log_b perplexity) * max mass with b = max(|labels|, 2); 0 when empty.
double wlp_confidence(const LabelDistribution& pi);

/// max(0, delta_llm - delta_wlp).
double marginal_value_gain(double delta_llm, double delta_wlp);

/// Expected price of one oracle call for an already rendered prompt.
double estimate_query_cost(std::string_view prompt, const SelectionParams& params);

/// Renders the prompt for `target` and `candidates` and prices it.
double estimate_query_cost(const Record& target, std::span<const Record> candidates,
                           const SelectionParams& params);

/// (L/e) * (U e / L)^(beta/B); +infinity when B == 0.
double admission_threshold(double beta, double budget, const DensityBounds& bounds);

struct AdmissionDecision {
  bool admitted = false;
  double density = 0.0;  // after clamping into [L, U]
  double threshold = 0.0;
  bool clamped = false;
};

/// Admits iff the (clamped) density clears the threshold at the current
/// spend and the cost still fits. A zero gain is never admitted.
AdmissionDecision admit(double gain, double cost, const BudgetLedger& ledger,
                        const DensityBounds& bounds);

struct KnapsackItem {
  double gain = 0.0;
  double cost = 0.0;
};

struct SimulationResult {
  double policy_value = 0.0;
  double offline_value = 0.0;
  double ratio = 0.0;  // offline / policy; +inf when policy is 0 < offline
};

/// Runs the threshold policy over each arrival sequence and compares it with
/// the fractional offline optimum. Throws ValidationError when an item's
/// density lies outside the bounds or its cost exceeds budget / 100.
std::vector<SimulationResult> simulate_threshold_policy(
    std::span<const std::vector<KnapsackItem>> instances, double budget,
    const DensityBounds& bounds);

/// Random conforming instances: costs in (0, budget/100], densities in
/// [L, U], mixing random, ascending, descending and two-phase arrival orders.
std::vector<std::vector<KnapsackItem>> generate_knapsack_instances(std::size_t count,
                                                                   double budget,
                                                                   const DensityBounds& bounds,
                                                                   std::uint64_t seed);

}  // namespace erprop
