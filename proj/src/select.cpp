#include "erprop/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "erprop/error.hpp"
#include "erprop/oracle.hpp"
#include "erprop/rng.hpp"

namespace erprop {

void DensityBounds::validate() const {
  if (!(lower > 0.0) || !(upper > lower) || !std::isfinite(upper)) {
    throw ValidationError("density bounds must satisfy 0 < L < U");
  }
}

void SelectionParams::validate() const {
  if (!(delta_llm > 0.0 && delta_llm <= 1.0)) throw ValidationError("delta_llm must lie in (0, 1]");
  bounds.validate();
  pricing.validate();
  tokens.validate();
}

BudgetLedger::BudgetLedger(double budget) : budget_(budget) {
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw ValidationError("budget must be finite and non-negative");
  }
}

double BudgetLedger::charge(RecordIndex record, std::size_t iteration, double estimated,
                            double reported) {
  double charged = reported;
  if (consumed_ + reported > budget_) {
    charged = budget_ - consumed_;
    consumed_ = budget_;
    ++overages_;
  } else {
    consumed_ += reported;
  }
  entries_.push_back({record, iteration, estimated, reported, charged});
  return charged;
}

double label_perplexity(const LabelDistribution& pi) {
  if (pi.empty()) throw ValidationError("perplexity of an empty label distribution");
  double entropy = 0.0;
  for (const auto& [label, p] : pi.entries()) {
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

double wlp_confidence(const LabelDistribution& pi) {
  if (pi.empty()) return 0.0;
  const double base = static_cast<double>(std::max<std::size_t>(pi.size(), 2));
  const double normalized = std::log(label_perplexity(pi)) / std::log(base);
  return std::clamp((1.0 - normalized) * pi.argmax().second, 0.0, 1.0);
}

double marginal_value_gain(double delta_llm, double delta_wlp) {
  return std::max(0.0, delta_llm - delta_wlp);
}

double estimate_query_cost(std::string_view prompt, const SelectionParams& params) {
  return params.pricing.cost(params.tokens.count(prompt), params.tokens.output_tokens);
}

double estimate_query_cost(const Record& target, std::span<const Record> candidates,
                           const SelectionParams& params) {
  if (candidates.empty()) throw ValidationError("cost estimate needs at least one candidate");
  return estimate_query_cost(render_prompt(target, candidates), params);
}

double admission_threshold(double beta, double budget, const DensityBounds& bounds) {
  if (budget == 0.0) return std::numeric_limits<double>::infinity();
  const double e = std::numbers::e;
  const double fraction = beta / budget;
  if (fraction == 1.0) return bounds.upper;
  return bounds.lower / e * std::pow(bounds.upper * e / bounds.lower, fraction);
}

AdmissionDecision admit(double gain, double cost, const BudgetLedger& ledger,
                        const DensityBounds& bounds) {
  AdmissionDecision d;
  d.threshold = admission_threshold(ledger.consumed(), ledger.budget(), bounds);
  if (!(gain > 0.0) || !(cost > 0.0)) return d;
  d.density = gain / cost;
  if (d.density < bounds.lower || d.density > bounds.upper) {
    d.density = std::clamp(d.density, bounds.lower, bounds.upper);
    d.clamped = true;
  }
  d.admitted = d.density >= d.threshold && ledger.consumed() + cost <= ledger.budget();
  return d;
}

std::vector<SimulationResult> simulate_threshold_policy(
    std::span<const std::vector<KnapsackItem>> instances, double budget,
    const DensityBounds& bounds) {
  bounds.validate();
  if (!(budget > 0.0)) throw ValidationError("simulation budget must be positive");

  std::vector<SimulationResult> results;
  results.reserve(instances.size());
  for (std::size_t n = 0; n < instances.size(); ++n) {
    const auto& items = instances[n];
    for (const auto& item : items) {
      const double density = item.gain / item.cost;
      if (!(item.cost > 0.0) || item.cost > budget / 100.0) {
        throw ValidationError("instance " + std::to_string(n) + ": item cost must lie in (0, B/100]");
      }
      if (density < bounds.lower * (1.0 - 1e-12) || density > bounds.upper * (1.0 + 1e-12)) {
        throw ValidationError("instance " + std::to_string(n) + ": density outside [L, U]");
      }
    }

    BudgetLedger ledger(budget);
    SimulationResult r;
    for (const auto& item : items) {
      if (admit(item.gain, item.cost, ledger, bounds).admitted) {
        ledger.charge(0, 0, item.cost, item.cost);
        r.policy_value += item.gain;
      }
    }

    std::vector<KnapsackItem> by_density = items;
    std::sort(by_density.begin(), by_density.end(), [](const auto& a, const auto& b) {
      return a.gain / a.cost > b.gain / b.cost;
    });
    double room = budget;
    for (const auto& item : by_density) {
      if (room <= 0.0) break;
      const double take = std::min(1.0, room / item.cost);
      r.offline_value += take * item.gain;
      room -= take * item.cost;
    }

    if (r.policy_value > 0.0) {
      r.ratio = r.offline_value / r.policy_value;
    } else {
      r.ratio = r.offline_value > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    results.push_back(r);
  }
  return results;
}

std::vector<std::vector<KnapsackItem>> generate_knapsack_instances(std::size_t count,
                                                                   double budget,
                                                                   const DensityBounds& bounds,
                                                                   std::uint64_t seed) {
  bounds.validate();
  Rng rng(seed, "knapsack-instances");
  const double log_lo = std::log(bounds.lower);
  const double log_hi = std::log(bounds.upper);
  std::vector<std::vector<KnapsackItem>> instances;
  instances.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    // Total offered cost between 0.5B and 4B so the budget binds most of the time.
    const double offered = budget * rng.uniform(0.5, 4.0);
    const double max_cost = budget / 100.0 * rng.uniform(0.05, 1.0);
    std::vector<KnapsackItem> items;
    double total = 0.0;
    while (total < offered) {
      const double cost = max_cost * (1.0 - rng.uniform01());
      const double density = std::clamp(std::exp(rng.uniform(log_lo, log_hi)), bounds.lower, bounds.upper);
      items.push_back({density * cost, cost});
      total += cost;
    }
    auto density_of = [](const KnapsackItem& a) { return a.gain / a.cost; };
    switch (n % 4) {
      case 0:
        break;
      case 1:
        std::sort(items.begin(), items.end(),
                  [&](const auto& a, const auto& b) { return density_of(a) < density_of(b); });
        break;
      case 2:
        std::sort(items.begin(), items.end(),
                  [&](const auto& a, const auto& b) { return density_of(a) > density_of(b); });
        break;
      default: {
        // Flood of low-density items before a burst of high-density ones.
        for (auto& item : items) {
          const double d = rng.bernoulli(0.7) ? bounds.lower : bounds.upper;
          item.gain = d * item.cost;
        }
        std::stable_sort(items.begin(), items.end(),
                         [&](const auto& a, const auto& b) { return density_of(a) < density_of(b); });
        break;
      }
    }
    instances.push_back(std::move(items));
  }
  return instances;
}

}  // namespace erprop
