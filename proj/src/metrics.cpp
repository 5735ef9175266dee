#include "erprop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "erprop/error.hpp"

namespace erprop {

namespace {

/// Cluster id per record; throws unless the clustering covers 0..n-1 once.
std::vector<std::size_t> assignment_of(const Clustering& c, std::size_t n) {
  std::vector<std::size_t> out(n, SIZE_MAX);
  for (std::size_t k = 0; k < c.size(); ++k) {
    for (RecordIndex r : c[k]) {
      if (r >= n) throw ValidationError("clusterings cover different records");
      if (out[r] != SIZE_MAX) throw ValidationError("record " + std::to_string(r) + " appears twice");
      out[r] = k;
    }
  }
  if (std::find(out.begin(), out.end(), SIZE_MAX) != out.end()) {
    throw ValidationError("clusterings cover different records");
  }
  return out;
}

std::size_t universe_size(const Clustering& x, const Clustering& y) {
  std::size_t nx = 0, ny = 0;
  for (const auto& c : x) nx += c.size();
  for (const auto& c : y) ny += c.size();
  if (nx != ny) throw ValidationError("clusterings cover different records");
  if (nx == 0) throw ValidationError("clusterings are empty");
  return nx;
}

/// Sparse contingency table between two validated clusterings.
std::map<std::pair<std::size_t, std::size_t>, std::size_t> contingency(const Clustering& x,
                                                                       const Clustering& y,
                                                                       std::size_t n) {
  const auto ax = assignment_of(x, n);
  const auto ay = assignment_of(y, n);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> table;
  for (std::size_t r = 0; r < n; ++r) ++table[{ax[r], ay[r]}];
  return table;
}

}  // namespace

Clustering clustering_from_assignment(std::span<const std::size_t> assignment) {
  std::map<std::size_t, std::vector<RecordIndex>> groups;
  for (RecordIndex r = 0; r < assignment.size(); ++r) groups[assignment[r]].push_back(r);
  Clustering out;
  for (auto& [id, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

double purity(const Clustering& x, const Clustering& y) {
  const std::size_t n = universe_size(x, y);
  const auto table = contingency(x, y, n);
  // With Overlap = |Xi ∩ Yj| / |Xi|, each term reduces to max_j |Xi ∩ Yj| / n.
  std::vector<std::size_t> best(x.size(), 0);
  for (const auto& [cell, count] : table) best[cell.first] = std::max(best[cell.first], count);
  double total = 0.0;
  for (std::size_t b : best) total += static_cast<double>(b);
  return total / static_cast<double>(n);
}

double inverse_purity(const Clustering& x, const Clustering& y) { return purity(y, x); }

double fp_measure(const Clustering& x, const Clustering& y) {
  const double p = purity(x, y);
  const double ip = inverse_purity(x, y);
  if (p == 0.0 || ip == 0.0) return 0.0;
  return 2.0 / (1.0 / p + 1.0 / ip);
}

double nmi(const Clustering& x, const Clustering& y) {
  const std::size_t n = universe_size(x, y);
  const auto table = contingency(x, y, n);
  const double total = static_cast<double>(n);

  auto entropy = [total](const Clustering& c) {
    double h = 0.0;
    for (const auto& members : c) {
      if (members.empty()) continue;
      const double p = static_cast<double>(members.size()) / total;
      h -= p * std::log(p);
    }
    return h;
  };
  const double hx = entropy(x);
  const double hy = entropy(y);
  if (hx == 0.0 && hy == 0.0) return 1.0;

  double mi = 0.0;
  for (const auto& [cell, count] : table) {
    const double pxy = static_cast<double>(count) / total;
    const double px = static_cast<double>(x[cell.first].size()) / total;
    const double py = static_cast<double>(y[cell.second].size()) / total;
    mi += pxy * std::log(pxy / (px * py));
  }
  return std::clamp(2.0 * mi / (hx + hy), 0.0, 1.0);
}

BudgetReport budget_report(const BudgetLedger& ledger, std::span<const TranscriptEntry> transcript,
                           std::optional<QualityMetrics> quality) {
  BudgetReport r;
  r.calls = transcript.size();
  for (const auto& e : transcript) {
    r.tokens_in += e.tokens_in;
    r.tokens_out += e.tokens_out;
  }
  r.cost = ledger.consumed();
  r.budget = ledger.budget();
  r.quality = quality;
  return r;
}

}  // namespace erprop
