#include "erprop/labels.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace erprop {

LabelState::LabelState(std::size_t n) : labels_(n) {
  std::iota(labels_.begin(), labels_.end(), Label{0});
}

ClusterIndex::ClusterIndex(const LabelState& ls) : members_(ls.size()) {
  for (RecordIndex i = 0; i < ls.size(); ++i) members_[ls[i]].insert(i);
}

std::size_t ClusterIndex::largest_cluster() const {
  std::size_t best = 0;
  for (const auto& m : members_) best = std::max(best, m.size());
  return best;
}

std::size_t ClusterIndex::cluster_count() const {
  return static_cast<std::size_t>(
      std::count_if(members_.begin(), members_.end(), [](const auto& m) { return !m.empty(); }));
}

void ClusterIndex::move(LabelState& ls, RecordIndex i, Label to) {
  const Label from = ls[i];
  if (from == to) return;
  members_[from].erase(i);
  members_[to].insert(i);
  ls.set(i, to);
}

bool ClusterIndex::consistent_with(const LabelState& ls) const {
  if (members_.size() != ls.size()) return false;
  std::size_t total = 0;
  for (Label l = 0; l < members_.size(); ++l) {
    for (RecordIndex r : members_[l]) {
      if (r >= ls.size() || ls[r] != l) return false;
    }
    total += members_[l].size();
  }
  return total == ls.size();
}

std::vector<std::vector<RecordIndex>> ClusterIndex::clusters() const {
  std::vector<std::vector<RecordIndex>> out;
  for (const auto& m : members_) {
    if (!m.empty()) out.emplace_back(m.begin(), m.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

LabelDistribution::LabelDistribution(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
}

double LabelDistribution::mass(Label l) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{l, -1.0});
  return (it != entries_.end() && it->first == l) ? it->second : 0.0;
}

LabelDistribution::Entry LabelDistribution::argmax() const {
  Entry best = entries_.front();
  for (const Entry& e : entries_) {
    if (e.second > best.second) best = e;
  }
  return best;
}

std::vector<Label> LabelDistribution::top(std::size_t m) const {
  std::vector<Entry> ranked = entries_;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Entry& a, const Entry& b) { return a.second > b.second; });
  std::vector<Label> out;
  for (std::size_t i = 0; i < std::min(m, ranked.size()); ++i) out.push_back(ranked[i].first);
  return out;
}

LabelDistribution label_distribution(const EntityGraph& g, const LabelState& ls, RecordIndex i) {
  std::map<Label, double> mass;
  double total = 0.0;
  for (const Edge& e : g.neighbors(i)) {
    mass[ls[e.target]] += e.weight;
    total += e.weight;
  }
  if (!(total > 0.0)) return {};
  std::vector<LabelDistribution::Entry> entries;
  entries.reserve(mass.size());
  for (const auto& [label, w] : mass) entries.emplace_back(label, w / total);
  return LabelDistribution(std::move(entries));
}

std::optional<Label> wlp_choice(const LabelDistribution& pi, double theta) {
  if (pi.empty()) return std::nullopt;
  const auto [label, mass] = pi.argmax();
  if (mass > theta) return label;
  return std::nullopt;
}

bool wlp_update(LabelState& ls, ClusterIndex& ci, RecordIndex i, const LabelDistribution& pi,
                double theta) {
  const auto choice = wlp_choice(pi, theta);
  if (!choice || *choice == ls[i]) return false;
  ci.move(ls, i, *choice);
  return true;
}

std::vector<std::vector<RecordIndex>> clusters_from_labels(const LabelState& ls) {
  std::map<Label, std::vector<RecordIndex>> groups;
  for (RecordIndex i = 0; i < ls.size(); ++i) groups[ls[i]].push_back(i);
  std::vector<std::vector<RecordIndex>> out;
  out.reserve(groups.size());
  for (auto& [label, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::optional<Label> majority_vote_label(const EntityGraph& g, const LabelState& ls, RecordIndex i) {
  std::map<Label, std::size_t> freq;
  for (const Edge& e : g.neighbors(i)) ++freq[ls[e.target]];
  if (freq.empty()) return std::nullopt;
  auto best = freq.begin();
  for (auto it = freq.begin(); it != freq.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

bool majority_vote_equivalence_check(const EntityGraph& g, const LabelState& ls, RecordIndex i) {
  const auto pi = label_distribution(g, ls, i);
  const auto vote = majority_vote_label(g, ls, i);
  if (pi.empty() || !vote) return pi.empty() == !vote.has_value();
  return pi.argmax().first == *vote;
}

}  // namespace erprop
