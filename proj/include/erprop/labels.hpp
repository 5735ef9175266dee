#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "erprop/graph.hpp"
#include "erprop/records.hpp"

namespace erprop {

/// Labels are record indices: every record starts out labelled by itself.
using Label = RecordIndex;

/// Current label of every record.
class LabelState {
 public:
  LabelState() = default;
  /// Identity labelling over n records.
  explicit LabelState(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  Label operator[](RecordIndex i) const { return labels_[i]; }
  const std::vector<Label>& labels() const { return labels_; }
  void set(RecordIndex i, Label l) { labels_[i] = l; }

  bool operator==(const LabelState&) const = default;

 private:
  std::vector<Label> labels_;
};

/// label -> members. Kept in lockstep with a LabelState via move().
class ClusterIndex {
 public:
  ClusterIndex() = default;
  explicit ClusterIndex(const LabelState& ls);

  const std::set<RecordIndex>& members(Label l) const { return members_[l]; }
  std::size_t largest_cluster() const;
  std::size_t cluster_count() const;

  /// Relabels `i` in both the state and the index. No-op when unchanged.
  void move(LabelState& ls, RecordIndex i, Label to);

  /// True when member sets partition all records consistently with `ls`.
  bool consistent_with(const LabelState& ls) const;

  /// Non-empty clusters, each sorted, ordered by smallest member.
  std::vector<std::vector<RecordIndex>> clusters() const;

 private:
  std::vector<std::set<RecordIndex>> members_;
};

/// Weighted neighbor-label mass, keyed by label in ascending order.
class LabelDistribution {
 public:
  using Entry = std::pair<Label, double>;

  LabelDistribution() = default;
  explicit LabelDistribution(std::vector<Entry> entries);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  double mass(Label l) const;

  /// Highest-mass entry; ties go to the smaller label.
  Entry argmax() const;

  /// Labels ranked by mass descending, then label ascending, truncated to m.
  std::vector<Label> top(std::size_t m) const;

 private:
  std::vector<Entry> entries_;
};

/// Weighted share of each label among i's out-neighbors; empty when i has no
/// neighbors or zero total weight.
LabelDistribution label_distribution(const EntityGraph& g, const LabelState& ls, RecordIndex i);

/// Label that weighted propagation would assign (the argmax) if its mass
/// exceeds theta; nullopt otherwise.
std::optional<Label> wlp_choice(const LabelDistribution& pi, double theta);

/// Applies wlp_choice to record i. Returns true when the label changed.
bool wlp_update(LabelState& ls, ClusterIndex& ci, RecordIndex i, const LabelDistribution& pi,
                double theta);

/// Groups records by label, sorted by smallest member.
std::vector<std::vector<RecordIndex>> clusters_from_labels(const LabelState& ls);

/// Most frequent neighbor label ignoring weights (ties: smaller label).
std::optional<Label> majority_vote_label(const EntityGraph& g, const LabelState& ls, RecordIndex i);

/// On a graph whose edge weights are all equal, checks that the weighted
/// argmax agrees with the plain majority vote at record i.
bool majority_vote_equivalence_check(const EntityGraph& g, const LabelState& ls, RecordIndex i);

}  // namespace erprop
