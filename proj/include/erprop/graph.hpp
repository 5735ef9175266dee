#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "erprop/embed.hpp"
#include "erprop/records.hpp"

namespace erprop {

enum class EdgeOrigin : std::uint8_t { kKnn, kOracle };

struct Edge {
  RecordIndex target;
  double weight;
  EdgeOrigin origin;

  bool operator==(const Edge&) const = default;
};

struct GraphParams {
  std::size_t k = 15;
  double alpha = 0.8;
  double sigma_llm = 1.0;

  void validate() const;
};

/// Mutable weighted neighbor lists over dataset records. KNN edges are
/// directed; oracle edges are always inserted in both directions.
class EntityGraph {
 public:
  EntityGraph() = default;
  explicit EntityGraph(std::size_t n) : adjacency_(n) {}

  std::size_t size() const { return adjacency_.size(); }
  const std::vector<Edge>& neighbors(RecordIndex i) const { return adjacency_[i]; }
  std::size_t edge_count() const;

  /// Weight of (i, j), or 0 when absent.
  double weight(RecordIndex i, RecordIndex j) const;
  bool has_edge(RecordIndex i, RecordIndex j) const;

  /// Adds or overwrites a single directed edge. Self-loops are ignored.
  void set_edge(RecordIndex i, RecordIndex j, double weight, EdgeOrigin origin);
  /// Removes (i, j) if present.
  void erase_edge(RecordIndex i, RecordIndex j);

  bool operator==(const EntityGraph&) const = default;

 private:
  std::vector<std::vector<Edge>> adjacency_;
};

/// Exact top-K by cosine per record (ties: smaller index), weighted
/// alpha * cosine. Non-positive weights are dropped.
EntityGraph build_knn_graph(std::span<const Embedding> embeddings, const GraphParams& params);

/// Links `i` to every member in both directions at weight sigma_llm,
/// overwriting existing weights. `i` itself is skipped if present.
void expand_neighborhood(EntityGraph& g, RecordIndex i, std::span<const RecordIndex> members,
                         double sigma_llm);

/// Drops (i, k) and (k, i) for each k in `others`.
void remove_edges(EntityGraph& g, RecordIndex i, std::span<const RecordIndex> others);

/// Returns a description of every violated invariant (empty when healthy):
/// self-loops, duplicate neighbors, weights outside (0, max_weight],
/// oracle edges without an equal-weight reverse oracle edge.
std::vector<std::string> check_graph_invariants(const EntityGraph& g, const GraphParams& params);

/// Block ids per record when each record's closed out-neighborhood forms a
/// block: record r belongs to block r and to block i for every edge (i, r).
std::vector<std::vector<std::size_t>> closed_neighborhood_blocks(const EntityGraph& g);

/// Fraction of true matching pairs that share no block. 0 when there are no
/// matches. `entity` maps each record to its true entity.
double cross_block_match_ratio(std::span<const std::vector<std::size_t>> blocks,
                               std::span<const std::size_t> entity);

/// Edge list CSV: src,dst,weight,origin.
void write_edge_list(std::ostream& out, const EntityGraph& g, const Dataset& d);

}  // namespace erprop
