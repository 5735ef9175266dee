#include "erprop/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "erprop/csv.hpp"
#include "erprop/error.hpp"

namespace erprop {

void GraphParams::validate() const {
  if (k < 1) throw ValidationError("K must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
  if (!(sigma_llm > 0.0) || !std::isfinite(sigma_llm)) {
    throw ValidationError("sigma_llm must be positive");
  }
}

std::size_t EntityGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : adjacency_) total += list.size();
  return total;
}

double EntityGraph::weight(RecordIndex i, RecordIndex j) const {
  for (const Edge& e : adjacency_[i]) {
    if (e.target == j) return e.weight;
  }
  return 0.0;
}

bool EntityGraph::has_edge(RecordIndex i, RecordIndex j) const {
  return std::any_of(adjacency_[i].begin(), adjacency_[i].end(),
                     [j](const Edge& e) { return e.target == j; });
}

void EntityGraph::set_edge(RecordIndex i, RecordIndex j, double weight, EdgeOrigin origin) {
  if (i == j) return;
  for (Edge& e : adjacency_[i]) {
    if (e.target == j) {
      e.weight = weight;
      e.origin = origin;
      return;
    }
  }
  adjacency_[i].push_back({j, weight, origin});
}

void EntityGraph::erase_edge(RecordIndex i, RecordIndex j) {
  auto& list = adjacency_[i];
  list.erase(std::remove_if(list.begin(), list.end(), [j](const Edge& e) { return e.target == j; }),
             list.end());
}

EntityGraph build_knn_graph(std::span<const Embedding> embeddings, const GraphParams& params) {
  params.validate();
  const std::size_t n = embeddings.size();
  if (n < 2) throw ValidationError("KNN graph needs at least two records");
  if (params.k >= n) {
    throw ValidationError("K (" + std::to_string(params.k) + ") must be smaller than n (" +
                          std::to_string(n) + ")");
  }

  EntityGraph g(n);
  std::vector<std::pair<double, RecordIndex>> scored;
  scored.reserve(n - 1);
  for (RecordIndex i = 0; i < n; ++i) {
    scored.clear();
    for (RecordIndex j = 0; j < n; ++j) {
      if (j != i) scored.emplace_back(cosine(embeddings[i], embeddings[j]), j);
    }
    auto better = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(params.k),
                      scored.end(), better);
    for (std::size_t r = 0; r < params.k; ++r) {
      const double w = params.alpha * scored[r].first;
      if (w > 0.0) g.set_edge(i, scored[r].second, w, EdgeOrigin::kKnn);
    }
  }
  return g;
}

void expand_neighborhood(EntityGraph& g, RecordIndex i, std::span<const RecordIndex> members,
                         double sigma_llm) {
  for (RecordIndex j : members) {
    if (j == i) continue;
    g.set_edge(i, j, sigma_llm, EdgeOrigin::kOracle);
    g.set_edge(j, i, sigma_llm, EdgeOrigin::kOracle);
  }
}

void remove_edges(EntityGraph& g, RecordIndex i, std::span<const RecordIndex> others) {
  for (RecordIndex k : others) {
    g.erase_edge(i, k);
    g.erase_edge(k, i);
  }
}

std::vector<std::string> check_graph_invariants(const EntityGraph& g, const GraphParams& params) {
  std::vector<std::string> problems;
  const double max_weight = std::max(params.alpha, params.sigma_llm);
  for (RecordIndex i = 0; i < g.size(); ++i) {
    std::unordered_set<RecordIndex> seen;
    for (const Edge& e : g.neighbors(i)) {
      const std::string edge = "(" + std::to_string(i) + "," + std::to_string(e.target) + ")";
      if (e.target >= g.size()) problems.push_back("edge " + edge + " points outside the graph");
      if (e.target == i) problems.push_back("self-loop at " + std::to_string(i));
      if (!seen.insert(e.target).second) problems.push_back("duplicate neighbor " + edge);
      if (!(e.weight > 0.0 && e.weight <= max_weight)) {
        problems.push_back("weight of " + edge + " outside (0, max]");
      }
      if (e.origin == EdgeOrigin::kOracle) {
        if (e.weight != params.sigma_llm) problems.push_back("oracle edge " + edge + " not at sigma");
        const auto& back = g.neighbors(e.target);
        auto it = std::find_if(back.begin(), back.end(), [i](const Edge& b) { return b.target == i; });
        if (it == back.end() || it->origin != EdgeOrigin::kOracle || it->weight != e.weight) {
          problems.push_back("oracle edge " + edge + " lacks a matching reverse edge");
        }
      } else if (e.weight > params.alpha) {
        problems.push_back("knn edge " + edge + " above alpha");
      }
    }
  }
  return problems;
}

std::vector<std::vector<std::size_t>> closed_neighborhood_blocks(const EntityGraph& g) {
  std::vector<std::vector<std::size_t>> blocks(g.size());
  for (RecordIndex i = 0; i < g.size(); ++i) {
    blocks[i].push_back(i);
    for (const Edge& e : g.neighbors(i)) blocks[e.target].push_back(i);
  }
  for (auto& b : blocks) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  return blocks;
}

double cross_block_match_ratio(std::span<const std::vector<std::size_t>> blocks,
                               std::span<const std::size_t> entity) {
  if (blocks.size() != entity.size()) {
    throw ValidationError("ground truth does not cover every blocked record");
  }
  std::vector<std::vector<std::size_t>> sorted(blocks.begin(), blocks.end());
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    if (sorted[r].empty()) throw ValidationError("record " + std::to_string(r) + " has no block");
    std::sort(sorted[r].begin(), sorted[r].end());
  }

  std::vector<std::vector<RecordIndex>> by_entity;
  for (RecordIndex r = 0; r < entity.size(); ++r) {
    if (entity[r] >= by_entity.size()) by_entity.resize(entity[r] + 1);
    by_entity[entity[r]].push_back(r);
  }

  std::size_t matches = 0;
  std::size_t split = 0;
  for (const auto& members : by_entity) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        ++matches;
        const auto& x = sorted[members[a]];
        const auto& y = sorted[members[b]];
        std::size_t p = 0, q = 0;
        bool shared = false;
        while (p < x.size() && q < y.size() && !shared) {
          if (x[p] == y[q]) shared = true;
          else if (x[p] < y[q]) ++p;
          else ++q;
        }
        if (!shared) ++split;
      }
    }
  }
  return matches == 0 ? 0.0 : static_cast<double>(split) / static_cast<double>(matches);
}

void write_edge_list(std::ostream& out, const EntityGraph& g, const Dataset& d) {
  out.precision(17);
  csv::write_row(out, {"src", "dst", "weight", "origin"});
  for (RecordIndex i = 0; i < g.size(); ++i) {
    for (const Edge& e : g.neighbors(i)) {
      out << csv::escape(d[i].id) << ',' << csv::escape(d[e.target].id) << ',' << e.weight << ','
          << (e.origin == EdgeOrigin::kKnn ? "knn" : "oracle") << '\n';
    }
  }
}

}  // namespace erprop
