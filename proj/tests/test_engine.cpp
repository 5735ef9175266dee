#include <map>

#include "doctest.h"
#include "erprop/engine.hpp"
#include "erprop/error.hpp"
#include "erprop/labels.hpp"
#include "erprop/oracle.hpp"
#include "erprop/planted.hpp"
#include "erprop/rng.hpp"

using namespace erprop;

namespace {

EntityGraph star(const std::vector<double>& weights) {
  EntityGraph g(weights.size() + 1);
  for (std::size_t j = 0; j < weights.size(); ++j) g.set_edge(0, j + 1, weights[j], EdgeOrigin::kKnn);
  return g;
}

std::vector<std::size_t> brute_majority(const EntityGraph& g, const LabelState& ls, RecordIndex i,
                                        bool& empty) {
  std::map<Label, std::size_t> count;
  for (const auto& e : g.neighbors(i)) ++count[ls[e.target]];
  empty = count.empty();
  std::size_t best = 0;
  for (const auto& [l, c] : count) best = std::max(best, c);
  std::vector<std::size_t> winners;
  for (const auto& [l, c] : count) {
    if (c == best) winners.push_back(l);
  }
  return winners;
}

EntityGraph random_unit_graph(Rng& rng, std::size_t n, double w) {
  EntityGraph g(n);
  const double p = rng.uniform(0.05, 0.5);
  for (RecordIndex i = 0; i < n; ++i) {
    for (RecordIndex j = 0; j < n; ++j) {
      if (i != j && rng.bernoulli(p)) g.set_edge(i, j, w, EdgeOrigin::kKnn);
    }
  }
  return g;
}

LabelState random_labels(Rng& rng, std::size_t n) {
  LabelState ls(n);
  const std::size_t k = 1 + rng.index(n);
  for (RecordIndex i = 0; i < n; ++i) ls.set(i, rng.index(k));
  return ls;
}

Dataset anonymous(std::size_t n) {
  std::vector<Record> r;
  for (std::size_t i = 0; i < n; ++i) r.push_back({"r" + std::to_string(i), {{"v", "x"}}});
  return Dataset(r);
}

}  // namespace

TEST_SUITE("labels") {

TEST_CASE("label distribution") {
  SUBCASE("even split") {
    const EntityGraph g = star({0.5, 0.5});
    LabelState ls(3);
    const auto pi = label_distribution(g, ls, 0);
    CHECK(pi.mass(1) == 0.5);
    CHECK(pi.mass(2) == 0.5);
  }
  SUBCASE("one label") {
    const EntityGraph g = star({0.3, 0.9, 0.2});
    LabelState ls(4);
    for (RecordIndex i = 1; i < 4; ++i) ls.set(i, 1);
    const auto pi = label_distribution(g, ls, 0);
    CHECK(pi.size() == 1);
    CHECK(pi.mass(1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("0.72 0.48 0.40") {
    const EntityGraph g = star({0.72, 0.48, 0.40});
    LabelState ls(4);
    ls.set(2, 1);
    const auto pi = label_distribution(g, ls, 0);
    CHECK(pi.mass(1) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(pi.mass(3) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pi.mass(0) == 0.0);
  }
  SUBCASE("no neighbors") {
    const EntityGraph g(2);
    CHECK(label_distribution(g, LabelState(2), 0).empty());
  }
}

TEST_CASE("masses sum to one on random graphs") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    EntityGraph g(n);
    for (RecordIndex i = 0; i < n; ++i) {
      for (RecordIndex j = 0; j < n; ++j) {
        if (i != j && rng.bernoulli(0.3)) g.set_edge(i, j, rng.uniform(0.01, 1.0), EdgeOrigin::kKnn);
      }
    }
    const LabelState ls = random_labels(rng, n);
    for (RecordIndex i = 0; i < n; ++i) {
      const auto pi = label_distribution(g, ls, i);
      if (pi.empty()) continue;
      double s = 0.0;
      for (const auto& [l, m] : pi.entries()) {
        CHECK(m >= 0.0);
        s += m;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("wlp update") {
  LabelState ls(3);
  ClusterIndex ci(ls);
  CHECK(wlp_update(ls, ci, 0, LabelDistribution({{1, 0.7}, {2, 0.3}}), 0.6));
  CHECK(ls[0] == 1);
  CHECK(ci.members(1) == std::set<RecordIndex>{0, 1});
  CHECK(ci.members(0).empty());

  CHECK_FALSE(wlp_update(ls, ci, 2, LabelDistribution({{0, 0.5}, {1, 0.5}}), 0.6));
  CHECK(ls[2] == 2);
  CHECK_FALSE(wlp_update(ls, ci, 2, LabelDistribution(), 0.1));
  CHECK(ls[2] == 2);
  // exactly at theta is not enough
  CHECK_FALSE(wlp_update(ls, ci, 2, LabelDistribution({{1, 0.6}, {0, 0.4}}), 0.6));
  CHECK(ci.consistent_with(ls));
}

TEST_CASE("tie goes to the smaller label every time") {
  for (int run = 0; run < 100; ++run) {
    LabelState ls(10);
    ClusterIndex ci(ls);
    CHECK(wlp_update(ls, ci, 0, LabelDistribution({{7, 0.5}, {3, 0.5}}), 0.4));
    CHECK(ls[0] == 3);
  }
}

TEST_CASE("distribution ranking") {
  const LabelDistribution pi({{4, 0.2}, {1, 0.2}, {9, 0.6}});
  CHECK(pi.argmax() == LabelDistribution::Entry{9, 0.6});
  CHECK(pi.top(5) == std::vector<Label>{9, 1, 4});
  CHECK(pi.top(2) == std::vector<Label>{9, 1});
}

TEST_CASE("clusters from labels") {
  LabelState ls(3);
  ls.set(1, 0);
  CHECK(clusters_from_labels(ls) == std::vector<std::vector<RecordIndex>>{{0, 1}, {2}});
  CHECK(clusters_from_labels(LabelState(4)).size() == 4);
  LabelState moved(3);
  moved.set(0, 2);
  CHECK(clusters_from_labels(moved) == std::vector<std::vector<RecordIndex>>{{0, 2}, {1}});
}

TEST_CASE("cluster index follows moves") {
  Rng rng(12);
  LabelState ls(40);
  ClusterIndex ci(ls);
  for (int step = 0; step < 2000; ++step) {
    const RecordIndex i = rng.index(40);
    ci.move(ls, i, ls[rng.index(40)]);
    REQUIRE(ci.consistent_with(ls));
  }
  CHECK(ci.clusters() == clusters_from_labels(ls));
  std::size_t largest = 0;
  for (const auto& c : clusters_from_labels(ls)) largest = std::max(largest, c.size());
  CHECK(ci.largest_cluster() == largest);
  CHECK(ci.cluster_count() == clusters_from_labels(ls).size());
}

TEST_CASE("majority vote equivalence small cases") {
  EntityGraph g = star({1.0, 1.0, 1.0});
  LabelState ls(4);
  ls.set(1, 5 % 4);
  ls.set(2, 1);
  ls.set(3, 2);
  CHECK(majority_vote_label(g, ls, 0) == Label{1});
  CHECK(majority_vote_equivalence_check(g, ls, 0));

  EntityGraph tie = star({1.0, 1.0});
  LabelState lt(3);
  CHECK(majority_vote_label(tie, lt, 0) == Label{1});
  CHECK(label_distribution(tie, lt, 0).argmax().first == 1);
  CHECK(majority_vote_equivalence_check(tie, lt, 0));
}

TEST_CASE("weighted argmax equals brute-force majority on unit-weight graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(49);
    const EntityGraph g = random_unit_graph(rng, n, trial % 2 ? 1.0 : 0.8);
    const LabelState ls = random_labels(rng, n);
    for (RecordIndex i = 0; i < n; ++i) {
      bool empty = false;
      const auto winners = brute_majority(g, ls, i, empty);
      const auto pi = label_distribution(g, ls, i);
      REQUIRE(empty == pi.empty());
      CHECK(majority_vote_equivalence_check(g, ls, i));
      if (empty) continue;
      CHECK(pi.argmax().first == winners.front());
      CHECK(majority_vote_label(g, ls, i) == winners.front());
    }
  }
}

}

TEST_SUITE("engine") {

TEST_CASE("run config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.theta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.theta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.theta = 1.0;
  cfg.budget = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.budget = 0.0;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("no budget and theta one keeps singletons") {
  PlantedSpec spec;
  spec.entities = 20;
  spec.seed = 3;
  const auto data = generate_planted(spec);
  RunConfig cfg;
  cfg.theta = 1.0;
  cfg.budget = 0.0;
  cfg.check_invariants = true;
  TrueOracle oracle(data.entity_of, cfg.selection.pricing);
  const auto r = run(data.records, EmbedderConfig{}, cfg, oracle);
  CHECK(r.clusters.cluster_count() == data.records.size());
  CHECK(r.transcript.empty());
  CHECK(r.ledger.consumed() == 0.0);
  CHECK(r.converged);
  CHECK(r.iterations.size() == 1);
}

TEST_CASE("three identical records merge through the oracle") {
  const std::vector<Record> recs = {{"a", {{"name", "Ann Lee"}}},
                                    {"b", {{"name", "Ann Lee"}}},
                                    {"c", {{"name", "Ann Lee"}}}};
  const Dataset d(recs);
  RunConfig cfg;
  cfg.graph.k = 2;
  cfg.budget = 1.0;
  cfg.check_invariants = true;
  TrueOracle oracle({0, 0, 0}, cfg.selection.pricing);
  const auto r = run(d, EmbedderConfig{}, cfg, oracle);
  REQUIRE(r.clusters.clusters().size() == 1);
  CHECK(r.clusters.clusters().front().size() == 3);
  CHECK(r.ledger.consumed() <= 1.0);
}

TEST_CASE("a NONE answer cuts the target loose") {
  EntityGraph g(3);
  g.set_edge(0, 1, 0.5, EdgeOrigin::kKnn);
  g.set_edge(0, 2, 0.5, EdgeOrigin::kKnn);
  g.set_edge(1, 0, 0.5, EdgeOrigin::kKnn);
  g.set_edge(2, 0, 0.5, EdgeOrigin::kKnn);
  const std::vector<Embedding> e(3, Embedding{{1.0, 0.0}, false});
  RunConfig cfg;
  cfg.budget = 1.0;
  cfg.check_invariants = true;
  TrueOracle oracle({0, 1, 2}, cfg.selection.pricing);
  const auto r = refine(g, e, anonymous(3), cfg, oracle);
  CHECK(r.graph.edge_count() == 0);
  CHECK(r.clusters.cluster_count() == 3);
  CHECK(r.transcript.size() == 1);
  CHECK_FALSE(r.transcript.front().choice);
  CHECK(r.converged);
}

TEST_CASE("a positive answer merges and upgrades the edge") {
  EntityGraph g(3);
  g.set_edge(0, 1, 0.5, EdgeOrigin::kKnn);
  g.set_edge(0, 2, 0.5, EdgeOrigin::kKnn);
  g.set_edge(1, 0, 0.5, EdgeOrigin::kKnn);
  const std::vector<Embedding> e(3, Embedding{{1.0, 0.0}, false});
  RunConfig cfg;
  cfg.budget = 1.0;
  cfg.check_invariants = true;
  TrueOracle oracle({0, 0, 1}, cfg.selection.pricing);
  const auto r = refine(g, e, anonymous(3), cfg, oracle);
  CHECK(r.labels[0] == r.labels[1]);
  CHECK(r.graph.weight(0, 1) == 1.0);
  CHECK(r.graph.weight(1, 0) == 1.0);
  CHECK(r.transcript.front().choice == std::size_t{1});
  double charged = 0.0;
  for (const auto& t : r.transcript) charged += t.cost;
  CHECK(charged == doctest::Approx(r.ledger.consumed()));
  CHECK(r.ledger.entries().size() == r.transcript.size());
}

TEST_CASE("beta is non-decreasing and bounded") {
  PlantedSpec spec;
  spec.entities = 30;
  spec.seed = 5;
  const auto data = generate_planted(spec);
  for (double budget : {0.0005, 0.002, 0.01}) {
    RunConfig cfg;
    cfg.budget = budget;
    cfg.check_invariants = true;
    TrueOracle oracle(data.entity_of, cfg.selection.pricing);
    const auto r = run(data.records, EmbedderConfig{}, cfg, oracle);
    double prev = 0.0;
    for (const auto& it : r.iterations) {
      CHECK(it.beta >= prev);
      CHECK(it.beta <= budget);
      prev = it.beta;
    }
    CHECK(r.ledger.consumed() <= budget);
    CHECK(r.clusters.consistent_with(r.labels));
    CHECK(r.clusters.clusters() == clusters_from_labels(r.labels));
  }
}

TEST_CASE("per-record query cap") {
  PlantedSpec spec;
  spec.entities = 15;
  spec.seed = 1;
  const auto data = generate_planted(spec);
  RunConfig cfg;
  cfg.budget = 1.0;
  cfg.selection.max_queries_per_record = 1;
  TrueOracle oracle(data.entity_of, cfg.selection.pricing);
  const auto r = run(data.records, EmbedderConfig{}, cfg, oracle);
  std::map<RecordIndex, int> per;
  for (const auto& t : r.transcript) ++per[t.target];
  for (const auto& [rec, count] : per) CHECK(count == 1);
}

TEST_CASE("runs are deterministic, also with shuffled visits") {
  PlantedSpec spec;
  spec.entities = 20;
  spec.seed = 9;
  const auto data = generate_planted(spec);
  for (bool shuffle : {false, true}) {
    RunConfig cfg;
    cfg.budget = 0.01;
    cfg.seed = 77;
    cfg.shuffle_visits = shuffle;
    NoisyOracle a(data.entity_of, 0.2, 5, cfg.selection.pricing);
    NoisyOracle b(data.entity_of, 0.2, 5, cfg.selection.pricing);
    const auto r1 = run(data.records, EmbedderConfig{}, cfg, a);
    const auto r2 = run(data.records, EmbedderConfig{}, cfg, b);
    CHECK(r1.labels == r2.labels);
    CHECK(r1.graph == r2.graph);
    CHECK(r1.ledger.entries() == r2.ledger.entries());
    CHECK(r1.transcript.size() == r2.transcript.size());
  }
}

namespace {
struct FailingOracle : Oracle {
  OracleAnswer ask(const OracleQuery&) override { throw OracleTransportError("down"); }
};
}  // namespace

TEST_CASE("oracle failure policy") {
  PlantedSpec spec;
  spec.entities = 10;
  const auto data = generate_planted(spec);
  RunConfig cfg;
  cfg.budget = 1.0;
  FailingOracle oracle;
  CHECK_THROWS_AS(run(data.records, EmbedderConfig{}, cfg, oracle), OracleTransportError);
  cfg.on_oracle_failure = OracleFailurePolicy::kTreatAsNone;
  cfg.check_invariants = true;
  const auto r = run(data.records, EmbedderConfig{}, cfg, oracle);
  CHECK(r.diagnostics.oracle_failures > 0);
  CHECK(r.ledger.consumed() == 0.0);
}

}
