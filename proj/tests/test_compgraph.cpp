#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"

#include "isorank/compgraph.hpp"
#include "oracles.hpp"

using namespace isorank;
using namespace isorank::graph;

namespace {

Digraph make(int n, std::vector<std::pair<int, int>> edges) { return Digraph::from_edges(n, edges); }

// Random DAG: edges only from higher to lower labels of a random relabelling.
Digraph random_dag(int n, double density, std::mt19937_64& gen) {
  std::vector<int> label(static_cast<std::size_t>(n));
  std::iota(label.begin(), label.end(), 0);
  std::shuffle(label.begin(), label.end(), gen);
  std::bernoulli_distribution coin(density);
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < a; ++b)
      if (coin(gen)) edges.emplace_back(label[static_cast<std::size_t>(a)], label[static_cast<std::size_t>(b)]);
  return make(n, edges);
}

WeightedGraph random_weights(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g(0.0, 3.0);
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      w(i, j) = g(gen);
      w(j, i) = -w(i, j);
    }
  return WeightedGraph(w);
}

}  // namespace

TEST_SUITE("compgraph") {
  TEST_CASE("threshold_graph examples") {
    WeightedGraph W(3);
    CHECK(threshold_graph(W, 1.0).edge_count() == 0);
    W.apply_update(1, std::vector<WeightUpdate>{{2, 3.0}});
    const auto g2 = threshold_graph(W, 2.0);
    CHECK(g2.edge_count() == 1);
    CHECK(g2.has_edge(1, 2));
    CHECK_FALSE(g2.has_edge(2, 1));
    CHECK(threshold_graph(W, 4.0).edge_count() == 0);
    CHECK(threshold_graph(W, 3.0).edge_count() == 0);  // strict inequality
  }

  TEST_CASE("WeightedGraph rejects non-antisymmetric input") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(WeightedGraph{m}, InvalidArgument);
    m(1, 0) = -1.0;
    CHECK(WeightedGraph(m).is_antisymmetric());
  }

  TEST_CASE("apply_update examples") {
    WeightedGraph W(3);
    W.apply_update(0, std::vector<WeightUpdate>{{1, 2.0}});
    auto r = W.apply_update(0, std::vector<WeightUpdate>{{1, 1.0}});
    CHECK(W(0, 1) == 2.0);
    CHECK(r.changed == 0);
    r = W.apply_update(0, std::vector<WeightUpdate>{{1, -3.0}});
    CHECK(W(0, 1) == -3.0);
    CHECK(W(1, 0) == 3.0);
    CHECK(r.changed == 1);
    CHECK(r.max_abs == 3.0);
    W.apply_update(0, std::vector<WeightUpdate>{{2, 0.0}});
    CHECK(W(0, 2) == 0.0);
    r = W.apply_update(2, std::vector<WeightUpdate>{{1, 5.0}}, 4.0);
    CHECK(r.threshold_crossed);
    r = W.apply_update(2, std::vector<WeightUpdate>{{1, 5.5}}, 4.0);
    CHECK_FALSE(r.threshold_crossed);
    CHECK(W.is_antisymmetric());
  }

  TEST_CASE("is_acyclic examples") {
    CHECK(is_acyclic(make(3, {{1, 2}, {2, 0}})));
    CHECK_FALSE(is_acyclic(make(3, {{1, 2}, {2, 1}})));
    CHECK(is_acyclic(Digraph(4)));
    CHECK_FALSE(topological_order(make(3, {{0, 1}, {1, 2}, {2, 0}})).has_value());
  }

  TEST_CASE("relative_rank examples") {
    // chain 2 -> 1 -> 0
    const auto g = make(3, {{2, 1}, {1, 0}});
    const auto rk = relative_rank(g, 2);
    CHECK(rk.rank == std::vector<int>{2, 1, 0});
    const auto none = relative_rank(Digraph(4), 1);
    CHECK(none.rank == std::vector<int>{0, 0, 0, 0});
    CHECK(none.top == -1);
    CHECK(none.bottom == 1);
    CHECK_THROWS_AS(relative_rank(make(2, {{0, 1}, {1, 0}}), 0), InvalidArgument);
  }

  TEST_CASE("neighborhood examples") {
    CHECK(neighborhood(Digraph(3), 1) == IndexList{0, 1, 2});
    CHECK(neighborhood(make(3, {{2, 1}, {1, 0}}), 1) == IndexList{1});
    CHECK(neighborhood(make(4, {{3, 0}}), 1) == IndexList{0, 1, 2, 3});
  }

  TEST_CASE("banded neighborhoods on the empty graph hold only the virtual vertices at a = 1") {
    const auto b = banded_neighborhoods(Digraph(3), IndexList{0, 1}, 1);
    CHECK(b.above.empty());
    CHECK(b.below.empty());
    CHECK(b.top);
    CHECK(b.bottom);
  }

  TEST_CASE("banded neighborhoods on a chain follow the max-distance rule") {
    // chain 3 -> 2 -> 1 -> 0, P = {1, 2}
    const auto g = make(4, {{3, 2}, {2, 1}, {1, 0}});
    const auto b1 = banded_neighborhoods(g, IndexList{1, 2}, 1);
    CHECK(b1.above.empty());  // 3 is two steps above 1
    CHECK(b1.below.empty());
    const auto b2 = banded_neighborhoods(g, IndexList{1, 2}, 2);
    CHECK(b2.above == IndexList{3});
    CHECK(b2.below == IndexList{0});
    CHECK_FALSE(b2.top);
    const auto b3 = banded_neighborhoods(g, IndexList{1, 2}, 3);
    CHECK(b3.top);
    CHECK(b3.bottom);
  }

  TEST_CASE("smallest_acyclic_threshold examples") {
    const std::vector<double> grid{1.0, 2.0, 3.0};
    CHECK(smallest_acyclic_threshold(WeightedGraph(3), grid) == 1.0);
    // 3-cycle with weights 5: 0 > 1 > 2 > 0
    WeightedGraph W(3);
    W.apply_update(0, std::vector<WeightUpdate>{{1, 5.0}});
    W.apply_update(1, std::vector<WeightUpdate>{{2, 5.0}});
    W.apply_update(2, std::vector<WeightUpdate>{{0, 5.0}});
    CHECK(smallest_acyclic_threshold(W, std::vector<double>{1.0, 6.0}) == 6.0);
    CHECK(std::isinf(smallest_acyclic_threshold(W, std::vector<double>{1.0, 2.0})));
  }

  TEST_CASE("smallest_acyclic_threshold matches a linear scan") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 200; ++trial) {
      const auto W = random_weights(6, gen);
      std::vector<double> grid;
      for (int u = 1; u <= 40; ++u) grid.push_back(0.25 * u);
      double scan = std::numeric_limits<double>::infinity();
      for (double g : grid)
        if (oracle::is_acyclic(oracle::edges_of(threshold_graph(W, g)))) {
          scan = g;
          break;
        }
      CHECK(smallest_acyclic_threshold(W, grid) == scan);
    }
  }

  TEST_CASE("threshold monotonicity") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    for (int trial = 0; trial < 300; ++trial) {
      const auto W = random_weights(7, gen);
      double a = u(gen), b = u(gen);
      if (a > b) std::swap(a, b);
      const auto lo = threshold_graph(W, a), hi = threshold_graph(W, b);
      for (auto [i, j] : hi.edges()) CHECK(lo.has_edge(i, j));
    }
  }

  TEST_CASE("mirsky examples") {
    const auto chain = make(3, {{2, 1}, {1, 0}});
    const auto pi = mirsky_permutation(chain);
    CHECK(pi(0) == 0);
    CHECK(pi(2) == 2);
    CHECK(mirsky_permutation(Digraph(4)) == Permutation::identity(4));
    CHECK_THROWS_AS(mirsky_permutation(make(2, {{0, 1}, {1, 0}})), InvalidArgument);
    // tie score orders a level
    const std::vector<double> score{3.0, 1.0, 2.0};
    CHECK(mirsky_permutation(Digraph(3), score).order() == IndexList{1, 2, 0});
  }

  TEST_CASE("guided extension is consistent and follows the score when free") {
    std::vector<double> score{0.3, 0.1, 0.2};
    CHECK(guided_permutation(Digraph(3), score).order() == IndexList{1, 2, 0});
    // 1 must sit above 0 even though its score is lower
    const auto pi = guided_permutation(make(3, {{1, 0}}), score);
    CHECK(pi(1) > pi(0));
    CHECK(pi.order() == IndexList{2, 0, 1});
    CHECK_THROWS_AS(guided_permutation(make(2, {{0, 1}, {1, 0}})), InvalidArgument);
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 200; ++trial) {
      const auto g = random_dag(8, 0.3, gen);
      std::vector<double> s(8);
      for (auto& x : s) x = std::uniform_real_distribution<double>(0, 1)(gen);
      const auto p = guided_permutation(g, s);
      for (auto [i, j] : g.edges()) CHECK(p(i) > p(j));
    }
  }

  TEST_CASE("DagAnalysis agrees with the path oracle on random DAGs") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 150; ++trial) {
      const int n = 2 + trial % 6;
      const auto g = random_dag(n, 0.35, gen);
      const auto e = oracle::edges_of(g);
      const DagAnalysis dag(g);
      for (int i = 0; i < n; ++i) {
        const auto want = oracle::relative_rank(e, i);
        const auto got = dag.rank_from(i);
        for (int j = 0; j < n; ++j) CHECK(got.rank[static_cast<std::size_t>(j)] == want[static_cast<std::size_t>(j)]);
        CHECK(got.bottom == want[static_cast<std::size_t>(n)]);
        CHECK(got.top == want[static_cast<std::size_t>(n + 1)]);
        CHECK(dag.neighborhood(i) == oracle::neighborhood(e, i));
      }
      std::uniform_int_distribution<int> pick(0, n - 1);
      IndexList P{pick(gen)};
      const int extra = pick(gen);
      if (extra != P[0]) P.push_back(extra);
      std::sort(P.begin(), P.end());
      for (int a = 1; a <= n + 2; ++a) {
        const auto want = oracle::bands(e, P, a);
        const auto got = banded_neighborhoods(g, P, a);
        CHECK(got.above == want.above);
        CHECK(got.below == want.below);
        CHECK(got.top == want.top);
        CHECK(got.bottom == want.bottom);
      }
    }
  }

  TEST_CASE("mirsky levels and consistency on random DAGs") {
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 200; ++trial) {
      const auto g = random_dag(8, 0.25, gen);
      const auto e = oracle::edges_of(g);
      CHECK(mirsky_levels(g) == oracle::mirsky_levels(e));
      const auto pi = mirsky_permutation(g);
      for (auto [i, j] : g.edges()) CHECK(pi(i) > pi(j));
    }
  }

  TEST_CASE("graph dump round trip of edges") {
    const auto g = make(4, {{3, 1}, {2, 0}});
    const auto e = g.edges();
    CHECK(e.size() == 2);
    CHECK(Digraph::from_edges(4, e).edges() == e);
  }
}
