#pragma once

// Antisymmetric comparison weights between experts and the directed graphs
// obtained by thresholding them.
//
// Edge (i, j) reads "i is above j". Real vertices are 0..n-1. Two virtual
// vertices complete the graph: `bottom` lies below every real vertex and `top`
// above every real vertex (and above bottom). Every other virtual vertex of the
// integer extension is path-equivalent to one of these two, so ranks computed
// on this finite graph are the same as on the infinite one.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "isorank/types.hpp"

namespace isorank::graph {

struct WeightUpdate {
  int j;
  double value;  // proposed W(i, j)
};

struct UpdateResult {
  int changed = 0;              // number of pairs whose weight was replaced
  bool threshold_crossed = false;  // the edge set at the queried threshold changed
  double max_abs = 0.0;         // largest |value| among replaced pairs
};

class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(int n) : n_(n), w_(Matrix::Zero(n, n)) {}
  // Takes an explicit matrix; rejects one that is not exactly antisymmetric.
  explicit WeightedGraph(Matrix w);

  int n() const { return n_; }
  double operator()(int i, int j) const { return w_(i, j); }
  const Matrix& weights() const { return w_; }
  double max_abs() const { return n_ == 0 ? 0.0 : w_.cwiseAbs().maxCoeff(); }

  // For each update with |value| >= |W(i,j)|: W(i,j) = value, W(j,i) = -value.
  // When `gamma` is given, reports whether G(W, gamma) changed.
  UpdateResult apply_update(int i, std::span<const WeightUpdate> updates,
                            std::optional<double> gamma = std::nullopt);

  bool is_antisymmetric() const;

 private:
  int n_ = 0;
  Matrix w_;
};

class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(int n);
  static Digraph from_edges(int n, std::span<const std::pair<int, int>> edges);

  int n() const { return n_; }
  void add_edge(int i, int j);
  bool has_edge(int i, int j) const;
  const IndexList& out(int i) const { return out_[static_cast<std::size_t>(i)]; }
  const IndexList& in(int i) const { return in_[static_cast<std::size_t>(i)]; }
  std::size_t edge_count() const { return edges_; }
  std::vector<std::pair<int, int>> edges() const;

 private:
  int n_ = 0;
  std::size_t edges_ = 0;
  std::vector<IndexList> out_, in_;
  std::vector<std::uint64_t> bits_;  // n x n adjacency bits
  std::size_t words_ = 0;
};

// Edges (i, j) with W(i, j) > gamma.
Digraph threshold_graph(const WeightedGraph& g, double gamma);

bool is_acyclic(const Digraph& g);

// Sources (top-most vertices) first; nullopt when the graph has a cycle.
std::optional<IndexList> topological_order(const Digraph& g);

// rank[j] = (longest path i -> j) - (longest path j -> i), max of nothing = 0.
// Positive values are below i, negative values above i.
struct RankProfile {
  int reference = 0;
  std::vector<int> rank;  // real vertices
  int bottom = 0;         // rank of the virtual bottom vertex
  int top = 0;            // rank of the virtual top vertex
};

RankProfile relative_rank(const Digraph& g, int i);

// Real vertices not comparable with i (always contains i).
IndexList neighborhood(const Digraph& g, int i);

// Experts above (resp. below) every member of P and within a steps of each.
struct BandedNeighborhoods {
  IndexList above;  // N_a, real vertices
  IndexList below;  // N_{-a}, real vertices
  bool top = false;     // virtual top vertex belongs to N_a
  bool bottom = false;  // virtual bottom vertex belongs to N_{-a}

  std::size_t above_size(bool count_virtual = true) const { return above.size() + (count_virtual && top); }
  std::size_t below_size(bool count_virtual = true) const { return below.size() + (count_virtual && bottom); }
};

BandedNeighborhoods banded_neighborhoods(const Digraph& g, std::span<const int> P, int a);

// Least grid value whose thresholded graph is acyclic; +infinity when none of
// the grid values works. `grid` must be sorted ascending.
double smallest_acyclic_threshold(const WeightedGraph& g, std::span<const double> grid);

// Linear extension ranking vertices by longest-path level above the bottom;
// equal levels are ordered by `tie_score` when given (ascending), then index.
// Edge (i, j) implies pi(i) > pi(j).
Permutation mirsky_permutation(const Digraph& g, std::span<const double> tie_score = {});

// Greedy linear extension: repeatedly ranks next the remaining vertex with
// nothing remaining below it and the least `score` (then index). Throws on a cycle.
Permutation guided_permutation(const Digraph& g, std::span<const double> score = {});

// Longest-path level of each vertex: 0 for vertices with nothing below them.
std::vector<int> mirsky_levels(const Digraph& g);

// Precomputed order structure of a DAG, shared by all rank queries on it.
class DagAnalysis {
 public:
  // Throws InvalidArgument when g has a cycle.
  explicit DagAnalysis(Digraph g);

  int n() const { return n_; }
  const Digraph& graph() const { return g_; }
  const IndexList& order() const { return order_; }
  // Longest path from v down to any real vertex / from any real vertex to v.
  int height(int v) const { return height_[static_cast<std::size_t>(v)]; }
  int depth(int v) const { return depth_[static_cast<std::size_t>(v)]; }
  bool reaches(int u, int v) const;  // a nonempty path u -> v exists

  RankProfile rank_from(int i) const;
  IndexList neighborhood(int i) const;

  // For each real j above every member of P, max over i' in P of the longest
  // path j -> i' (-1 when j is not above all of P); likewise below. The top
  // and bottom entries hold the distances of the virtual vertices.
  struct BandDistances {
    std::vector<int> above;
    std::vector<int> below;
    int top = 0;
    int bottom = 0;
  };
  BandDistances band_distances(std::span<const int> P) const;

 private:
  Digraph g_;
  int n_;
  std::size_t words_;
  IndexList order_;
  std::vector<int> height_, depth_;
  std::vector<std::uint64_t> desc_, anc_;  // n x words_ bitsets
};

}  // namespace isorank::graph
