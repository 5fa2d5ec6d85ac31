#pragma once

// Slow reference implementations used to check the library. None of them
// calls into the code under test except for plain data types.

#include <optional>
#include <utility>
#include <vector>

#include "isorank/compgraph.hpp"
#include "isorank/types.hpp"

namespace oracle {

using isorank::IndexList;
using isorank::Matrix;
using isorank::Vector;

// Edge list over real vertices 0..n-1.
struct Edges {
  int n = 0;
  std::vector<std::pair<int, int>> list;
};

Edges edges_of(const isorank::graph::Digraph& g);
isorank::graph::Digraph to_digraph(const Edges& e);

// Transitive closure by repeated squaring of the reachability relation.
bool is_acyclic(const Edges& e);

// Longest simple path from u to v in the graph extended by bottom = n and
// top = n + 1 (top -> every real, every real -> bottom, top -> bottom), found
// by enumerating simple paths. nullopt when no path exists.
std::optional<int> longest_path(const Edges& e, int u, int v);

// rk(j) = longest(i -> j) - longest(j -> i), max of nothing = 0, for j in
// [0, n + 2) (n is bottom, n + 1 is top).
std::vector<int> relative_rank(const Edges& e, int i);

// Real vertices j with rk_i(j) = 0.
IndexList neighborhood(const Edges& e, int i);

// Longest path from v down to any real vertex, over real vertices only.
std::vector<int> mirsky_levels(const Edges& e);

// N_a and N_{-a} straight from the intersection of rank level sets; the last
// two flags say whether top / bottom belong.
struct Bands {
  IndexList above, below;
  bool top = false, bottom = false;
};
Bands bands(const Edges& e, const IndexList& P, int a);

// Column-k band means with pseudo-rows lambda1 (top) and 0 (bottom).
std::optional<double> width(const Matrix& Y, const Edges& e, const IndexList& P, int k, int a, double lambda1);

// min 1/2 sum_i w_i (x_i - y_i)^2 subject to A x <= b, by accelerated
// projected gradient on the dual (the dual feasible set is the orthant).
struct QpResult {
  Vector x;
  double objective = 0.0;
  double violation = 0.0;
  int iterations = 0;
};
QpResult solve_qp(const Vector& y, const Vector& w, const Matrix& A, const Vector& b, double tol = 1e-11,
                  int max_iter = 2000000);

// Layered graph for the 204-row toy instance: rows 104..203 above the middle
// block 100..103, rows 0..99 below it. Only `near` rows of each outer block
// sit one step from the middle block; the rest are one step further out.
isorank::graph::Digraph toy_layers(int near);

// Nondecreasing fit of y (optionally inside [0, 1]).
QpResult isotonic(const Vector& y, const Vector& w, bool box);

// Projection of Y onto [0, 1] matrices nondecreasing along rows and columns.
QpResult biisotonic(const Matrix& Y);

}  // namespace oracle
