#include "isorank/compgraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace isorank::graph {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::min() / 4;

std::size_t word_count(int n) { return (static_cast<std::size_t>(n) + 63) / 64; }

}  // namespace

WeightedGraph::WeightedGraph(Matrix w) : n_(static_cast<int>(w.rows())), w_(std::move(w)) {
  if (w_.rows() != w_.cols()) throw InvalidArgument("WeightedGraph: matrix must be square");
  if (!is_antisymmetric()) throw InvalidArgument("WeightedGraph: matrix must be antisymmetric");
}

bool WeightedGraph::is_antisymmetric() const {
  for (int i = 0; i < n_; ++i) {
    if (w_(i, i) != 0.0) return false;
    for (int j = i + 1; j < n_; ++j)
      if (w_(i, j) != -w_(j, i)) return false;
  }
  return true;
}

UpdateResult WeightedGraph::apply_update(int i, std::span<const WeightUpdate> updates, std::optional<double> gamma) {
  if (i < 0 || i >= n_) throw InvalidArgument("apply_update: reference vertex out of range");
  UpdateResult res;
  for (const auto& u : updates) {
    if (u.j == i) throw InvalidArgument("apply_update: reference vertex cannot update itself");
    if (u.j < 0 || u.j >= n_) throw InvalidArgument("apply_update: vertex out of range");
    const double old = w_(i, u.j);
    if (std::abs(u.value) < std::abs(old) || u.value == old) continue;
    if (gamma) {
      const double g = *gamma;
      if ((old > g) != (u.value > g) || (-old > g) != (-u.value > g)) res.threshold_crossed = true;
    }
    w_(i, u.j) = u.value;
    w_(u.j, i) = -u.value;
    ++res.changed;
    res.max_abs = std::max(res.max_abs, std::abs(u.value));
  }
  return res;
}

Digraph::Digraph(int n)
    : n_(n),
      out_(static_cast<std::size_t>(n)),
      in_(static_cast<std::size_t>(n)),
      bits_(static_cast<std::size_t>(n) * word_count(n), 0),
      words_(word_count(n)) {
  if (n < 0) throw InvalidArgument("Digraph: negative size");
}

Digraph Digraph::from_edges(int n, std::span<const std::pair<int, int>> edges) {
  Digraph g(n);
  for (auto [i, j] : edges) g.add_edge(i, j);
  return g;
}

void Digraph::add_edge(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw InvalidArgument("Digraph::add_edge: vertex out of range");
  if (has_edge(i, j)) return;
  bits_[static_cast<std::size_t>(i) * words_ + static_cast<std::size_t>(j) / 64] |= std::uint64_t{1} << (j % 64);
  out_[static_cast<std::size_t>(i)].push_back(j);
  in_[static_cast<std::size_t>(j)].push_back(i);
  ++edges_;
}

bool Digraph::has_edge(int i, int j) const {
  return (bits_[static_cast<std::size_t>(i) * words_ + static_cast<std::size_t>(j) / 64] >> (j % 64)) & 1U;
}

std::vector<std::pair<int, int>> Digraph::edges() const {
  std::vector<std::pair<int, int>> e;
  e.reserve(edges_);
  for (int i = 0; i < n_; ++i)
    for (int j : out(i)) e.emplace_back(i, j);
  return e;
}

Digraph threshold_graph(const WeightedGraph& g, double gamma) {
  const int n = g.n();
  Digraph out(n);
  const Matrix& w = g.weights();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) > gamma) out.add_edge(i, j);
  return out;
}

std::optional<IndexList> topological_order(const Digraph& g) {
  const int n = g.n();
  std::vector<int> indeg(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) indeg[static_cast<std::size_t>(v)] = static_cast<int>(g.in(v).size());
  IndexList order;
  order.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    if (indeg[static_cast<std::size_t>(v)] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head)
    for (int c : g.out(order[head]))
      if (--indeg[static_cast<std::size_t>(c)] == 0) order.push_back(c);
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

bool is_acyclic(const Digraph& g) { return topological_order(g).has_value(); }

DagAnalysis::DagAnalysis(Digraph g) : g_(std::move(g)), n_(g_.n()), words_(word_count(n_)) {
  auto order = topological_order(g_);
  if (!order) throw InvalidArgument("DagAnalysis: graph has a cycle");
  order_ = std::move(*order);
  const auto n = static_cast<std::size_t>(n_);
  height_.assign(n, 0);
  depth_.assign(n, 0);
  desc_.assign(n * words_, 0);
  anc_.assign(n * words_, 0);
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    std::uint64_t* dv = &desc_[v * words_];
    for (int c : g_.out(*it)) {
      const auto cu = static_cast<std::size_t>(c);
      height_[v] = std::max(height_[v], height_[cu] + 1);
      const std::uint64_t* dc = &desc_[cu * words_];
      for (std::size_t w = 0; w < words_; ++w) dv[w] |= dc[w];
      dv[cu / 64] |= std::uint64_t{1} << (cu % 64);
    }
  }
  for (int vi : order_) {
    const auto v = static_cast<std::size_t>(vi);
    std::uint64_t* av = &anc_[v * words_];
    for (int p : g_.in(vi)) {
      const auto pu = static_cast<std::size_t>(p);
      depth_[v] = std::max(depth_[v], depth_[pu] + 1);
      const std::uint64_t* ap = &anc_[pu * words_];
      for (std::size_t w = 0; w < words_; ++w) av[w] |= ap[w];
      av[pu / 64] |= std::uint64_t{1} << (pu % 64);
    }
  }
}

bool DagAnalysis::reaches(int u, int v) const {
  return (desc_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v) / 64] >> (v % 64)) & 1U;
}

RankProfile DagAnalysis::rank_from(int i) const {
  if (i < 0 || i >= n_) throw InvalidArgument("relative_rank: vertex out of range");
  const auto n = static_cast<std::size_t>(n_);
  std::vector<int> down(n, kUnreached), up(n, kUnreached);
  down[static_cast<std::size_t>(i)] = 0;
  up[static_cast<std::size_t>(i)] = 0;
  for (int v : order_) {
    const int dv = down[static_cast<std::size_t>(v)];
    if (dv == kUnreached) continue;
    for (int c : g_.out(v)) down[static_cast<std::size_t>(c)] = std::max(down[static_cast<std::size_t>(c)], dv + 1);
  }
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const int uv = up[static_cast<std::size_t>(*it)];
    if (uv == kUnreached) continue;
    for (int p : g_.in(*it)) up[static_cast<std::size_t>(p)] = std::max(up[static_cast<std::size_t>(p)], uv + 1);
  }
  RankProfile rk;
  rk.reference = i;
  rk.rank.resize(n);
  for (std::size_t j = 0; j < n; ++j) rk.rank[j] = std::max(down[j], 0) - std::max(up[j], 0);
  rk.bottom = height(i) + 1;
  rk.top = -(depth(i) + 1);
  return rk;
}

IndexList DagAnalysis::neighborhood(int i) const {
  IndexList out;
  for (int j = 0; j < n_; ++j)
    if (j == i || (!reaches(i, j) && !reaches(j, i))) out.push_back(j);
  return out;
}

DagAnalysis::BandDistances DagAnalysis::band_distances(std::span<const int> P) const {
  if (P.empty()) throw InvalidArgument("band_distances: empty reference set");
  const auto n = static_cast<std::size_t>(n_);
  std::vector<std::uint64_t> above_all(words_, ~std::uint64_t{0}), below_all(words_, ~std::uint64_t{0});
  std::vector<char> in_p(n, 0);
  BandDistances bd;
  bd.top = 0;
  bd.bottom = 0;
  for (int p : P) {
    if (p < 0 || p >= n_) throw InvalidArgument("band_distances: vertex out of range");
    const auto pu = static_cast<std::size_t>(p);
    in_p[pu] = 1;
    for (std::size_t w = 0; w < words_; ++w) {
      above_all[w] &= anc_[pu * words_ + w];
      below_all[w] &= desc_[pu * words_ + w];
    }
    bd.top = std::max(bd.top, depth_[pu] + 1);
    bd.bottom = std::max(bd.bottom, height_[pu] + 1);
  }
  // Longest path from each vertex into P, and from P into each vertex.
  std::vector<int> into(n, kUnreached), from(n, kUnreached);
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    int best = in_p[v] ? 0 : kUnreached;
    for (int c : g_.out(*it)) best = std::max(best, into[static_cast<std::size_t>(c)] + 1);
    into[v] = best;
  }
  for (int vi : order_) {
    const auto v = static_cast<std::size_t>(vi);
    int best = in_p[v] ? 0 : kUnreached;
    for (int p : g_.in(vi)) best = std::max(best, from[static_cast<std::size_t>(p)] + 1);
    from[v] = best;
  }
  bd.above.assign(n, -1);
  bd.below.assign(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    if ((above_all[j / 64] >> (j % 64)) & 1U) bd.above[j] = into[j];
    if ((below_all[j / 64] >> (j % 64)) & 1U) bd.below[j] = from[j];
  }
  return bd;
}

RankProfile relative_rank(const Digraph& g, int i) { return DagAnalysis(g).rank_from(i); }

IndexList neighborhood(const Digraph& g, int i) {
  if (i < 0 || i >= g.n()) throw InvalidArgument("neighborhood: vertex out of range");
  return DagAnalysis(g).neighborhood(i);
}

BandedNeighborhoods banded_neighborhoods(const Digraph& g, std::span<const int> P, int a) {
  if (a < 1) throw InvalidArgument("banded_neighborhoods: a must be >= 1");
  const DagAnalysis dag(g);
  const auto bd = dag.band_distances(P);
  BandedNeighborhoods out;
  for (int j = 0; j < g.n(); ++j) {
    const int up = bd.above[static_cast<std::size_t>(j)];
    const int dn = bd.below[static_cast<std::size_t>(j)];
    if (up >= 1 && up <= a) out.above.push_back(j);
    if (dn >= 1 && dn <= a) out.below.push_back(j);
  }
  out.top = bd.top <= a;
  out.bottom = bd.bottom <= a;
  return out;
}

double smallest_acyclic_threshold(const WeightedGraph& g, std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidArgument("smallest_acyclic_threshold: grid not sorted");
  // Acyclicity is monotone in the threshold, so binary search applies; the
  // implicit +infinity sentinel past the end is always acyclic.
  std::size_t lo = 0, hi = grid.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (is_acyclic(threshold_graph(g, grid[mid])))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo < grid.size() ? grid[lo] : std::numeric_limits<double>::infinity();
}

std::vector<int> mirsky_levels(const Digraph& g) {
  const DagAnalysis dag(g);
  std::vector<int> level(static_cast<std::size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) level[static_cast<std::size_t>(v)] = dag.height(v);
  return level;
}

Permutation mirsky_permutation(const Digraph& g, std::span<const double> tie_score) {
  const std::vector<int> level = mirsky_levels(g);
  if (!tie_score.empty() && static_cast<int>(tie_score.size()) != g.n())
    throw InvalidArgument("mirsky_permutation: tie score size mismatch");
  IndexList order(static_cast<std::size_t>(g.n()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto au = static_cast<std::size_t>(a), bu = static_cast<std::size_t>(b);
    if (level[au] != level[bu]) return level[au] < level[bu];
    if (!tie_score.empty() && tie_score[au] != tie_score[bu]) return tie_score[au] < tie_score[bu];
    return a < b;
  });
  return Permutation::from_order(order);
}

Permutation guided_permutation(const Digraph& g, std::span<const double> score) {
  const int n = g.n();
  if (!score.empty() && static_cast<int>(score.size()) != n)
    throw InvalidArgument("guided_permutation: score size mismatch");
  auto before = [&](int a, int b) {
    const auto au = static_cast<std::size_t>(a), bu = static_cast<std::size_t>(b);
    if (!score.empty() && score[au] != score[bu]) return score[au] < score[bu];
    return a < b;
  };
  // std::priority_queue pops the largest, so invert the order.
  auto after = [&](int a, int b) { return before(b, a); };
  std::priority_queue<int, std::vector<int>, decltype(after)> ready(after);
  std::vector<int> below(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    below[static_cast<std::size_t>(v)] = static_cast<int>(g.out(v).size());
    if (below[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  IndexList order;
  order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int u : g.in(v))
      if (--below[static_cast<std::size_t>(u)] == 0) ready.push(u);
  }
  if (static_cast<int>(order.size()) != n) throw InvalidArgument("guided_permutation: graph has a cycle");
  return Permutation::from_order(order);
}

}  // namespace isorank::graph
