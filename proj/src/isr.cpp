#include "isorank/isr.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <limits>

namespace isorank::isr {

GridKind parse_grid_kind(const std::string& name) {
  if (name == "arithmetic") return GridKind::Arithmetic;
  if (name == "geometric") return GridKind::Geometric;
  if (name == "custom") return GridKind::Custom;
  throw InvalidArgument("unknown grid kind: " + name);
}

std::string to_string(GridKind kind) {
  switch (kind) {
    case GridKind::Arithmetic: return "arithmetic";
    case GridKind::Geometric: return "geometric";
    case GridKind::Custom: return "custom";
  }
  return "?";
}

double phi_l1(int n, int d, double delta) {
  if (n <= 0 || d <= 0) throw InvalidArgument("phi_l1: n and d must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("phi_l1: delta must lie in (0, 1)");
  return 1e4 * std::log(1e2 * static_cast<double>(n) * static_cast<double>(d) / delta);
}

int witness_length(int n) {
  if (n <= 0) throw InvalidArgument("witness_length: n must be positive");
  return 2 * static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) + 3;
}

namespace {

// Grid values are products like (u + 1) c, so exact spacings come out a few ulps short.
double slack(double x) { return x * (1.0 - 1e-12); }

}  // namespace

bool is_valid_witness(const std::vector<double>& witness, int n, double unit, WitnessRule rule) {
  if (static_cast<int>(witness.size()) != witness_length(n)) return false;
  const double last = witness.back();
  if (!(last >= slack(unit))) return false;
  const double gap = rule == WitnessRule::Spaced ? unit : last + unit;
  for (std::size_t u = 0; u + 1 < witness.size(); ++u)
    if (!(witness[u] - witness[u + 1] >= slack(gap))) return false;
  return true;
}

namespace {

// Smallest-first greedy chain starting at grid[start]; the greedy choice is
// optimal because each element only constrains the next one from below.
std::optional<std::vector<double>> greedy_chain(const std::vector<double>& grid, std::size_t start, int length,
                                                double gap) {
  std::vector<double> chain{grid[start]};
  auto it = grid.begin() + static_cast<std::ptrdiff_t>(start);
  while (static_cast<int>(chain.size()) < length) {
    it = std::lower_bound(it, grid.end(), chain.back() + slack(gap));
    if (it == grid.end()) return std::nullopt;
    chain.push_back(*it);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace

std::optional<std::vector<double>> find_witness(const std::vector<double>& grid, int n, double unit,
                                                WitnessRule rule) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidArgument("find_witness: grid not sorted");
  if (!(unit > 0.0)) throw InvalidArgument("find_witness: unit must be positive");
  const int length = witness_length(n);
  const auto first = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), slack(unit)) - grid.begin());
  if (rule == WitnessRule::Spaced) {
    if (first == grid.size()) return std::nullopt;
    return greedy_chain(grid, first, length, unit);
  }
  // The gap depends on the last element, so try each candidate for it.
  std::optional<std::vector<double>> best;
  for (std::size_t s = first; s < grid.size(); ++s) {
    if (best && grid[s] >= best->front()) break;
    auto chain = greedy_chain(grid, s, length, grid[s] + unit);
    if (chain && (!best || chain->front() < best->front())) best = std::move(chain);
  }
  return best;
}

double default_delta(int n, int d) {
  const double nd = static_cast<double>(n) * static_cast<double>(d);
  return 1.0 / (nd * nd);
}

GridConfig build_grid(GridKind kind, int n, int d, double delta, std::optional<double> scale,
                      const std::vector<double>& custom, WitnessRule rule) {
  GridConfig cfg;
  cfg.kind = kind;
  cfg.n = n;
  cfg.d = d;
  cfg.delta = delta;
  cfg.phi_L1 = phi_l1(n, d, delta);
  cfg.rule = rule;
  if (scale && !(*scale > 0.0)) throw InvalidArgument("build_grid: scale must be positive");
  cfg.unit = scale.value_or(cfg.phi_L1);
  const int length = witness_length(n);

  switch (kind) {
    case GridKind::Arithmetic: {
      const int count = rule == WitnessRule::Spaced ? length : 2 * length;
      for (int u = 0; u < count; ++u) cfg.grid.push_back((u + 1) * cfg.unit);
      if (rule == WitnessRule::Literal) {
        // Spacing 2c from c needs (2 length - 1) c; trim to the witness.
        auto w = find_witness(cfg.grid, n, cfg.unit, rule);
        if (w) cfg.grid.erase(std::upper_bound(cfg.grid.begin(), cfg.grid.end(), w->front()), cfg.grid.end());
      }
      break;
    }
    case GridKind::Geometric: {
      const double base = n >= 2 ? 1.0 + 1.0 / std::log2(static_cast<double>(n)) : 2.0;
      const double lb = std::log(base);
      double u = std::ceil(std::log(cfg.unit) / lb - 1e-12);
      while (std::pow(base, u) < cfg.unit) u += 1.0;
      for (int guard = 0; guard < 1000000; ++guard, u += 1.0) {
        cfg.grid.push_back(std::pow(base, u));
        if (static_cast<int>(cfg.grid.size()) >= length && find_witness(cfg.grid, n, cfg.unit, rule)) break;
      }
      break;
    }
    case GridKind::Custom:
      cfg.grid = custom;
      std::sort(cfg.grid.begin(), cfg.grid.end());
      cfg.grid.erase(std::unique(cfg.grid.begin(), cfg.grid.end()), cfg.grid.end());
      if (!cfg.grid.empty() && !(cfg.grid.front() > 0.0)) throw InvalidArgument("build_grid: thresholds must be positive");
      break;
  }
  auto w = find_witness(cfg.grid, n, cfg.unit, rule);
  if (!w) throw InvalidArgument("build_grid: grid admits no witness sequence");
  cfg.witness = *w;
  cfg.gamma_bar = w->front();
  return cfg;
}

Extension parse_extension(const std::string& name) {
  if (name == "mirsky") return Extension::Mirsky;
  if (name == "guided") return Extension::Guided;
  throw InvalidArgument("unknown extension: " + name);
}

std::string to_string(Extension e) { return e == Extension::Mirsky ? "mirsky" : "guided"; }

TieScore parse_tie_score(const std::string& name) {
  if (name == "index") return TieScore::Index;
  if (name == "weight") return TieScore::Weight;
  if (name == "row-mean") return TieScore::RowMean;
  throw InvalidArgument("unknown tie score: " + name);
}

std::string to_string(TieScore s) {
  switch (s) {
    case TieScore::Index: return "index";
    case TieScore::Weight: return "weight";
    case TieScore::RowMean: return "row-mean";
  }
  return "?";
}

std::vector<double> tie_scores(TieScore kind, const graph::WeightedGraph& W,
                               const sampling::BatchedObservations& batches) {
  const int n = W.n();
  std::vector<double> score;
  if (kind == TieScore::Index) return score;
  score.assign(static_cast<std::size_t>(n), 0.0);
  if (kind == TieScore::Weight) {
    for (int i = 0; i < n; ++i) score[static_cast<std::size_t>(i)] = W.weights().row(i).sum();
    return score;
  }
  if (batches.n() != n) throw InvalidArgument("tie_scores: batch and graph sizes differ");
  std::vector<double> count(static_cast<std::size_t>(n), 0.0);
  for (const auto& b : batches.batches)
    for (int i = 0; i < n; ++i) {
      score[static_cast<std::size_t>(i)] += (b.Y.row(i).array() * b.r.row(i).cast<double>().array()).sum();
      count[static_cast<std::size_t>(i)] += b.r.row(i).sum();
    }
  for (std::size_t i = 0; i < score.size(); ++i) score[i] /= std::max(count[i], 1.0);
  return score;
}

Permutation extract_permutation(const graph::WeightedGraph& W, double gamma, Extension extension,
                                std::span<const double> score) {
  const graph::Digraph g = graph::threshold_graph(W, gamma);
  if (extension == Extension::Guided) return graph::guided_permutation(g, score);
  return graph::mirsky_permutation(g, score);
}

ISRResult run_isr(const sampling::BatchedObservations& batches, const ISRConfig& config) {
  if (config.T < 1) throw InvalidArgument("run_isr: T must be >= 1");
  if (config.T > batches.T) throw InvalidArgument("run_isr: fewer than 5T batches");
  if (config.grid.grid.empty()) throw InvalidArgument("run_isr: empty grid");
  const int n = batches.n(), d = batches.d();
  if (n <= 0 || d <= 0) throw InvalidArgument("run_isr: empty batches");

  ISRResult out;
  out.W = graph::WeightedGraph(n);
  const auto& grid = config.grid.grid;

  slr::SlrConfig sc;
  sc.heights = config.heights;
  if (sc.heights.empty()) {
    sc.heights = slr::height_grid(n, d);
    std::reverse(sc.heights.begin(), sc.heights.end());
  }
  sc.lambda0 = batches.lambda0;
  sc.lambda1 = batches.lambda1;
  sc.count_virtual_in_bands = config.count_virtual_in_bands;
  sc.spectral = config.spectral;
  sc.spectral.power.seed = config.seed ^ sc.spectral.power.seed;
  sc.exec = config.exec;
  sc.trace = config.trace;

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto over_budget = [&] {
    if (!config.time_budget_seconds) return false;
    return std::chrono::duration<double>(clock::now() - start).count() > *config.time_budget_seconds;
  };

  double gamma_hat = 0.0;
  for (int t = 0; t < config.T && !out.timed_out && n > 1; ++t) {
    const auto window = batches.window(t);
    sc.step = t;
    const auto from = std::lower_bound(grid.begin(), grid.end(), gamma_hat);
    for (auto g = from; g != grid.end() && !out.timed_out; ++g) {
      slr::GraphCache cache;
      cache.invalidate();
      for (int i = 0; i < n; ++i) {
        const auto s = slr::slr_pass(window, out.W, *g, i, sc, &cache);
        ++out.passes;
        out.skipped_cyclic += s.skipped_cyclic;
        out.stopped_cyclic += s.stopped_cyclic;
        out.spectral_failures += s.spectral_failures;
        if (s.skipped_cyclic) break;  // the graph at this threshold no longer changes
        if (over_budget()) {
          out.timed_out = true;
          break;
        }
      }
    }
    // Searching only above the previous value keeps the sequence nondecreasing
    // even when a sign flip makes a lower threshold acyclic again.
    const std::vector<double> rest(std::lower_bound(grid.begin(), grid.end(), gamma_hat), grid.end());
    gamma_hat = rest.empty() ? std::numeric_limits<double>::infinity()
                             : graph::smallest_acyclic_threshold(out.W, rest);
    out.gamma_trajectory.push_back(gamma_hat);
  }
  if (n == 1) gamma_hat = grid.front();
  out.gamma_hat = gamma_hat;
  const auto score = tie_scores(config.tie_score, out.W, batches);
  out.pi_hat = extract_permutation(out.W, gamma_hat, config.extension, score);
  return out;
}

namespace {

double log_nd_over_delta(int n, int d, double delta) {
  return std::log(static_cast<double>(n) * static_cast<double>(d) / delta);
}

}  // namespace

ISRConfig practical_preset(int n, int d, double lambda, std::optional<double> delta, PracticalConstants constants) {
  if (!(lambda > 0.0)) throw InvalidArgument("practical_preset: lambda must be positive");
  if (constants.T < 1 || !(constants.kappa > 0.0)) throw InvalidArgument("practical_preset: bad constants");
  const double dl = delta.value_or(default_delta(n, d));
  ISRConfig cfg;
  cfg.T = constants.T;
  const double c = constants.kappa * std::sqrt(log_nd_over_delta(n, d, dl));
  cfg.grid = build_grid(GridKind::Arithmetic, n, d, dl, c);
  cfg.extension = Extension::Guided;
  cfg.tie_score = TieScore::RowMean;
  cfg.preset = "practical";
  return cfg;
}

double theoretical_steps(int n, int d, std::optional<double> delta) {
  const auto grid = build_grid(GridKind::Arithmetic, n, d, delta.value_or(default_delta(n, d)));
  return 4.0 * std::ceil(std::pow(grid.gamma_bar, 6));
}

ISRConfig theoretical_preset(int n, int d, double lambda, std::optional<double> delta) {
  if (!(lambda > 0.0)) throw InvalidArgument("theoretical_preset: lambda must be positive");
  ISRConfig cfg;
  cfg.grid = build_grid(GridKind::Arithmetic, n, d, delta.value_or(default_delta(n, d)));
  const double steps = 4.0 * std::ceil(std::pow(cfg.grid.gamma_bar, 6));
  cfg.T = steps >= static_cast<double>(INT_MAX) ? INT_MAX : static_cast<int>(steps);
  cfg.preset = "theoretical";
  return cfg;
}

}  // namespace isorank::isr
