#pragma once

// One soft local ranking pass around a reference expert i at threshold gamma.
//
// For every height h the pass selects the questions on which the experts just
// above and just below the neighborhood P of i differ by at least h, compares i
// with the rest of P by the average over those questions, then compares again
// with data-driven weights obtained from a heteroskedasticity-corrected
// spectral direction. Every comparison only ever raises |W|.

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "isorank/compgraph.hpp"
#include "isorank/kernels.hpp"
#include "isorank/sampling.hpp"
#include "isorank/types.hpp"

namespace isorank::slr {

// Dyadic heights 2^k in [1/(nd), 1], ascending.
std::vector<double> height_grid(int n, int d);

struct QuestionSelection {
  double h = 0.0;
  std::vector<int> a_hat;  // per question, >= 1
  IndexList questions;     // Q_hat
};

// Width statistics of one batch for a fixed graph and reference set.
//
// Band members are sorted by their distance to P so that every band mean,
// for every a, comes from one prefix sum. The virtual top vertex contributes
// the pseudo-row lambda1 * 1 and the virtual bottom vertex the zero row.
class WidthProfile {
 public:
  WidthProfile(const Matrix& Y, const graph::DagAnalysis& dag, std::span<const int> P, double lambda1);

  int n() const { return n_; }
  int d() const { return d_; }
  // Largest a scanned; above it both bands are saturated.
  int max_level() const { return n_ + 2; }

  // Mean of column k over N_a minus mean over N_{-a}; nullopt when either band is empty.
  std::optional<double> width(int k, int a) const;
  // (|N_a|, |N_{-a}|), optionally counting the virtual vertices.
  std::pair<std::size_t, std::size_t> band_sizes(int a, bool count_virtual) const;

  // 1 + max{a in [1, n+2] : width(k, a) / (lambda0 ^ 1) < h}, with an empty
  // band counted as narrow and max of nothing = 0.
  int select_level(int k, double h, double lambda0) const;
  QuestionSelection select_questions(double h, double lambda0, bool count_virtual) const;

 private:
  int segment_of(int a) const;

  int n_ = 0, d_ = 0;
  std::vector<int> seg_start_;                  // first a of each segment, ascending
  std::vector<std::size_t> above_real_, below_real_;
  std::vector<char> top_in_, bottom_in_;
  Matrix delta_;                                // segments x d, NaN when undefined
  Matrix suffix_min_;                           // segments x d, undefined -> -inf
};

// Free-standing forms of the statistics, for direct use and testing.
std::optional<double> width_statistic(const Matrix& Y, const graph::Digraph& G, std::span<const int> P, int k,
                                      int a, double lambda0);
int select_level(const Matrix& Y, const graph::Digraph& G, std::span<const int> P, int k, double h, double lambda0);
QuestionSelection select_questions(const Matrix& Y, const graph::Digraph& G, std::span<const int> P, double h,
                                   double lambda0, bool count_virtual = true);

// Nonnegative weights on a question subset.
struct UpdateVector {
  IndexList questions;
  std::vector<double> weights;

  bool is_zero() const;
  double norm2() const;
  double norm_inf() const;
};

// lambda0 ||w||_2^2 >= ||w||_inf^2.
bool satisfies_sparsity(const UpdateVector& w, double lambda0);

// U(i, j) = <Y_i - Y_j, w / ||w||_2> / sqrt(lambda0 ^ 1/lambda0) for j in P \ {i}.
std::vector<graph::WeightUpdate> updating_weights(const Matrix& Y, std::span<const int> P, const UpdateVector& w,
                                                  int i, double lambda0,
                                                  kernels::Exec exec = kernels::Exec::Parallel);

struct SpectralOptions {
  kernels::PowerIterationOptions power;
  // Up to this size the dense symmetric solver is used instead of power iteration.
  int dense_max = 512;
};

struct SpectralResult {
  enum class Status { Ok, NonPositive, NotConverged, Degenerate };
  Status status = Status::Degenerate;
  double eigenvalue = 0.0;
  Vector direction;  // unit vector when status == Ok
};

// Maximizer over the unit ball of ||v^T A2||^2 - 1/2 ||v^T (A2 - A3)||^2, i.e.
// the top eigenvector of A2 A2^T - 1/2 (A2 - A3)(A2 - A3)^T when its
// eigenvalue is positive. A2, A3 are centered restrictions to (P, Q).
SpectralResult spectral_direction(const Matrix& A2, const Matrix& A3, const SpectralOptions& opt = {},
                                  kernels::Exec exec = kernels::Exec::Parallel);

// Zeroes the entries with |v_i| > sqrt(lambda0).
Vector truncate_direction(const Vector& v, double lambda0);

// z = v^T A4; w_l = |z_l| when |z_l| >= gamma sqrt(lambda0 ^ 1/lambda0), else 0.
Vector image_weights(const Vector& v_minus, const Matrix& A4, double gamma, double lambda0);

struct PassTrace {
  int step = 0;
  double gamma = 0.0;
  int expert = 0;
  double h = 0.0;
  std::size_t neighborhood = 0;
  IndexList questions;
  int average_changed = 0;
  double average_max = 0.0;
  double eigenvalue = 0.0;
  IndexList weight_support;  // questions with positive spectral weight
  int spectral_changed = 0;
  double spectral_max = 0.0;
  bool stopped_cyclic = false;
};

using TraceSink = std::function<void(const PassTrace&)>;

struct SlrConfig {
  std::vector<double> heights;  // visited in this order
  double lambda0 = 1.0;
  double lambda1 = 1.0 - 0.36787944117144233;
  bool count_virtual_in_bands = true;
  SpectralOptions spectral;
  kernels::Exec exec = kernels::Exec::Parallel;
  int step = 0;  // echoed in traces
  TraceSink trace;
};

struct PassSummary {
  bool skipped_cyclic = false;  // G(W, gamma) was cyclic on entry
  bool stopped_cyclic = false;  // an update made G(W, gamma) cyclic
  int updates = 0;              // replaced weights
  int spectral_failures = 0;    // eigensolver did not converge
};

// Analysis of G(W, gamma) kept between passes. Valid as long as W is only
// modified through slr_pass with the same cache.
struct GraphCache {
  double gamma = 0.0;
  std::optional<graph::DagAnalysis> dag;
  bool cyclic = false;

  void invalidate() { dag.reset(); cyclic = false; gamma = std::numeric_limits<double>::quiet_NaN(); }
};

// One pass over all heights. `window` holds the five batches (Y1..Y5).
PassSummary slr_pass(std::span<const sampling::Batch> window, graph::WeightedGraph& W, double gamma, int i,
                     const SlrConfig& config, GraphCache* cache = nullptr);

}  // namespace isorank::slr
