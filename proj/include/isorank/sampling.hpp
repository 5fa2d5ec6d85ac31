#pragma once

// Poissonized partial observations of a permuted isotonic matrix, and the
// split of one observation stream into 5T independent averaged batches.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isorank/types.hpp"

namespace isorank::sampling {

// Ground truth. M's rows sorted by pi_star (row i goes to rank pi_star(i))
// have nondecreasing columns; entries lie in [0, 1].
struct SignalInstance {
  Matrix M;
  Permutation pi_star;
  double lambda = 1.0;  // expected observations per entry

  int n() const { return static_cast<int>(M.rows()); }
  int d() const { return static_cast<int>(M.cols()); }
};

// Empty string when the invariants hold, otherwise a description of the
// first violation found.
std::string check_instance(const SignalInstance& inst, double tol = 0.0);

enum class NoiseKind {
  Gaussian,   // y = M + N(0, 1)
  Bernoulli,  // y ~ Bernoulli(M)
  None,       // y = M
};

struct NoiseModel {
  NoiseKind kind = NoiseKind::Gaussian;
};

NoiseKind parse_noise(const std::string& name);
std::string to_string(NoiseKind kind);

struct Observation {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct ObservationStream {
  int n = 0;
  int d = 0;
  double lambda = 0.0;
  std::vector<Observation> records;

  std::size_t size() const { return records.size(); }
};

// N ~ Poisson(lambda n d) records at uniform positions.
ObservationStream poissonize(const SignalInstance& inst, NoiseModel noise, std::uint64_t seed);

// Averaged observations of one batch. Y is 0 where r is 0; mask(i,k) = 1 iff r(i,k) >= 1.
struct Batch {
  Matrix Y;
  Eigen::MatrixXi r;

  int observed(int i, int k) const { return r(i, k) >= 1 ? 1 : 0; }
  Eigen::MatrixXi mask() const { return (r.array() >= 1).cast<int>(); }
};

struct LambdaEffective {
  double lambda0;
  double lambda1;
};

// lambda0 = lambda / 5T, lambda1 = 1 - exp(-lambda0).
LambdaEffective lambda_effective(double lambda, int T);

struct BatchedObservations {
  int T = 0;
  std::vector<Batch> batches;  // 5T of them
  double lambda0 = 0.0;
  double lambda1 = 0.0;

  int n() const { return batches.empty() ? 0 : static_cast<int>(batches.front().Y.rows()); }
  int d() const { return batches.empty() ? 0 : static_cast<int>(batches.front().Y.cols()); }
  // The five batches used at step t.
  std::span<const Batch> window(int t) const;
};

// Each record gets an independent uniform label in {0, ..., 5T-1}.
BatchedObservations subsample_batches(const ObservationStream& stream, int T, std::uint64_t seed);

// 5T batches in which every cell is observed exactly once with value M (no
// noise), labelled with the given lambda0. Used for the full-observation regime.
BatchedObservations full_observation_batches(const Matrix& M, int T, double lambda0);

// Splits a stream into `parts` independent streams by uniform labels; each
// part keeps lambda / parts as its sampling effort.
std::vector<ObservationStream> split_stream(const ObservationStream& stream, int parts, std::uint64_t seed);

// Per-cell counts of a stream.
Eigen::MatrixXi cell_counts(const ObservationStream& stream);

}  // namespace isorank::sampling
