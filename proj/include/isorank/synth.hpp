#pragma once

// Synthetic ground truths: random permuted isotonic matrices, the three-block
// toy instance, and hard instances drawn from the lower-bound prior.

#include <cstdint>
#include <string>
#include <vector>

#include "isorank/sampling.hpp"
#include "isorank/types.hpp"

namespace isorank::synth {

enum class Family {
  UniformSorted,  // each column an independent sorted uniform sample
  Block,          // rows in equal blocks, constant within a block
  Smooth,         // logistic profile per column
};

Family parse_family(const std::string& name);
std::string to_string(Family family);

// Rows of the sorted matrix S (row r has rank r) relabelled by a uniform pi_star.
sampling::SignalInstance permute_rows(const Matrix& sorted, double lambda, std::uint64_t seed);

sampling::SignalInstance gen_isotonic(int n, int d, Family family, std::uint64_t seed, double lambda = 1.0,
                                      int blocks = 4);

// Isotonic instance whose consecutive sorted rows differ by at least
// min_step in every column (so by d * min_step in L1). Needs min_step (n-1) <= 1.
sampling::SignalInstance gen_separated(int n, int d, double min_step, std::uint64_t seed, double lambda = 1.0);

// 204 x 10, pi_star = identity: 100 low rows, 4 middle rows, 100 high rows.
// Entries are alpha, alpha - h/2 or alpha + h/2.
sampling::SignalInstance gen_toy_34(double alpha, double h, double lambda = 1.0);

// The six columns (0-based) whose outer blocks differ.
std::vector<int> toy_34_signal_columns();
// The four columns on which the middle rows differ.
std::vector<int> toy_34_middle_columns();

// floor to a power of two: the largest 2^k <= x (x >= 1).
int floor_dyadic(double x);

struct LowerBoundParams {
  int p = 2;  // strip height, dyadic, divides n
  int q = 1;  // questions per strip, dyadic, <= d
  double upsilon = 0.0;
};

// Case 1: lambda n <= 1. Case 2: lambda in [1/n, 8 n^2]. Case 3: lambda >= 8 n^2.
// upsilon is the largest value allowed by the [0, 1] constraint.
LowerBoundParams lower_bound_case1(int n, int d, double lambda);
LowerBoundParams lower_bound_case2(int n, int d, double lambda);
LowerBoundParams lower_bound_case3(int n, int d, double lambda);
LowerBoundParams lower_bound_preset(int n, int d, double lambda);  // picks the case from lambda

// Subsets of [0, p) with p/2 elements, pairwise symmetric difference >= p/4.
std::vector<IndexList> packing_collection(int p, int count, std::uint64_t seed);

struct LowerBoundInstance {
  sampling::SignalInstance instance;
  LowerBoundParams params;
  Vector w;                        // step vector over sorted rows
  std::vector<IndexList> elevated;  // per strip, the raised sorted rows
  std::vector<IndexList> questions;  // per strip, the raised columns
};

// M = w 1^T + upsilon / sqrt(p lambda) B over sorted rows, then rows relabelled
// uniformly at random. Throws naming the violated constraint.
LowerBoundInstance gen_lower_bound(int n, int d, double lambda, const LowerBoundParams& params,
                                   std::uint64_t seed);

}  // namespace isorank::synth
