#pragma once

// Threshold grids and the iterative soft ranking driver.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isorank/compgraph.hpp"
#include "isorank/sampling.hpp"
#include "isorank/slr.hpp"
#include "isorank/types.hpp"

namespace isorank::isr {

enum class GridKind { Arithmetic, Geometric, Custom };

GridKind parse_grid_kind(const std::string& name);
std::string to_string(GridKind kind);

// How consecutive witness elements must be spaced.
enum class WitnessRule {
  // gamma_u - gamma_{u+1} >= unit and gamma_last >= unit
  Spaced,
  // gamma_u - gamma_{u+1} >= gamma_last + unit and gamma_last >= unit
  Literal,
};

// 1e4 * log(1e2 * n d / delta).
double phi_l1(int n, int d, double delta);

// 2 floor(log2 n) + 3, with log2 of 1 taken as 0.
int witness_length(int n);

// Descending witness inside a sorted grid with the smallest possible first
// element; nullopt when the grid has none.
std::optional<std::vector<double>> find_witness(const std::vector<double>& grid, int n, double unit,
                                                WitnessRule rule = WitnessRule::Spaced);

bool is_valid_witness(const std::vector<double>& witness, int n, double unit, WitnessRule rule = WitnessRule::Spaced);

struct GridConfig {
  GridKind kind = GridKind::Arithmetic;
  int n = 0, d = 0;
  double delta = 0.0;
  double phi_L1 = 0.0;
  double unit = 0.0;  // spacing unit the witness is checked against; phi_L1 unless scaled
  WitnessRule rule = WitnessRule::Spaced;
  std::vector<double> grid;     // ascending
  std::vector<double> witness;  // descending
  double gamma_bar = 0.0;
};

// Arithmetic: {(u+1) c : u = 0..2 floor(log2 n)+2}. Geometric: the powers of
// 1 + 1/log2 n from the first one >= c up to the least gamma_bar. Custom: the
// given thresholds. c defaults to phi_L1. Throws when no witness exists.
GridConfig build_grid(GridKind kind, int n, int d, double delta, std::optional<double> scale = std::nullopt,
                      const std::vector<double>& custom = {}, WitnessRule rule = WitnessRule::Spaced);

double default_delta(int n, int d);  // 1 / (n d)^2

// How the final permutation is read off G(W, gamma_hat). Mirsky ranks by
// longest-path level and breaks ties by score; Guided is the greedy linear
// extension that always places the lowest-scoring available expert next.
enum class Extension { Mirsky, Guided };
Extension parse_extension(const std::string& name);
std::string to_string(Extension e);

// Index: no score. Weight: row sum of W. RowMean: observed row mean over all batches.
enum class TieScore { Index, Weight, RowMean };
TieScore parse_tie_score(const std::string& name);
std::string to_string(TieScore s);

struct ISRConfig {
  int T = 1;
  GridConfig grid;
  std::vector<double> heights;  // visited in this order; empty means descending dyadic heights
  bool count_virtual_in_bands = true;
  Extension extension = Extension::Mirsky;
  TieScore tie_score = TieScore::Index;
  slr::SpectralOptions spectral;
  kernels::Exec exec = kernels::Exec::Parallel;
  std::uint64_t seed = 0;
  std::optional<double> time_budget_seconds;
  std::string preset = "custom";
  slr::TraceSink trace;
};

struct ISRResult {
  graph::WeightedGraph W;
  Permutation pi_hat;
  double gamma_hat = 0.0;
  std::vector<double> gamma_trajectory;  // gamma_hat after each step
  long passes = 0;
  long skipped_cyclic = 0;
  long stopped_cyclic = 0;
  long spectral_failures = 0;
  bool timed_out = false;
};

ISRResult run_isr(const sampling::BatchedObservations& batches, const ISRConfig& config);

std::vector<double> tie_scores(TieScore kind, const graph::WeightedGraph& W,
                               const sampling::BatchedObservations& batches);

// Permutation consistent with G(W, gamma); an empty score means index order.
Permutation extract_permutation(const graph::WeightedGraph& W, double gamma, Extension extension,
                                std::span<const double> score = {});

// Desk-scale constants: arithmetic grid with c = kappa sqrt(log(nd/delta)), a
// small T and the guided extension scored by row means.
struct PracticalConstants {
  double kappa = 1.0;
  int T = 1;
};

ISRConfig practical_preset(int n, int d, double lambda, std::optional<double> delta = std::nullopt,
                           PracticalConstants constants = {});

// Arithmetic grid at phi_L1 and T = 4 ceil(gamma_bar^6), saturated at INT_MAX.
ISRConfig theoretical_preset(int n, int d, double lambda, std::optional<double> delta = std::nullopt);

// The T a theoretical preset asks for, as a real number (it overflows any integer).
double theoretical_steps(int n, int d, std::optional<double> delta = std::nullopt);

}  // namespace isorank::isr
