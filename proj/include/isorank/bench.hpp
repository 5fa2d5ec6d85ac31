#pragma once

// Losses, the row-sum baseline, rate sweeps and the Monte Carlo
// concentration experiment.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "isorank/isr.hpp"
#include "isorank/sampling.hpp"
#include "isorank/types.hpp"

namespace isorank::bench {

// sum_{i,k} (M[pi_hat^{-1}(i), k] - M[pi_star^{-1}(i), k])^2
double permutation_loss(const Matrix& M, const Permutation& pi_star, const Permutation& pi_hat);

double reconstruction_loss(const Matrix& M_hat, const Matrix& M);

// Ranks rows by observed sum over observation count; ties by index.
Permutation baseline_rowsum(const sampling::ObservationStream& stream);
Permutation baseline_rowsum(const sampling::BatchedObservations& batches);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double level);  // linear interpolation

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepPoint {
  int n = 0;
  int d = 0;
  double lambda = 1.0;
};

struct SweepConfig {
  std::string family = "lower-bound";  // as accepted by draw_instance
  std::vector<SweepPoint> points;
  int replicates = 1;
  std::uint64_t seed = 0;
  sampling::NoiseKind noise = sampling::NoiseKind::Gaussian;
  isr::PracticalConstants constants;
  std::optional<int> T;                     // overrides constants.T
  std::optional<isr::GridKind> grid_kind;   // arithmetic unless set
  std::optional<double> grid_scale;         // overrides kappa sqrt(log(nd/delta))
  std::optional<double> delta;
  std::optional<isr::Extension> extension;  // preset choice unless set
  std::optional<isr::TieScore> tie_score;
  bool with_baseline = true;
  std::optional<double> time_budget_seconds;  // per ISR run
};

struct RunRecord {
  SweepPoint point;
  std::string estimator;
  int replicate = 0;
  double loss_perm = 0.0;
  double loss_reco = 0.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  bool timed_out = false;
  std::string error;  // nonempty when the run failed
};

struct SummaryRow {
  SweepPoint point;
  std::string estimator;
  int runs = 0;
  double median_perm = 0.0;
  double median_reco = 0.0;
};

struct SweepReport {
  SweepConfig config;
  std::vector<RunRecord> records;
  std::vector<SummaryRow> summary;
  std::vector<std::string> warnings;
};

// lower-bound (case preset from lambda), separated (sorted rows 0.5 / (n - 1)
// apart in every column), toy (the fixed 204 x 10 instance), or a synth family.
sampling::SignalInstance draw_instance(const std::string& family, const SweepPoint& point, std::uint64_t seed);

isr::ISRConfig sweep_isr_config(const SweepConfig& config, const SweepPoint& point);

SweepReport rate_sweep(const SweepConfig& config);

// Header: n,d,lambda,estimator,replicate,loss_perm,loss_reco,seconds,seed.
// With `deterministic` the seconds column is written as 0.
void write_csv(std::ostream& os, const SweepReport& report, bool deterministic = false);

struct ConcentrationSummary {
  int p = 0;
  int q = 0;
  double sigma2 = 0.0;
  int replicates = 0;
  double expected_diagonal = 0.0;  // sigma2 * q
  double median = 0.0;
  double quantile95 = 0.0;
  std::vector<double> samples;
};

// ||X X^T - sigma2 q I||_op over replicates, X = B . E with B ~ Bernoulli(sigma2), E ~ N(0, 1).
ConcentrationSummary concentration_check(int p, int q, double sigma2, int replicates, std::uint64_t seed);

}  // namespace isorank::bench
