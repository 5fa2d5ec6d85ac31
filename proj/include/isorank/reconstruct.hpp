#pragma once

// Least-squares reconstruction of the signal once the row (and column) order
// has been estimated.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "isorank/isr.hpp"
#include "isorank/kernels.hpp"
#include "isorank/sampling.hpp"
#include "isorank/types.hpp"

namespace isorank::reconstruct {

struct IsotonicFit {
  Matrix M_hat;
  double objective = 0.0;  // ||M_hat - Y||_F^2
  bool converged = true;
  int iterations = 0;
};

// Weighted nondecreasing least-squares fit. Empty `w` means unit weights.
std::vector<double> pava(std::span<const double> y, std::span<const double> w = {});

// Column-wise isotonic regression down the rows, then clipping to [0, 1] when `box`.
IsotonicFit project_isotonic(const Matrix& Y, bool box = true, kernels::Exec exec = kernels::Exec::Parallel);

// Projection onto matrices in [0, 1] nondecreasing along rows and columns,
// by Dykstra's alternating projections.
IsotonicFit project_biisotonic(const Matrix& Y, double tol = 1e-9, int max_iter = 10000,
                               kernels::Exec exec = kernels::Exec::Parallel);

// Projects Y with rows placed at the ranks given by pi and maps the fit back
// to the original row labels.
IsotonicFit fit_given_order(const Matrix& Y, const Permutation& pi, bool box = true);

enum class ScaleRule {
  SplitRate,  // 1 / (lambda / parts): unbiased for the split stream
  Lambda,     // 1 / lambda
};

// Per-cell sums of the stream times the chosen scale.
Matrix scaled_sums(const sampling::ObservationStream& stream, double lambda_full, int parts, ScaleRule rule);

using ConfigFactory = std::function<isr::ISRConfig(int n, int d, double lambda)>;

struct ReconstructConfig {
  ConfigFactory make_isr;  // defaults to the practical preset
  ScaleRule scale = ScaleRule::SplitRate;
  std::uint64_t seed = 0;
  double biso_tol = 1e-9;
  int biso_max_iter = 10000;
};

struct IsoReconstruction {
  IsotonicFit fit;
  Permutation pi_hat;
  isr::ISRResult isr;
};

IsoReconstruction reconstruct_iso(const sampling::ObservationStream& stream, const ReconstructConfig& config);

struct BisoReconstruction {
  IsotonicFit fit;
  Permutation pi_hat;   // rows
  Permutation eta_hat;  // columns
};

BisoReconstruction reconstruct_biso(const sampling::ObservationStream& stream, const ReconstructConfig& config);

}  // namespace isorank::reconstruct
