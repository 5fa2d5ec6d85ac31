#pragma once

// Dense inner loops used by the ranking passes and the experiments. Each kernel
// has a plain serial reference and an OpenMP version; the two must agree to
// rounding, which the test-suite checks and the benchmark target times.

#include <cstdint>
#include <span>

#include "isorank/types.hpp"

namespace isorank::kernels {

enum class Exec { Serial, Parallel };

namespace serial {
// Y restricted to (rows, cols) with each column centered over the rows.
Matrix restricted_centered(const Matrix& Y, std::span<const int> rows, std::span<const int> cols);
// X X^T.
Matrix gram(const Matrix& X);
// A2 A2^T - 1/2 (A2 - A3)(A2 - A3)^T.
Matrix corrected_gram(const Matrix& A2, const Matrix& A3);
// out[r] = sum_c Y(rows[r], cols[c]) * w[c].
Vector weighted_row_sums(const Matrix& Y, std::span<const int> rows, std::span<const int> cols,
                         std::span<const double> w);
Vector symmetric_matvec(const Matrix& S, const Vector& x);
}  // namespace serial

namespace omp {
Matrix restricted_centered(const Matrix& Y, std::span<const int> rows, std::span<const int> cols);
Matrix gram(const Matrix& X);
Matrix corrected_gram(const Matrix& A2, const Matrix& A3);
Vector weighted_row_sums(const Matrix& Y, std::span<const int> rows, std::span<const int> cols,
                         std::span<const double> w);
Vector symmetric_matvec(const Matrix& S, const Vector& x);
}  // namespace omp

Matrix restricted_centered(const Matrix& Y, std::span<const int> rows, std::span<const int> cols,
                           Exec exec = Exec::Parallel);
Matrix gram(const Matrix& X, Exec exec = Exec::Parallel);
Matrix corrected_gram(const Matrix& A2, const Matrix& A3, Exec exec = Exec::Parallel);
Vector weighted_row_sums(const Matrix& Y, std::span<const int> rows, std::span<const int> cols,
                         std::span<const double> w, Exec exec = Exec::Parallel);

struct PowerIterationOptions {
  double rel_tol = 1e-10;
  int max_iter = 10000;
  std::uint64_t seed = 0x5eed;
  Exec exec = Exec::Parallel;
};

struct EigenPair {
  double value = 0.0;
  Vector vector;
  int iterations = 0;
  bool converged = false;
};

// Largest (algebraic) eigenpair of a symmetric matrix. Power iteration on
// S + shift I, with the shift taken from a Gershgorin bound so that the
// shifted matrix is positive semidefinite.
EigenPair top_eigenpair_power(const Matrix& S, const PowerIterationOptions& opt = {});

// Same quantity from a tridiagonal reduction: eigenvalues only, then inverse
// iteration for the top vector.
EigenPair top_eigenpair_dense(const Matrix& S);

// Operator norm (largest |eigenvalue|) of a symmetric matrix by power iteration.
double symmetric_operator_norm(const Matrix& S, const PowerIterationOptions& opt = {});

}  // namespace isorank::kernels
