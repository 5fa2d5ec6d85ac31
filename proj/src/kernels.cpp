#include "isorank/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <omp.h>

#include "isorank/rng.hpp"

namespace isorank::kernels {

namespace {

// Below this many multiply-adds the fork/join costs more than it saves.
constexpr std::int64_t kParallelWork = 1 << 15;

void check_rows_cols(const Matrix& Y, std::span<const int> rows, std::span<const int> cols) {
  for (int r : rows)
    if (r < 0 || r >= Y.rows()) throw InvalidArgument("kernel: row index out of range");
  for (int c : cols)
    if (c < 0 || c >= Y.cols()) throw InvalidArgument("kernel: column index out of range");
}

}  // namespace

namespace serial {

Matrix restricted_centered(const Matrix& Y, std::span<const int> rows, std::span<const int> cols) {
  check_rows_cols(Y, rows, cols);
  const auto p = static_cast<Eigen::Index>(rows.size());
  const auto q = static_cast<Eigen::Index>(cols.size());
  Matrix A(p, q);
  for (Eigen::Index c = 0; c < q; ++c) {
    double mean = 0.0;
    for (Eigen::Index r = 0; r < p; ++r) {
      A(r, c) = Y(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
      mean += A(r, c);
    }
    if (p > 0) mean /= static_cast<double>(p);
    for (Eigen::Index r = 0; r < p; ++r) A(r, c) -= mean;
  }
  return A;
}

Matrix gram(const Matrix& X) {
  const Eigen::Index p = X.rows(), q = X.cols();
  Matrix G = Matrix::Zero(p, p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < q; ++k) s += X(a, k) * X(b, k);
      G(a, b) = s;
      G(b, a) = s;
    }
  return G;
}

Matrix corrected_gram(const Matrix& A2, const Matrix& A3) {
  if (A2.rows() != A3.rows() || A2.cols() != A3.cols()) throw InvalidArgument("corrected_gram: shape mismatch");
  const Eigen::Index p = A2.rows(), q = A2.cols();
  Matrix S(p, p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < q; ++k) {
        const double da = A2(a, k) - A3(a, k), db = A2(b, k) - A3(b, k);
        s += A2(a, k) * A2(b, k) - 0.5 * da * db;
      }
      S(a, b) = s;
      S(b, a) = s;
    }
  return S;
}

Vector weighted_row_sums(const Matrix& Y, std::span<const int> rows, std::span<const int> cols,
                         std::span<const double> w) {
  check_rows_cols(Y, rows, cols);
  if (w.size() != cols.size()) throw InvalidArgument("weighted_row_sums: weight size mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<Eigen::Index>(r)) += Y(rows[r], cols[c]) * w[c];
  return out;
}

Vector symmetric_matvec(const Matrix& S, const Vector& x) {
  Vector y = Vector::Zero(S.rows());
  for (Eigen::Index a = 0; a < S.rows(); ++a)
    for (Eigen::Index b = 0; b < S.cols(); ++b) y(a) += S(a, b) * x(b);
  return y;
}

}  // namespace serial

namespace omp {

Matrix restricted_centered(const Matrix& Y, std::span<const int> rows, std::span<const int> cols) {
  check_rows_cols(Y, rows, cols);
  const auto p = static_cast<Eigen::Index>(rows.size());
  const auto q = static_cast<Eigen::Index>(cols.size());
  Matrix A(p, q);
#pragma omp parallel for schedule(static) if (p * q > kParallelWork)
  for (Eigen::Index c = 0; c < q; ++c) {
    double mean = 0.0;
    for (Eigen::Index r = 0; r < p; ++r) {
      A(r, c) = Y(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
      mean += A(r, c);
    }
    if (p > 0) mean /= static_cast<double>(p);
    for (Eigen::Index r = 0; r < p; ++r) A(r, c) -= mean;
  }
  return A;
}

Matrix gram(const Matrix& X) {
  const Eigen::Index p = X.rows(), q = X.cols();
  Matrix G(p, p);
  // Row-major copy so the inner product runs over contiguous memory.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Xr = X;
#pragma omp parallel for schedule(dynamic, 4) if (p * p * q > kParallelWork)
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double s = Xr.row(a).dot(Xr.row(b));
      G(a, b) = s;
      G(b, a) = s;
    }
  return G;
}

Matrix corrected_gram(const Matrix& A2, const Matrix& A3) {
  if (A2.rows() != A3.rows() || A2.cols() != A3.cols()) throw InvalidArgument("corrected_gram: shape mismatch");
  const Eigen::Index p = A2.rows();
  const Matrix diff = A2 - A3;
  Matrix S = Matrix::Zero(p, p);
  S.selfadjointView<Eigen::Lower>().rankUpdate(A2);
  S.selfadjointView<Eigen::Lower>().rankUpdate(diff, -0.5);
  S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
  return S;
}

Vector weighted_row_sums(const Matrix& Y, std::span<const int> rows, std::span<const int> cols,
                         std::span<const double> w) {
  check_rows_cols(Y, rows, cols);
  if (w.size() != cols.size()) throw InvalidArgument("weighted_row_sums: weight size mismatch");
  const auto p = static_cast<std::int64_t>(rows.size());
  const auto q = static_cast<std::int64_t>(cols.size());
  Vector out(p);
#pragma omp parallel for schedule(static) if (p * q > kParallelWork)
  for (std::int64_t r = 0; r < p; ++r) {
    double s = 0.0;
    for (std::int64_t c = 0; c < q; ++c)
      s += Y(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]) * w[static_cast<std::size_t>(c)];
    out(r) = s;
  }
  return out;
}

Vector symmetric_matvec(const Matrix& S, const Vector& x) {
  const Eigen::Index p = S.rows();
  Vector y(p);
  // S is symmetric, so row a equals column a, which is contiguous.
#pragma omp parallel for schedule(static) if (p * p > kParallelWork)
  for (Eigen::Index a = 0; a < p; ++a) y(a) = S.col(a).dot(x);
  return y;
}

}  // namespace omp

Matrix restricted_centered(const Matrix& Y, std::span<const int> rows, std::span<const int> cols, Exec exec) {
  return exec == Exec::Serial ? serial::restricted_centered(Y, rows, cols) : omp::restricted_centered(Y, rows, cols);
}

Matrix gram(const Matrix& X, Exec exec) { return exec == Exec::Serial ? serial::gram(X) : omp::gram(X); }

Matrix corrected_gram(const Matrix& A2, const Matrix& A3, Exec exec) {
  return exec == Exec::Serial ? serial::corrected_gram(A2, A3) : omp::corrected_gram(A2, A3);
}

Vector weighted_row_sums(const Matrix& Y, std::span<const int> rows, std::span<const int> cols,
                         std::span<const double> w, Exec exec) {
  return exec == Exec::Serial ? serial::weighted_row_sums(Y, rows, cols, w)
                              : omp::weighted_row_sums(Y, rows, cols, w);
}

namespace {

Vector random_unit(Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(p);
  for (Eigen::Index i = 0; i < p; ++i) v(i) = g(rng);
  const double nv = v.norm();
  if (nv == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / nv;
}

double gershgorin_bound(const Matrix& S) {
  double bound = 0.0;
  for (Eigen::Index a = 0; a < S.rows(); ++a) bound = std::max(bound, S.row(a).cwiseAbs().sum());
  return bound;
}

}  // namespace

EigenPair top_eigenpair_power(const Matrix& S, const PowerIterationOptions& opt) {
  if (S.rows() != S.cols()) throw InvalidArgument("top_eigenpair_power: matrix must be square");
  const Eigen::Index p = S.rows();
  EigenPair out;
  if (p == 0) {
    out.converged = true;
    return out;
  }
  const double shift = gershgorin_bound(S);
  if (shift == 0.0) {
    out.vector = Vector::Unit(p, 0);
    out.converged = true;
    return out;
  }
  auto matvec = [&](const Vector& x) -> Vector {
    Vector y = opt.exec == Exec::Serial ? serial::symmetric_matvec(S, x) : omp::symmetric_matvec(S, x);
    return y + shift * x;
  };
  Vector v = random_unit(p, opt.seed);
  for (int it = 1; it <= opt.max_iter; ++it) {
    Vector w = matvec(v);
    const double rayleigh = v.dot(w);  // eigenvalue estimate of the shifted matrix
    const double nw = w.norm();
    if (nw == 0.0) break;
    Vector next = w / nw;
    // Residual of the eigen-equation, relative to the spectral scale.
    const double residual = (w - rayleigh * v).norm();
    v = std::move(next);
    out.iterations = it;
    if (residual <= opt.rel_tol * shift) {
      out.converged = true;
      break;
    }
  }
  out.vector = v;
  out.value = v.dot(matvec(v)) - shift;
  return out;
}

EigenPair top_eigenpair_dense(const Matrix& S) {
  if (S.rows() != S.cols()) throw InvalidArgument("top_eigenpair_dense: matrix must be square");
  EigenPair out;
  out.converged = true;
  const Eigen::Index n = S.rows();
  if (n == 0) return out;
  if (n == 1) {
    out.value = S(0, 0);
    out.vector = Vector::Ones(1);
    return out;
  }
  // Tridiagonalize, take eigenvalues only, then recover the top eigenvector by
  // inverse iteration on the tridiagonal. Accumulating all rotations is the
  // expensive part of a full solve and only one vector is needed.
  Eigen::Tridiagonalization<Matrix> tri(S);
  const Vector diag = tri.diagonal();
  const Vector sub = tri.subDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    out.converged = false;
    return out;
  }
  const Vector& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double sigma = top + 1e-10 * scale;

  // sigma I - T is positive definite, so an LDL^T sweep needs no pivoting.
  Vector dd(n), ll(n > 1 ? n - 1 : 0);
  dd(0) = sigma - diag(0);
  for (Eigen::Index k = 1; k < n; ++k) {
    ll(k - 1) = -sub(k - 1) / dd(k - 1);
    dd(k) = sigma - diag(k) + ll(k - 1) * sub(k - 1);
    if (!(dd(k) > 0.0)) dd(k) = std::numeric_limits<double>::epsilon() * scale;
  }
  Vector y = Vector::Ones(n);
  for (Eigen::Index k = 0; k < n; ++k) y(k) += 1e-3 * static_cast<double>(k % 7);
  for (int it = 0; it < 3; ++it) {
    for (Eigen::Index k = 1; k < n; ++k) y(k) -= ll(k - 1) * y(k - 1);
    for (Eigen::Index k = 0; k < n; ++k) y(k) /= dd(k);
    for (Eigen::Index k = n - 2; k >= 0; --k) y(k) -= ll(k) * y(k + 1);
    const double norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      out.converged = false;
      return out;
    }
    y /= norm;
  }
  out.vector = tri.matrixQ() * y;
  out.value = top;
  return out;
}

double symmetric_operator_norm(const Matrix& S, const PowerIterationOptions& opt) {
  // Largest |eigenvalue| = sqrt of the top eigenvalue of S^2, which is PSD.
  const Matrix S2 = S * S;
  const EigenPair top = top_eigenpair_power(S2, opt);
  return std::sqrt(std::max(top.value, 0.0));
}

}  // namespace isorank::kernels
