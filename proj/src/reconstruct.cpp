#include "isorank/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "isorank/rng.hpp"

namespace isorank::reconstruct {

std::vector<double> pava(std::span<const double> y, std::span<const double> w) {
  if (y.empty()) throw InvalidArgument("pava: empty input");
  if (!w.empty() && w.size() != y.size()) throw InvalidArgument("pava: weight size mismatch");
  struct Block {
    double mean, weight;
    std::size_t len;
  };
  std::vector<Block> stack;
  stack.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (!(wi > 0.0)) throw InvalidArgument("pava: weights must be positive");
    Block b{y[i], wi, 1};
    while (!stack.empty() && stack.back().mean > b.mean) {
      const Block& top = stack.back();
      const double tw = top.weight + b.weight;
      b = Block{(top.mean * top.weight + b.mean * b.weight) / tw, tw, top.len + b.len};
      stack.pop_back();
    }
    stack.push_back(b);
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : stack) out.insert(out.end(), b.len, b.mean);
  return out;
}

namespace {

void isotonic_columns(Matrix& X, bool box, kernels::Exec exec) {
  const Eigen::Index d = X.cols();
  const bool par = exec == kernels::Exec::Parallel;
#pragma omp parallel for schedule(static) if (par && X.size() > (1 << 14))
  for (Eigen::Index k = 0; k < d; ++k) {
    const std::vector<double> fit = pava(std::span<const double>(X.col(k).data(), static_cast<std::size_t>(X.rows())));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double v = fit[static_cast<std::size_t>(i)];
      if (box) v = std::clamp(v, 0.0, 1.0);
      X(i, k) = v;
    }
  }
}

void isotonic_rows(Matrix& X, kernels::Exec exec) {
  Matrix t = X.transpose();
  isotonic_columns(t, false, exec);
  X = t.transpose();
}

}  // namespace

IsotonicFit project_isotonic(const Matrix& Y, bool box, kernels::Exec exec) {
  IsotonicFit out;
  out.M_hat = Y;
  if (Y.size() > 0) isotonic_columns(out.M_hat, box, exec);
  out.objective = (out.M_hat - Y).squaredNorm();
  return out;
}

IsotonicFit project_biisotonic(const Matrix& Y, double tol, int max_iter, kernels::Exec exec) {
  if (!(tol > 0.0)) throw InvalidArgument("project_biisotonic: tol must be positive");
  if (max_iter < 1) throw InvalidArgument("project_biisotonic: max_iter must be >= 1");
  IsotonicFit out;
  out.M_hat = Y;
  if (Y.size() == 0) return out;
  // A: rows nondecreasing. B: columns nondecreasing within [0, 1].
  Matrix x = Y, p = Matrix::Zero(Y.rows(), Y.cols()), q = Matrix::Zero(Y.rows(), Y.cols());
  out.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Matrix y = x + p;
    isotonic_rows(y, exec);
    p = x + p - y;
    Matrix next = y + q;
    isotonic_columns(next, true, exec);
    q = y + q - next;
    const double change = (next - x).norm();
    x = std::move(next);
    out.iterations = it;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  out.M_hat = x;
  out.objective = (x - Y).squaredNorm();
  return out;
}

IsotonicFit fit_given_order(const Matrix& Y, const Permutation& pi, bool box) {
  if (pi.size() != Y.rows()) throw InvalidArgument("fit_given_order: permutation size mismatch");
  IsotonicFit fit = project_isotonic(reorder_rows(Y, pi), box);
  Matrix back(Y.rows(), Y.cols());
  for (int i = 0; i < pi.size(); ++i) back.row(i) = fit.M_hat.row(pi(i));
  fit.M_hat = std::move(back);
  return fit;
}

Matrix scaled_sums(const sampling::ObservationStream& stream, double lambda_full, int parts, ScaleRule rule) {
  if (!(lambda_full > 0.0) || parts < 1) throw InvalidArgument("scaled_sums: need lambda > 0 and parts >= 1");
  const double scale = rule == ScaleRule::SplitRate ? parts / lambda_full : 1.0 / lambda_full;
  Matrix out = Matrix::Zero(stream.n, stream.d);
  for (const auto& rec : stream.records) out(rec.row, rec.col) += rec.value;
  return out * scale;
}

namespace {

isr::ISRConfig make_config(const ReconstructConfig& config, int n, int d, double lambda) {
  return config.make_isr ? config.make_isr(n, d, lambda) : isr::practical_preset(n, d, lambda);
}

isr::ISRResult order_rows(const sampling::ObservationStream& part, const ReconstructConfig& config,
                          std::uint64_t tag) {
  isr::ISRConfig cfg = make_config(config, part.n, part.d, part.lambda);
  const auto batches = sampling::subsample_batches(part, cfg.T, Rng(config.seed).derive(tag).key());
  return isr::run_isr(batches, cfg);
}

sampling::ObservationStream transpose(const sampling::ObservationStream& s) {
  sampling::ObservationStream t;
  t.n = s.d;
  t.d = s.n;
  t.lambda = s.lambda;
  t.records.reserve(s.records.size());
  for (const auto& rec : s.records) t.records.push_back({rec.col, rec.row, rec.value});
  return t;
}

}  // namespace

IsoReconstruction reconstruct_iso(const sampling::ObservationStream& stream, const ReconstructConfig& config) {
  if (stream.n <= 0 || stream.d <= 0) throw InvalidArgument("reconstruct_iso: empty stream");
  const auto parts = sampling::split_stream(stream, 2, Rng(config.seed).derive(1).key());
  IsoReconstruction out;
  out.isr = order_rows(parts[0], config, 2);
  out.pi_hat = out.isr.pi_hat;
  const Matrix Y2 = scaled_sums(parts[1], stream.lambda, 2, config.scale);
  out.fit = fit_given_order(Y2, out.pi_hat, true);
  return out;
}

BisoReconstruction reconstruct_biso(const sampling::ObservationStream& stream, const ReconstructConfig& config) {
  if (stream.n <= 0 || stream.d <= 0) throw InvalidArgument("reconstruct_biso: empty stream");
  const auto parts = sampling::split_stream(stream, 3, Rng(config.seed).derive(1).key());
  BisoReconstruction out;
  out.pi_hat = order_rows(parts[0], config, 2).pi_hat;
  out.eta_hat = order_rows(transpose(parts[1]), config, 3).pi_hat;
  const Matrix Y3 = scaled_sums(parts[2], stream.lambda, 3, config.scale);
  // Rows to ranks by pi_hat, columns to ranks by eta_hat.
  const Matrix sorted = reorder_rows(reorder_rows(Y3, out.pi_hat).transpose(), out.eta_hat).transpose();
  IsotonicFit fit = project_biisotonic(sorted, config.biso_tol, config.biso_max_iter);
  Matrix back(Y3.rows(), Y3.cols());
  for (int i = 0; i < out.pi_hat.size(); ++i)
    for (int k = 0; k < out.eta_hat.size(); ++k) back(i, k) = fit.M_hat(out.pi_hat(i), out.eta_hat(k));
  fit.M_hat = std::move(back);
  out.fit = std::move(fit);
  return out;
}

}  // namespace isorank::reconstruct
