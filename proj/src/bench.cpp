#include "isorank/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "isorank/kernels.hpp"
#include "isorank/reconstruct.hpp"
#include "isorank/rng.hpp"
#include "isorank/synth.hpp"

namespace isorank::bench {

double permutation_loss(const Matrix& M, const Permutation& pi_star, const Permutation& pi_hat) {
  if (pi_star.size() != M.rows() || pi_hat.size() != M.rows())
    throw InvalidArgument("permutation_loss: permutation size mismatch");
  return (reorder_rows(M, pi_hat) - reorder_rows(M, pi_star)).squaredNorm();
}

double reconstruction_loss(const Matrix& M_hat, const Matrix& M) {
  if (M_hat.rows() != M.rows() || M_hat.cols() != M.cols())
    throw InvalidArgument("reconstruction_loss: shape mismatch");
  return (M_hat - M).squaredNorm();
}

namespace {

Permutation rank_by(const std::vector<double>& score) {
  IndexList order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return score[static_cast<std::size_t>(a)] < score[static_cast<std::size_t>(b)];
  });
  return Permutation::from_order(order);
}

}  // namespace

Permutation baseline_rowsum(const sampling::ObservationStream& stream) {
  std::vector<double> sum(static_cast<std::size_t>(stream.n), 0.0), count(static_cast<std::size_t>(stream.n), 0.0);
  for (const auto& rec : stream.records) {
    sum[static_cast<std::size_t>(rec.row)] += rec.value;
    count[static_cast<std::size_t>(rec.row)] += 1.0;
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= std::max(count[i], 1.0);
  return rank_by(sum);
}

Permutation baseline_rowsum(const sampling::BatchedObservations& batches) {
  const int n = batches.n();
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0), count(static_cast<std::size_t>(n), 0.0);
  for (const auto& b : batches.batches)
    for (int i = 0; i < n; ++i) {
      // Y holds averages, so the batch total of a cell is Y * r.
      sum[static_cast<std::size_t>(i)] += (b.Y.row(i).array() * b.r.row(i).cast<double>().array()).sum();
      count[static_cast<std::size_t>(i)] += b.r.row(i).sum();
    }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= std::max(count[i], 1.0);
  return rank_by(sum);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double level) {
  if (values.empty()) throw InvalidArgument("quantile: no values");
  if (!(level >= 0.0 && level <= 1.0)) throw InvalidArgument("quantile: level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope: need two or more points");
  double mx = 0.0, my = 0.0;
  const auto m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("loglog_slope: values must be positive");
    mx += std::log(x[i]) / m;
    my += std::log(y[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidArgument("loglog_slope: x values are all equal");
  return sxy / sxx;
}

isr::ISRConfig sweep_isr_config(const SweepConfig& config, const SweepPoint& point) {
  isr::PracticalConstants constants = config.constants;
  if (config.T) constants.T = *config.T;
  isr::ISRConfig cfg = isr::practical_preset(point.n, point.d, point.lambda, config.delta, constants);
  const isr::GridKind kind = config.grid_kind.value_or(isr::GridKind::Arithmetic);
  if (kind != isr::GridKind::Arithmetic || config.grid_scale) {
    const double scale = config.grid_scale.value_or(cfg.grid.unit);
    cfg.grid = isr::build_grid(kind, point.n, point.d, cfg.grid.delta, scale);
  }
  if (config.extension) cfg.extension = *config.extension;
  if (config.tie_score) cfg.tie_score = *config.tie_score;
  cfg.time_budget_seconds = config.time_budget_seconds;
  cfg.exec = kernels::Exec::Serial;
  return cfg;
}

sampling::SignalInstance draw_instance(const std::string& family, const SweepPoint& pt, std::uint64_t seed) {
  if (family == "toy") return synth::gen_toy_34(0.5, 0.125, pt.lambda);
  if (family == "lower-bound") {
    const auto params = synth::lower_bound_preset(pt.n, pt.d, pt.lambda);
    return synth::gen_lower_bound(pt.n, pt.d, pt.lambda, params, seed).instance;
  }
  if (family == "separated")
    return synth::gen_separated(pt.n, pt.d, pt.n > 1 ? 0.5 / (pt.n - 1) : 0.0, seed, pt.lambda);
  return synth::gen_isotonic(pt.n, pt.d, synth::parse_family(family), seed, pt.lambda);
}

namespace {

// Records for one (point, replicate): ISR first, then the baseline.
std::vector<RunRecord> run_one(const SweepConfig& config, const SweepPoint& pt, int replicate, std::uint64_t seed) {
  std::vector<RunRecord> out;
  RunRecord base;
  base.point = pt;
  base.replicate = replicate;
  base.seed = seed;
  const Rng rng(seed);
  try {
    const auto inst = draw_instance(config.family, pt, rng.derive(1).key());
    const auto stream = sampling::poissonize(inst, {config.noise}, rng.derive(2).key());
    const Matrix Y = reconstruct::scaled_sums(stream, pt.lambda, 1, reconstruct::ScaleRule::SplitRate);

    RunRecord rec = base;
    rec.estimator = "isr";
    const auto t0 = std::chrono::steady_clock::now();
    const isr::ISRConfig cfg = sweep_isr_config(config, pt);
    const auto batches = sampling::subsample_batches(stream, cfg.T, rng.derive(3).key());
    const auto res = isr::run_isr(batches, cfg);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.timed_out = res.timed_out;
    rec.loss_perm = permutation_loss(inst.M, inst.pi_star, res.pi_hat);
    rec.loss_reco = reconstruction_loss(reconstruct::fit_given_order(Y, res.pi_hat).M_hat, inst.M);
    out.push_back(rec);

    if (config.with_baseline) {
      RunRecord b = base;
      b.estimator = "rowsum";
      const auto t1 = std::chrono::steady_clock::now();
      const Permutation pi = baseline_rowsum(stream);
      b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      b.loss_perm = permutation_loss(inst.M, inst.pi_star, pi);
      b.loss_reco = reconstruction_loss(reconstruct::fit_given_order(Y, pi).M_hat, inst.M);
      out.push_back(b);
    }
  } catch (const std::exception& e) {
    RunRecord rec = base;
    rec.estimator = "isr";
    rec.error = e.what();
    out.push_back(rec);
  }
  return out;
}

}  // namespace

SweepReport rate_sweep(const SweepConfig& config) {
  if (config.replicates < 1) throw InvalidArgument("rate_sweep: replicates must be >= 1");
  if (config.points.empty()) throw InvalidArgument("rate_sweep: no sweep points");
  for (const auto& pt : config.points)
    if (pt.n <= 0 || pt.d <= 0 || !(pt.lambda > 0.0)) throw InvalidArgument("rate_sweep: bad sweep point");

  SweepReport report;
  report.config = config;
  for (const auto& pt : config.points) {
    std::ostringstream os;
    if (pt.lambda < 1.0 / pt.d) {
      os << "lambda=" << pt.lambda << " < 1/d at n=" << pt.n << ", d=" << pt.d
         << ": fewer than one observation per expert, trivial regime";
      report.warnings.push_back(os.str());
    } else if (pt.lambda > 8.0 * pt.n * pt.n) {
      os << "lambda=" << pt.lambda << " > 8 n^2 at n=" << pt.n << ": outside the guaranteed range";
      report.warnings.push_back(os.str());
    }
  }

  const auto tasks = static_cast<long>(config.points.size()) * config.replicates;
  std::vector<std::vector<RunRecord>> slots(static_cast<std::size_t>(tasks));
  const Rng root(config.seed);
#pragma omp parallel for schedule(dynamic, 1)
  for (long task = 0; task < tasks; ++task) {
    const auto p = static_cast<std::size_t>(task / config.replicates);
    const int r = static_cast<int>(task % config.replicates);
    slots[static_cast<std::size_t>(task)] =
        run_one(config, config.points[p], r, root.derive(p, static_cast<std::uint64_t>(r)).key());
  }
  for (auto& s : slots)
    for (auto& rec : s) {
      if (!rec.error.empty()) report.warnings.push_back("replicate " + std::to_string(rec.replicate) + ": " + rec.error);
      if (rec.timed_out) report.warnings.push_back("replicate " + std::to_string(rec.replicate) + " hit the time budget");
      report.records.push_back(std::move(rec));
    }

  for (const auto& pt : config.points)
    for (const std::string est : {"isr", "rowsum"}) {
      std::vector<double> perm, reco;
      for (const auto& rec : report.records)
        if (rec.error.empty() && rec.estimator == est && rec.point.n == pt.n && rec.point.d == pt.d &&
            rec.point.lambda == pt.lambda) {
          perm.push_back(rec.loss_perm);
          reco.push_back(rec.loss_reco);
        }
      if (perm.empty()) continue;
      report.summary.push_back({pt, est, static_cast<int>(perm.size()), median(perm), median(reco)});
    }
  return report;
}

void write_csv(std::ostream& os, const SweepReport& report, bool deterministic) {
  os << "n,d,lambda,estimator,replicate,loss_perm,loss_reco,seconds,seed\n";
  std::ostringstream line;
  for (const auto& rec : report.records) {
    if (!rec.error.empty()) continue;
    line.str("");
    line << std::setprecision(17) << rec.point.n << ',' << rec.point.d << ',' << rec.point.lambda << ','
         << rec.estimator << ',' << rec.replicate << ',' << rec.loss_perm << ',' << rec.loss_reco << ','
         << (deterministic ? 0.0 : rec.seconds) << ',' << rec.seed << '\n';
    os << line.str();
  }
}

ConcentrationSummary concentration_check(int p, int q, double sigma2, int replicates, std::uint64_t seed) {
  if (p < 1 || q < 1 || replicates < 1) throw InvalidArgument("concentration_check: p, q, replicates must be >= 1");
  if (!(sigma2 > 0.0 && sigma2 <= 1.0)) throw InvalidArgument("concentration_check: sigma2 must lie in (0, 1]");
  ConcentrationSummary out;
  out.p = p;
  out.q = q;
  out.sigma2 = sigma2;
  out.replicates = replicates;
  out.expected_diagonal = sigma2 * q;
  out.samples.resize(static_cast<std::size_t>(replicates));
  const Rng root(seed);
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < replicates; ++r) {
    Rng rng = root.derive(static_cast<std::uint64_t>(r));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix G = Matrix::Zero(p, p);
    Vector x(p);
    std::vector<int> support;
    // Columns are independent, so X X^T accumulates one sparse column at a time.
    for (int k = 0; k < q; ++k) {
      support.clear();
      for (int i = 0; i < p; ++i)
        if (rng.uniform() < sigma2) {
          support.push_back(i);
          x(i) = gauss(rng);
        }
      for (int a : support)
        for (int b : support) G(a, b) += x(a) * x(b);
    }
    G.diagonal().array() -= out.expected_diagonal;
    kernels::PowerIterationOptions opt;
    opt.seed = rng.derive(99).key();
    opt.exec = kernels::Exec::Serial;
    out.samples[static_cast<std::size_t>(r)] = kernels::symmetric_operator_norm(G, opt);
  }
  out.median = median(out.samples);
  out.quantile95 = quantile(out.samples, 0.95);
  return out;
}

}  // namespace isorank::bench
