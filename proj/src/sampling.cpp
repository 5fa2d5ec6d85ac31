#include "isorank/sampling.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "isorank/rng.hpp"

namespace isorank::sampling {

std::string check_instance(const SignalInstance& inst, double tol) {
  const int n = inst.n(), d = inst.d();
  if (n == 0 || d == 0) return "empty matrix";
  if (inst.pi_star.size() != n) return "permutation size does not match row count";
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      const double v = inst.M(i, k);
      if (!(v >= -tol && v <= 1.0 + tol)) {
        std::ostringstream os;
        os << "entry (" << i << "," << k << ") = " << v << " outside [0,1]";
        return os.str();
      }
    }
  const std::vector<int> order = inst.pi_star.order();
  for (int r = 0; r + 1 < n; ++r)
    for (int k = 0; k < d; ++k)
      if (inst.M(order[r], k) > inst.M(order[r + 1], k) + tol) {
        std::ostringstream os;
        os << "column " << k << " decreases between ranks " << r << " and " << r + 1;
        return os.str();
      }
  return {};
}

NoiseKind parse_noise(const std::string& name) {
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "bernoulli") return NoiseKind::Bernoulli;
  if (name == "none") return NoiseKind::None;
  throw InvalidArgument("unknown noise model: " + name);
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Bernoulli: return "bernoulli";
    case NoiseKind::None: return "none";
  }
  return "?";
}

ObservationStream poissonize(const SignalInstance& inst, NoiseModel noise, std::uint64_t seed) {
  const int n = inst.n(), d = inst.d();
  if (n == 0 || d == 0) throw InvalidArgument("poissonize: empty matrix");
  if (!std::isfinite(inst.lambda) || inst.lambda <= 0.0)
    throw InvalidArgument("poissonize: lambda must be finite and positive");

  Rng rng(seed);
  Rng count_rng = rng.derive(1);
  Rng pos_rng = rng.derive(2);
  Rng noise_rng = rng.derive(3);

  const double mean = inst.lambda * static_cast<double>(n) * static_cast<double>(d);
  std::poisson_distribution<long long> poisson(mean);
  const long long N = poisson(count_rng);

  ObservationStream out;
  out.n = n;
  out.d = d;
  out.lambda = inst.lambda;
  out.records.resize(static_cast<std::size_t>(N));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(d);
  for (auto& rec : out.records) {
    const std::uint64_t cell = pos_rng.below(cells);
    rec.row = static_cast<int>(cell / static_cast<std::uint64_t>(d));
    rec.col = static_cast<int>(cell % static_cast<std::uint64_t>(d));
    const double m = inst.M(rec.row, rec.col);
    switch (noise.kind) {
      case NoiseKind::Gaussian: rec.value = m + gauss(noise_rng); break;
      case NoiseKind::Bernoulli: rec.value = noise_rng.uniform() < m ? 1.0 : 0.0; break;
      case NoiseKind::None: rec.value = m; break;
    }
  }
  return out;
}

LambdaEffective lambda_effective(double lambda, int T) {
  if (!(lambda > 0.0) || T < 1) throw InvalidArgument("lambda_effective: need lambda > 0 and T >= 1");
  const double l0 = lambda / (5.0 * T);
  return {l0, -std::expm1(-l0)};
}

std::span<const Batch> BatchedObservations::window(int t) const {
  if (t < 0 || t >= T) throw InvalidArgument("window: step out of range");
  return std::span<const Batch>(batches).subspan(static_cast<std::size_t>(5 * t), 5);
}

namespace {

BatchedObservations empty_batches(int n, int d, int T, double lambda0) {
  BatchedObservations out;
  out.T = T;
  out.lambda0 = lambda0;
  out.lambda1 = -std::expm1(-lambda0);
  out.batches.resize(static_cast<std::size_t>(5 * T));
  for (auto& b : out.batches) {
    b.Y = Matrix::Zero(n, d);
    b.r = Eigen::MatrixXi::Zero(n, d);
  }
  return out;
}

}  // namespace

BatchedObservations subsample_batches(const ObservationStream& stream, int T, std::uint64_t seed) {
  if (T < 1) throw InvalidArgument("subsample_batches: T must be >= 1");
  const double lambda0 = stream.lambda > 0.0 ? stream.lambda / (5.0 * T) : 0.0;
  BatchedObservations out = empty_batches(stream.n, stream.d, T, lambda0);
  Rng rng = Rng(seed).derive(7);
  const auto labels = static_cast<std::uint64_t>(5 * T);
  for (const auto& rec : stream.records) {
    Batch& b = out.batches[rng.below(labels)];
    b.Y(rec.row, rec.col) += rec.value;
    b.r(rec.row, rec.col) += 1;
  }
  for (auto& b : out.batches)
    for (int k = 0; k < stream.d; ++k)
      for (int i = 0; i < stream.n; ++i)
        if (b.r(i, k) > 1) b.Y(i, k) /= b.r(i, k);
  return out;
}

BatchedObservations full_observation_batches(const Matrix& M, int T, double lambda0) {
  if (T < 1 || !(lambda0 > 0.0)) throw InvalidArgument("full_observation_batches: need T >= 1, lambda0 > 0");
  BatchedObservations out = empty_batches(static_cast<int>(M.rows()), static_cast<int>(M.cols()), T, lambda0);
  for (auto& b : out.batches) {
    b.Y = M;
    b.r.setOnes();
  }
  return out;
}

std::vector<ObservationStream> split_stream(const ObservationStream& stream, int parts, std::uint64_t seed) {
  if (parts < 1) throw InvalidArgument("split_stream: parts must be >= 1");
  std::vector<ObservationStream> out(static_cast<std::size_t>(parts));
  for (auto& s : out) {
    s.n = stream.n;
    s.d = stream.d;
    s.lambda = stream.lambda / parts;
  }
  Rng rng = Rng(seed).derive(11);
  for (const auto& rec : stream.records) out[rng.below(static_cast<std::uint64_t>(parts))].records.push_back(rec);
  return out;
}

Eigen::MatrixXi cell_counts(const ObservationStream& stream) {
  Eigen::MatrixXi c = Eigen::MatrixXi::Zero(stream.n, stream.d);
  for (const auto& rec : stream.records) c(rec.row, rec.col) += 1;
  return c;
}

}  // namespace isorank::sampling
