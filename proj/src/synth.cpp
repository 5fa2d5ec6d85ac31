#include "isorank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "isorank/rng.hpp"

namespace isorank::synth {

Family parse_family(const std::string& name) {
  if (name == "uniform-sorted") return Family::UniformSorted;
  if (name == "block") return Family::Block;
  if (name == "smooth") return Family::Smooth;
  throw InvalidArgument("unknown family: " + name);
}

std::string to_string(Family family) {
  switch (family) {
    case Family::UniformSorted: return "uniform-sorted";
    case Family::Block: return "block";
    case Family::Smooth: return "smooth";
  }
  return "?";
}

namespace {

void check_dims(int n, int d) {
  if (n <= 0 || d <= 0) throw InvalidArgument("generator: n and d must be positive");
}

IndexList random_order(int n, Rng rng) {
  IndexList v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  // Fisher-Yates with our own bounded draws so the result does not depend on
  // the standard library's distribution implementation.
  for (int i = n - 1; i > 0; --i) std::swap(v[static_cast<std::size_t>(i)], v[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return v;
}

std::vector<double> sorted_uniforms(int count, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (double& x : v) x = rng.uniform();
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

sampling::SignalInstance permute_rows(const Matrix& sorted, double lambda, std::uint64_t seed) {
  const int n = static_cast<int>(sorted.rows());
  sampling::SignalInstance inst;
  inst.lambda = lambda;
  inst.pi_star = Permutation(random_order(n, Rng(seed).derive(0x9e77)));
  inst.M.resize(sorted.rows(), sorted.cols());
  for (int i = 0; i < n; ++i) inst.M.row(i) = sorted.row(inst.pi_star(i));
  return inst;
}

sampling::SignalInstance gen_isotonic(int n, int d, Family family, std::uint64_t seed, double lambda, int blocks) {
  check_dims(n, d);
  Rng rng = Rng(seed).derive(1);
  Matrix S(n, d);
  switch (family) {
    case Family::UniformSorted:
      for (int k = 0; k < d; ++k) {
        const auto col = sorted_uniforms(n, rng);
        for (int r = 0; r < n; ++r) S(r, k) = col[static_cast<std::size_t>(r)];
      }
      break;
    case Family::Block: {
      if (blocks < 1) throw InvalidArgument("gen_isotonic: blocks must be >= 1");
      const int b = std::min(blocks, n);
      for (int k = 0; k < d; ++k) {
        const auto levels = sorted_uniforms(b, rng);
        for (int r = 0; r < n; ++r) {
          const auto block = static_cast<std::size_t>(static_cast<long>(r) * b / n);
          S(r, k) = b == 1 ? 0.5 : levels[block];
        }
      }
      break;
    }
    case Family::Smooth:
      for (int k = 0; k < d; ++k) {
        const double slope = 2.0 + 18.0 * rng.uniform();
        const double center = rng.uniform();
        for (int r = 0; r < n; ++r) {
          const double x = n > 1 ? static_cast<double>(r) / (n - 1) : 0.5;
          S(r, k) = 1.0 / (1.0 + std::exp(-slope * (x - center)));
        }
      }
      break;
  }
  return permute_rows(S, lambda, Rng(seed).derive(2).key());
}

sampling::SignalInstance gen_separated(int n, int d, double min_step, std::uint64_t seed, double lambda) {
  check_dims(n, d);
  if (!(min_step >= 0.0) || min_step * (n - 1) > 1.0) throw InvalidArgument("gen_separated: min_step too large");
  Rng rng = Rng(seed).derive(3);
  const double slack = 1.0 - min_step * (n - 1);
  Matrix S(n, d);
  for (int k = 0; k < d; ++k) {
    const auto u = sorted_uniforms(n, rng);
    for (int r = 0; r < n; ++r) S(r, k) = min_step * r + slack * u[static_cast<std::size_t>(r)];
  }
  return permute_rows(S, lambda, Rng(seed).derive(4).key());
}

std::vector<int> toy_34_signal_columns() { return {2, 3, 5, 6, 8, 9}; }
std::vector<int> toy_34_middle_columns() { return {3, 5, 8, 9}; }

sampling::SignalInstance gen_toy_34(double alpha, double h, double lambda) {
  if (!(h > 0.0) || !(alpha > h) || !(alpha < 1.0 - h)) throw InvalidArgument("gen_toy_34: need alpha in (h, 1 - h)");
  const int n = 204, d = 10;
  Matrix M = Matrix::Constant(n, d, alpha);
  for (int k : toy_34_signal_columns()) {
    for (int r = 0; r < 100; ++r) M(r, k) = alpha - h / 2;
    for (int r = 104; r < n; ++r) M(r, k) = alpha + h / 2;
  }
  for (int k : toy_34_middle_columns()) {
    M(100, k) = M(101, k) = alpha - h / 2;
    M(102, k) = M(103, k) = alpha + h / 2;
  }
  sampling::SignalInstance inst;
  inst.M = std::move(M);
  inst.pi_star = Permutation::identity(n);
  inst.lambda = lambda;
  return inst;
}

int floor_dyadic(double x) {
  if (!(x >= 1.0)) throw InvalidArgument("floor_dyadic: x must be >= 1");
  int v = 1;
  while (static_cast<double>(v) * 2.0 <= x && v < (1 << 30)) v *= 2;
  return v;
}

namespace {

LowerBoundParams with_max_upsilon(int n, double lambda, int p, int q) {
  LowerBoundParams out;
  out.p = p;
  out.q = q;
  out.upsilon = std::sqrt(p * lambda) * p / (8.0 * n);
  return out;
}

}  // namespace

LowerBoundParams lower_bound_case1(int n, int d, double lambda) {
  const int q = std::min(floor_dyadic(std::sqrt(d / lambda)), floor_dyadic(d));
  return with_max_upsilon(n, lambda, std::max(2, floor_dyadic(n / 2.0)), q);
}

LowerBoundParams lower_bound_case2(int n, int d, double lambda) {
  const double nd = static_cast<double>(n);
  const int p = std::clamp(floor_dyadic(std::max(1.0, std::cbrt(nd * nd / lambda))), 2, floor_dyadic(n));
  const int q = std::min(floor_dyadic(std::max(1.0, std::cbrt(nd) * std::sqrt(d) / std::pow(lambda, 1.0 / 6.0))),
                         floor_dyadic(d));
  return with_max_upsilon(n, lambda, p, q);
}

LowerBoundParams lower_bound_case3(int n, int d, double lambda) {
  return with_max_upsilon(n, lambda, 2, floor_dyadic(std::sqrt(d)));
}

LowerBoundParams lower_bound_preset(int n, int d, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lower_bound_preset: lambda must be positive");
  if (lambda * n <= 1.0) return lower_bound_case1(n, d, lambda);
  if (lambda >= 8.0 * n * n) return lower_bound_case3(n, d, lambda);
  return lower_bound_case2(n, d, lambda);
}

std::vector<IndexList> packing_collection(int p, int count, std::uint64_t seed) {
  if (p < 2 || p % 2 != 0) throw InvalidArgument("packing_collection: p must be even and >= 2");
  if (count < 1) throw InvalidArgument("packing_collection: count must be >= 1");
  Rng rng = Rng(seed).derive(5);
  const auto half = static_cast<std::size_t>(p / 2);
  std::vector<IndexList> sets;
  std::vector<std::vector<char>> members;
  int misses = 0;
  // Stop early when rejections dominate: small p has few separated subsets.
  while (static_cast<int>(sets.size()) < count && misses < 1000) {
    IndexList order = random_order(p, rng.derive(sets.size(), static_cast<std::uint64_t>(misses)));
    IndexList s(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    std::sort(s.begin(), s.end());
    std::vector<char> in(static_cast<std::size_t>(p), 0);
    for (int x : s) in[static_cast<std::size_t>(x)] = 1;
    bool ok = true;
    for (const auto& m : members) {
      int diff = 0;
      for (int x = 0; x < p; ++x) diff += m[static_cast<std::size_t>(x)] != in[static_cast<std::size_t>(x)];
      if (4 * diff < p) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++misses;
      continue;
    }
    sets.push_back(std::move(s));
    members.push_back(std::move(in));
  }
  return sets;
}

LowerBoundInstance gen_lower_bound(int n, int d, double lambda, const LowerBoundParams& params, std::uint64_t seed) {
  check_dims(n, d);
  const int p = params.p, q = params.q;
  auto fail = [](const std::string& what) { throw InvalidArgument("gen_lower_bound: " + what); };
  if (!(lambda > 0.0)) fail("lambda must be positive");
  if (p < 2 || (p & (p - 1)) != 0) fail("p must be a power of two >= 2");
  if (q < 1 || (q & (q - 1)) != 0) fail("q must be a power of two >= 1");
  if (p > n || n % p != 0) fail("p must divide n");
  if (q > d) fail("q must not exceed d");
  if (!(params.upsilon >= 0.0)) fail("upsilon must be nonnegative");
  const double lift = params.upsilon / std::sqrt(p * lambda);
  if (lift > p / (8.0 * n) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "upsilon / sqrt(p lambda) = " << lift << " exceeds p / (8 n) = " << p / (8.0 * n);
    fail(os.str());
  }

  LowerBoundInstance out;
  out.params = params;
  const int strips = n / p;
  out.w.resize(n);
  for (int i = 0; i < n; ++i) out.w(i) = static_cast<double>(i / p) * p / (4.0 * n);

  Rng rng(seed);
  const auto collection = packing_collection(p, strips, rng.derive(10).key());
  Matrix S = out.w * Eigen::RowVectorXd::Ones(d);
  for (int s = 0; s < strips; ++s) {
    Rng strip = rng.derive(11, static_cast<std::uint64_t>(s));
    const IndexList& g = collection[strip.below(collection.size())];
    IndexList raised;
    for (int x : g) raised.push_back(s * p + x);
    IndexList cols = random_order(d, strip.derive(1));
    cols.resize(static_cast<std::size_t>(q));
    std::sort(cols.begin(), cols.end());
    for (int r : raised)
      for (int k : cols) S(r, k) += lift;
    out.elevated.push_back(raised);
    out.questions.push_back(cols);
  }
  // Relabel the strip rows so that raised rows come last within each strip in
  // rank order; the stored `elevated` sets refer to these sorted positions.
  Matrix sorted(n, d);
  for (int s = 0; s < strips; ++s) {
    std::vector<char> up(static_cast<std::size_t>(p), 0);
    for (int r : out.elevated[static_cast<std::size_t>(s)]) up[static_cast<std::size_t>(r - s * p)] = 1;
    int next = s * p;
    IndexList new_raised;
    for (int pass = 0; pass < 2; ++pass)
      for (int x = 0; x < p; ++x)
        if (up[static_cast<std::size_t>(x)] == pass) {
          if (pass == 1) new_raised.push_back(next);
          sorted.row(next++) = S.row(s * p + x);
        }
    out.elevated[static_cast<std::size_t>(s)] = new_raised;
  }
  out.instance = permute_rows(sorted, lambda, rng.derive(12).key());
  return out;
}

}  // namespace isorank::synth
