#include <cmath>
#include <set>

#include "doctest.h"

#include "isorank/rng.hpp"
#include "isorank/sampling.hpp"
#include "isorank/synth.hpp"

using namespace isorank;

TEST_SUITE("rng") {
  TEST_CASE("streams replay from the seed") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
      const auto x = a();
      CHECK(x == b());
      (void)c();
    }
    CHECK(Rng(42)() != Rng(43)());
  }

  TEST_CASE("derive does not advance the parent") {
    Rng a(7);
    const auto first = Rng(7)();
    (void)a.derive(3);
    CHECK(a() == first);
    CHECK(a.derive(1).key() != a.derive(2).key());
    CHECK(a.derive(1, 2).key() == a.derive(1).derive(2).key());
  }

  TEST_CASE("uniform and below stay in range and look uniform") {
    Rng r(1);
    double sum = 0.0;
    std::vector<int> hist(7, 0);
    const int N = 70000;
    for (int i = 0; i < N; ++i) {
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
      const auto b = r.below(7);
      REQUIRE(b < 7);
      ++hist[b];
    }
    CHECK(std::abs(sum / N - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / N));
    for (int h : hist) CHECK(std::abs(h - N / 7.0) < 4.0 * std::sqrt(N / 7.0));
  }
}

namespace {

sampling::SignalInstance constant_instance(int n, int d, double value, double lambda) {
  sampling::SignalInstance inst;
  inst.M = Matrix::Constant(n, d, value);
  inst.pi_star = Permutation::identity(n);
  inst.lambda = lambda;
  return inst;
}

sampling::ObservationStream stream_of(int n, int d, double lambda, std::vector<sampling::Observation> recs) {
  sampling::ObservationStream s;
  s.n = n;
  s.d = d;
  s.lambda = lambda;
  s.records = std::move(recs);
  return s;
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("lambda_effective") {
    auto e = sampling::lambda_effective(5.0, 1);
    CHECK(e.lambda0 == doctest::Approx(1.0));
    CHECK(e.lambda1 == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(e.lambda1 == doctest::Approx(0.6321).epsilon(1e-4));
    e = sampling::lambda_effective(10.0, 2);
    CHECK(e.lambda0 == doctest::Approx(1.0));
    e = sampling::lambda_effective(1e-9, 1);
    CHECK(e.lambda1 / e.lambda0 == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("check_instance") {
    auto inst = constant_instance(3, 2, 0.5, 1.0);
    CHECK(sampling::check_instance(inst).empty());
    inst.M(0, 0) = 1.5;
    CHECK_FALSE(sampling::check_instance(inst).empty());
    inst.M(0, 0) = 0.9;  // row 0 has rank 0 and now exceeds row 1
    CHECK_FALSE(sampling::check_instance(inst).empty());
  }

  TEST_CASE("poissonize is deterministic and rejects bad input") {
    const auto inst = constant_instance(4, 3, 0.5, 2.0);
    const auto a = sampling::poissonize(inst, {}, 9), b = sampling::poissonize(inst, {}, 9);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a.records[t].row == b.records[t].row);
      CHECK(a.records[t].value == b.records[t].value);
    }
    auto bad = inst;
    bad.lambda = std::nan("");
    CHECK_THROWS_AS(sampling::poissonize(bad, {}, 1), InvalidArgument);
    bad.lambda = 0.0;
    CHECK_THROWS_AS(sampling::poissonize(bad, {}, 1), InvalidArgument);
    CHECK_THROWS_AS(sampling::poissonize(constant_instance(0, 0, 0.5, 1.0), {}, 1), InvalidArgument);
  }

  TEST_CASE("tiny lambda gives an empty stream") {
    const auto s = sampling::poissonize(constant_instance(2, 2, 0.5, 1e-12), {}, 3);
    CHECK(s.size() == 0);
  }

  TEST_CASE("gaussian noise is centered on the signal") {
    const auto s = sampling::poissonize(constant_instance(1, 1, 0.5, 20000.0), {}, 5);
    REQUIRE(s.size() >= 10000);
    double sum = 0.0;
    for (const auto& r : s.records) sum += r.value;
    CHECK(std::abs(sum / s.size() - 0.5) < 3.0 / std::sqrt(static_cast<double>(s.size())));
  }

  TEST_CASE("bernoulli noise yields 0/1 values with mean M") {
    const auto s =
        sampling::poissonize(constant_instance(2, 2, 0.3, 5000.0), {sampling::NoiseKind::Bernoulli}, 5);
    double sum = 0.0;
    for (const auto& r : s.records) {
      REQUIRE((r.value == 0.0 || r.value == 1.0));
      sum += r.value;
    }
    const double n = static_cast<double>(s.size());
    CHECK(std::abs(sum / n - 0.3) < 3.0 * std::sqrt(0.21 / n));
  }

  TEST_CASE("Poisson count moments") {
    const auto inst = constant_instance(10, 10, 0.5, 2.0);
    const int reps = 10000;
    double sum = 0.0;
    for (int s = 0; s < reps; ++s) sum += static_cast<double>(sampling::poissonize(inst, {}, 1000 + s).size());
    // mean of 10^4 Poisson(200) counts: sd = sqrt(200)/100
    CHECK(std::abs(sum / reps - 200.0) < 3.0 * std::sqrt(200.0) / 100.0);
  }

  TEST_CASE("positions are uniform over the grid") {
    const auto s = sampling::poissonize(constant_instance(3, 4, 0.5, 3000.0), {}, 11);
    const auto counts = sampling::cell_counts(s);
    const double expected = 3000.0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 4; ++k) CHECK(std::abs(counts(i, k) - expected) < 5.0 * std::sqrt(expected));
  }

  TEST_CASE("empty stream gives empty batches") {
    const auto b = sampling::subsample_batches(stream_of(3, 2, 1.0, {}), 2, 1);
    REQUIRE(b.batches.size() == 10);
    for (const auto& batch : b.batches) {
      CHECK(batch.Y.isZero());
      CHECK(batch.r.isZero());
      CHECK(batch.mask().isZero());
    }
  }

  TEST_CASE("single record lands in exactly one batch") {
    const auto b = sampling::subsample_batches(stream_of(2, 2, 1.0, {{1, 1, 0.7}}), 1, 4);
    int hits = 0;
    for (const auto& batch : b.batches) {
      if (batch.r(1, 1) == 1) {
        ++hits;
        CHECK(batch.Y(1, 1) == doctest::Approx(0.7));
        CHECK(batch.observed(1, 1) == 1);
      }
      CHECK(batch.r.sum() == (batch.r(1, 1)));
    }
    CHECK(hits == 1);
  }

  TEST_CASE("records in one cell and one batch are averaged") {
    // With T = 1 and a single repeated cell, find a seed that puts all three in one batch.
    const auto s = stream_of(1, 1, 1.0, {{0, 0, 0.2}, {0, 0, 0.4}, {0, 0, 0.6}});
    bool seen = false;
    for (std::uint64_t seed = 0; seed < 500 && !seen; ++seed) {
      const auto b = sampling::subsample_batches(s, 1, seed);
      for (const auto& batch : b.batches)
        if (batch.r(0, 0) == 3) {
          CHECK(batch.Y(0, 0) == doctest::Approx(0.4));
          seen = true;
        }
    }
    CHECK(seen);
  }

  TEST_CASE("batches partition the stream counts and lambda0, lambda1 are set") {
    const auto inst = synth::gen_isotonic(6, 5, synth::Family::UniformSorted, 3, 4.0);
    const auto s = sampling::poissonize(inst, {}, 8);
    const auto b = sampling::subsample_batches(s, 3, 2);
    REQUIRE(b.batches.size() == 15);
    Eigen::MatrixXi total = Eigen::MatrixXi::Zero(6, 5);
    for (const auto& batch : b.batches) {
      total += batch.r;
      CHECK((batch.mask().array() == (batch.r.array() >= 1).cast<int>()).all());
      CHECK(((batch.r.array() == 0) <= (batch.Y.array() == 0.0)).all());
    }
    CHECK(total == sampling::cell_counts(s));
    CHECK(b.lambda0 == doctest::Approx(4.0 / 15.0));
    CHECK(b.lambda1 == doctest::Approx(1.0 - std::exp(-4.0 / 15.0)));
    CHECK(b.window(1).size() == 5);
    CHECK(b.window(1).data() == b.batches.data() + 5);
  }

  TEST_CASE("mask frequency matches lambda1") {
    const auto inst = constant_instance(10, 10, 0.5, 2.5);
    const int reps = 100;  // 10^4 cells per batch position in total
    double hits = 0.0, cells = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto b = sampling::subsample_batches(sampling::poissonize(inst, {}, 50 + r), 1, 70 + r);
      hits += b.batches[0].mask().sum();
      cells += 100.0;
    }
    const double p = 1.0 - std::exp(-0.5);
    CHECK(std::abs(hits / cells - p) < 3.0 * std::sqrt(p * (1 - p) / cells));
  }

  TEST_CASE("observed averages are unbiased for M") {
    auto inst = constant_instance(4, 4, 0.25, 50.0);
    double sum = 0.0;
    int cells = 0;
    for (int r = 0; r < 50; ++r) {
      const auto b = sampling::subsample_batches(sampling::poissonize(inst, {}, 300 + r), 1, 9 + r);
      for (const auto& batch : b.batches)
        for (int i = 0; i < 4; ++i)
          for (int k = 0; k < 4; ++k)
            if (batch.r(i, k) >= 1) {
              sum += batch.Y(i, k) * batch.r(i, k);
              cells += batch.r(i, k);
            }
    }
    CHECK(std::abs(sum / cells - 0.25) < 3.0 / std::sqrt(static_cast<double>(cells)));
  }

  TEST_CASE("full observation batches copy M") {
    Matrix M(2, 2);
    M << 0.1, 0.2, 0.3, 0.4;
    const auto b = sampling::full_observation_batches(M, 2, 3.0);
    REQUIRE(b.batches.size() == 10);
    for (const auto& batch : b.batches) {
      CHECK(batch.Y == M);
      CHECK(batch.r.isOnes());
    }
    CHECK(b.lambda0 == 3.0);
  }

  TEST_CASE("split_stream partitions records") {
    const auto inst = synth::gen_isotonic(5, 5, synth::Family::Smooth, 1, 3.0);
    const auto s = sampling::poissonize(inst, {}, 2);
    const auto parts = sampling::split_stream(s, 3, 4);
    REQUIRE(parts.size() == 3);
    std::size_t total = 0;
    for (const auto& p : parts) {
      total += p.size();
      CHECK(p.lambda == doctest::Approx(1.0));
    }
    CHECK(total == s.size());
  }
}
