#include <random>

#include "doctest.h"

#include "isorank/bench.hpp"
#include "isorank/reconstruct.hpp"
#include "isorank/sampling.hpp"
#include "isorank/synth.hpp"
#include "oracles.hpp"

using namespace isorank;
using namespace isorank::reconstruct;

namespace {

bool column_isotonic(const Matrix& m, double tol = 1e-9) {
  for (Eigen::Index i = 0; i + 1 < m.rows(); ++i)
    if ((m.row(i + 1) - m.row(i)).minCoeff() < -tol) return false;
  return true;
}

}  // namespace

TEST_SUITE("reconstruct") {
  TEST_CASE("pava examples") {
    CHECK(pava(std::vector<double>{3, 1, 2}) == std::vector<double>{2, 2, 2});
    CHECK(pava(std::vector<double>{0, 1, 1, 4}) == std::vector<double>{0, 1, 1, 4});
    CHECK_THROWS_AS(pava(std::vector<double>{}), InvalidArgument);
    const auto w = pava(std::vector<double>{1, 0}, std::vector<double>{3, 1});
    CHECK(w[0] == doctest::Approx(0.75));
    CHECK(w[1] == doctest::Approx(0.75));
  }

  TEST_CASE("pava matches the convex oracle on random length-7 vectors") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
      Vector y(7), w(7);
      for (int i = 0; i < 7; ++i) {
        y(i) = g(gen);
        w(i) = trial % 2 ? u(gen) : 1.0;
      }
      const auto got = pava(std::span<const double>(y.data(), 7), std::span<const double>(w.data(), 7));
      const auto want = oracle::isotonic(y, w, false);
      for (int i = 0; i < 7; ++i) CHECK(std::abs(got[static_cast<std::size_t>(i)] - want.x(i)) < 1e-6);
    }
  }

  TEST_CASE("project_isotonic examples") {
    Matrix Y(2, 1);
    Y << -1.0, 2.0;
    const auto f = project_isotonic(Y);
    CHECK(f.M_hat(0, 0) == 0.0);
    CHECK(f.M_hat(1, 0) == 1.0);
    Matrix iso(3, 2);
    iso << 0.1, 0.2, 0.3, 0.2, 0.9, 0.5;
    CHECK(project_isotonic(iso).M_hat == iso);
    CHECK(project_isotonic(iso).objective == 0.0);
  }

  TEST_CASE("project_isotonic matches the box-constrained oracle, is idempotent and non-expansive") {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> g(0.5, 0.6);
    for (int trial = 0; trial < 30; ++trial) {
      Matrix Y(6, 4), Z(6, 4);
      for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 4; ++k) {
          Y(i, k) = g(gen);
          Z(i, k) = g(gen);
        }
      const auto f = project_isotonic(Y);
      for (int k = 0; k < 4; ++k) {
        const auto want = oracle::isotonic(Y.col(k), Vector::Ones(6), true);
        CHECK((f.M_hat.col(k) - want.x).cwiseAbs().maxCoeff() < 1e-6);
      }
      CHECK((project_isotonic(f.M_hat).M_hat - f.M_hat).norm() < 1e-12);
      CHECK((project_isotonic(Z).M_hat - f.M_hat).norm() <= (Z - Y).norm() + 1e-12);
      CHECK((project_isotonic(Y, true, kernels::Exec::Serial).M_hat - f.M_hat).norm() < 1e-12);
    }
  }

  TEST_CASE("bi-isotonic projection examples") {
    Matrix Y(2, 2);
    Y << 1.0, 0.0, 0.0, 1.0;
    // x00 <= x01, x10 <= x11 pools the three cells holding 1, 0, 0 and leaves x11 = 1
    const auto f = project_biisotonic(Y);
    CHECK(f.converged);
    Matrix want(2, 2);
    want << 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0;
    CHECK((f.M_hat - want).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(f.objective == doctest::Approx(2.0 / 3).epsilon(1e-6));
    CHECK(oracle::biisotonic(Y).objective == doctest::Approx(2.0 / 3).epsilon(1e-6));
    Matrix B(2, 3);
    B << 0.1, 0.2, 0.3, 0.2, 0.4, 0.9;
    const auto fixed = project_biisotonic(B);
    CHECK((fixed.M_hat - B).norm() < 1e-12);
  }

  TEST_CASE("bi-isotonic projection matches the convex oracle") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    for (int trial = 0; trial < 10; ++trial) {
      Matrix Y(4, 3);
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 3; ++k) Y(i, k) = u(gen);
      const auto got = project_biisotonic(Y);
      const auto want = oracle::biisotonic(Y);
      CHECK(std::abs(got.objective - want.objective) < 1e-6);
      CHECK(column_isotonic(got.M_hat, 1e-8));
      CHECK(column_isotonic(got.M_hat.transpose(), 1e-8));
    }
  }

  TEST_CASE("fit_given_order maps back to the original labels") {
    Matrix Y(3, 1);
    Y << 0.9, 0.1, 0.5;
    const Permutation pi({2, 0, 1});
    const auto f = fit_given_order(Y, pi);
    CHECK((f.M_hat - Y).norm() < 1e-12);
  }

  TEST_CASE("scaled sums") {
    sampling::ObservationStream s;
    s.n = 1;
    s.d = 2;
    s.lambda = 2.0;
    s.records = {{0, 0, 1.0}, {0, 0, 3.0}, {0, 1, 2.0}};
    const Matrix a = scaled_sums(s, 4.0, 2, ScaleRule::SplitRate);
    CHECK(a(0, 0) == doctest::Approx(2.0));
    CHECK(a(0, 1) == doctest::Approx(1.0));
    const Matrix b = scaled_sums(s, 4.0, 2, ScaleRule::Lambda);
    CHECK(b(0, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("noiseless full observation with the identity order recovers M") {
    const auto inst = synth::gen_isotonic(8, 5, synth::Family::UniformSorted, 4, 1.0);
    const Matrix sorted = reorder_rows(inst.M, inst.pi_star);
    const auto f = fit_given_order(sorted, Permutation::identity(8));
    CHECK((f.M_hat - sorted).norm() < 1e-12);
  }

  TEST_CASE("reconstruction runs end to end and stays in the isotonic set") {
    const auto inst = synth::gen_isotonic(10, 8, synth::Family::Smooth, 9, 6.0);
    const auto s = sampling::poissonize(inst, {}, 10);
    ReconstructConfig cfg;
    cfg.seed = 3;
    const auto r = reconstruct_iso(s, cfg);
    CHECK(r.fit.M_hat.rows() == 10);
    CHECK(column_isotonic(reorder_rows(r.fit.M_hat, r.pi_hat)));
    CHECK((r.fit.M_hat.array() >= 0.0).all());
    CHECK((r.fit.M_hat.array() <= 1.0).all());
    const auto b = reconstruct_biso(s, cfg);
    CHECK(b.fit.M_hat.cols() == 8);
    CHECK(bench::reconstruction_loss(b.fit.M_hat, inst.M) >= 0.0);
  }
}
