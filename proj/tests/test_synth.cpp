#include "doctest.h"

#include "isorank/sampling.hpp"
#include "isorank/synth.hpp"

using namespace isorank;
using namespace isorank::synth;

TEST_SUITE("synth") {
  TEST_CASE("generated families satisfy the instance invariants") {
    for (auto f : {Family::UniformSorted, Family::Block, Family::Smooth})
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = gen_isotonic(9, 6, f, seed, 2.0);
        CHECK(sampling::check_instance(inst) == "");
        CHECK(inst.lambda == 2.0);
      }
    CHECK(parse_family(to_string(Family::Smooth)) == Family::Smooth);
  }

  TEST_CASE("one block gives a constant matrix") {
    const auto inst = gen_isotonic(7, 4, Family::Block, 3, 1.0, 1);
    CHECK((inst.M.array() == inst.M(0, 0)).all());
  }

  TEST_CASE("generation is seed-deterministic") {
    CHECK(gen_isotonic(6, 6, Family::UniformSorted, 8).M == gen_isotonic(6, 6, Family::UniformSorted, 8).M);
    CHECK(gen_isotonic(6, 6, Family::UniformSorted, 8).M != gen_isotonic(6, 6, Family::UniformSorted, 9).M);
  }

  TEST_CASE("separated rows differ by at least the step") {
    const auto inst = gen_separated(8, 5, 0.1, 2);
    const Matrix s = reorder_rows(inst.M, inst.pi_star);
    for (int r = 0; r + 1 < 8; ++r) CHECK((s.row(r + 1) - s.row(r)).minCoeff() >= 0.1 - 1e-12);
    CHECK(sampling::check_instance(inst) == "");
  }

  TEST_CASE("toy entries") {
    const auto inst = gen_toy_34(0.5, 0.2, 1.0);
    CHECK(inst.M.rows() == 204);
    CHECK(inst.M.cols() == 10);
    CHECK(inst.M(0, 0) == 0.5);
    CHECK(inst.M(0, 2) == doctest::Approx(0.4));
    CHECK(inst.M(203, 2) == doctest::Approx(0.6));
    CHECK(inst.M(100, 2) == 0.5);
    CHECK(inst.M(100, 3) == doctest::Approx(0.4));
    CHECK(inst.M(103, 9) == doctest::Approx(0.6));
    CHECK(sampling::check_instance(inst) == "");
    CHECK_THROWS_AS(gen_toy_34(0.1, 0.2), InvalidArgument);
  }

  TEST_CASE("floor_dyadic") {
    CHECK(floor_dyadic(1.0) == 1);
    CHECK(floor_dyadic(7.9) == 4);
    CHECK(floor_dyadic(8.0) == 8);
    CHECK_THROWS_AS(floor_dyadic(0.5), InvalidArgument);
  }

  TEST_CASE("lower bound with zero upsilon is the step vector") {
    LowerBoundParams p{4, 2, 0.0};
    const auto lb = gen_lower_bound(16, 8, 1.0, p, 5);
    const Matrix s = reorder_rows(lb.instance.M, lb.instance.pi_star);
    for (int r = 0; r < 16; ++r) {
      CHECK((s.row(r).array() == lb.w(r)).all());
      CHECK(lb.w(r) == doctest::Approx((r / 4) * 4 / 64.0));
    }
  }

  TEST_CASE("lower bound presets are valid instances") {
    for (int n : {16, 32, 64})
      for (double lambda : {0.01, 1.0, 1e5}) {
        const auto params = lower_bound_preset(n, n, lambda);
        const auto lb = gen_lower_bound(n, n, lambda, params, 7);
        CHECK(sampling::check_instance(lb.instance, 1e-12) == "");
        CHECK(lb.elevated.size() == static_cast<std::size_t>(n / params.p));
        for (const auto& q : lb.questions) CHECK(q.size() == static_cast<std::size_t>(params.q));
      }
    CHECK_THROWS_AS(gen_lower_bound(16, 8, 1.0, LowerBoundParams{3, 2, 0.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(gen_lower_bound(16, 8, 1.0, LowerBoundParams{4, 2, 100.0}, 1), InvalidArgument);
  }

  TEST_CASE("packing sets are balanced and pairwise far apart") {
    const auto sets = packing_collection(16, 8, 3);
    CHECK(!sets.empty());
    for (std::size_t a = 0; a < sets.size(); ++a) {
      CHECK(sets[a].size() == 8);
      for (std::size_t b = a + 1; b < sets.size(); ++b) {
        std::vector<char> in(16, 0);
        for (int x : sets[a]) in[static_cast<std::size_t>(x)] ^= 1;
        for (int x : sets[b]) in[static_cast<std::size_t>(x)] ^= 1;
        int diff = 0;
        for (char c : in) diff += c;
        CHECK(diff >= 4);
      }
    }
  }
}
