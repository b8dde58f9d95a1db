#include <random>

#include "doctest.h"
#include "hetdist/lsap.hpp"
#include "../support/check.hpp"
#include "../support/oracles.hpp"

using namespace hetdist;
using testing_support::error_kind;

namespace {

RowMatrixXd random_costs(Index n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RowMatrixXd c(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) c(i, j) = u(rng);
  return c;
}

}  // namespace

TEST_SUITE("lsap") {
  TEST_CASE("two points with masked diagonal swap") {
    RowMatrixXd c(2, 2);
    c << 0, 1, 1, 0;
    const MaskedCost cost = MaskedCost::with_forbidden_diagonal(c);
    const Assignment a = solve(cost);
    CHECK(a.sigma == std::vector<Index>{1, 0});
    CHECK(assignment_cost(cost, a) == 2.0);
  }

  TEST_CASE("single point with masked diagonal is infeasible") {
    const MaskedCost cost = MaskedCost::with_forbidden_diagonal(RowMatrixXd::Zero(1, 1));
    CHECK(error_kind([&] { solve(cost); }) == ErrorKind::Infeasible);
  }

  TEST_CASE("empty matrix is rejected") {
    CHECK(error_kind([] { solve(MaskedCost(RowMatrixXd(0, 0), BoolMatrix(0, 0))); }) ==
          ErrorKind::InvalidArgument);
  }

  TEST_CASE("a fully forbidden column is infeasible") {
    BoolMatrix mask = BoolMatrix::Constant(3, 3, false);
    mask.col(1).setConstant(true);
    CHECK(error_kind([&] { solve(MaskedCost(RowMatrixXd::Ones(3, 3), mask)); }) ==
          ErrorKind::Infeasible);
  }

  TEST_CASE("Hall violation without an empty line is infeasible") {
    // Rows 0 and 1 may only use column 2.
    BoolMatrix mask = BoolMatrix::Constant(3, 3, false);
    mask(0, 0) = mask(0, 1) = mask(1, 0) = mask(1, 1) = true;
    CHECK(error_kind([&] { solve(MaskedCost(RowMatrixXd::Ones(3, 3), mask)); }) ==
          ErrorKind::Infeasible);
  }

  TEST_CASE("identity assignment on zeros costs nothing") {
    const MaskedCost cost(RowMatrixXd::Zero(4, 4), BoolMatrix::Constant(4, 4, false));
    const Assignment id{{0, 1, 2, 3}};
    CHECK(assignment_cost(cost, id) == 0.0);
    CHECK(assignment_cost(cost, solve(cost)) == 0.0);
  }

  TEST_CASE("cyclic shift cost sums the chosen cells") {
    RowMatrixXd c = RowMatrixXd::Constant(3, 3, 100.0);
    for (Index i = 0; i < 3; ++i) c(i, (i + 1) % 3) = static_cast<double>(i + 1);
    const MaskedCost cost = MaskedCost::with_forbidden_diagonal(c);
    CHECK(assignment_cost(cost, Assignment{{1, 2, 0}}) == 6.0);
  }

  TEST_CASE("assignment_cost rejects forbidden cells and size mismatch") {
    const MaskedCost cost = MaskedCost::with_forbidden_diagonal(RowMatrixXd::Ones(3, 3));
    CHECK(error_kind([&] { assignment_cost(cost, Assignment{{0, 2, 1}}); }) ==
          ErrorKind::MaskViolation);
    CHECK(error_kind([&] { assignment_cost(cost, Assignment{{1, 0}}); }) ==
          ErrorKind::ShapeMismatch);
  }

  TEST_CASE("construction validates shape and finiteness of allowed cells") {
    RowMatrixXd c = RowMatrixXd::Ones(3, 3);
    CHECK(error_kind([&] { MaskedCost(c, BoolMatrix::Constant(2, 2, false)); }) ==
          ErrorKind::ShapeMismatch);
    CHECK(error_kind([&] { MaskedCost(RowMatrixXd::Ones(2, 3), BoolMatrix::Constant(2, 3, false)); }) ==
          ErrorKind::ShapeMismatch);
    c(0, 0) = std::numeric_limits<double>::infinity();
    CHECK(error_kind([&] { MaskedCost(c, BoolMatrix::Constant(3, 3, false)); }) ==
          ErrorKind::NonFinite);
    // A non-finite value under the mask is never read.
    CHECK_NOTHROW(MaskedCost::with_forbidden_diagonal(c));
  }

  TEST_CASE("matches exhaustive search on random 7x7 with masked diagonal") {
    std::mt19937_64 rng(7);
    const RowMatrixXd c = random_costs(7, rng);
    const MaskedCost cost = MaskedCost::with_forbidden_diagonal(c);
    const auto best = oracle::brute_force_lsap(c, cost.forbidden());
    CHECK(assignment_cost(cost, solve(cost)) == doctest::Approx(best.cost).epsilon(1e-12));
  }

  TEST_CASE("optimal and bijective on random sizes 1..8 with random masks") {
    std::mt19937_64 rng(11);
    std::bernoulli_distribution block(0.25);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const Index n = 1 + trial % 8;
      const RowMatrixXd c = random_costs(n, rng, -5.0, 5.0);
      BoolMatrix mask(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) mask(i, j) = block(rng);
      const auto best = oracle::brute_force_lsap(c, mask);
      const MaskedCost cost(c, mask);
      if (best.sigma.empty()) {
        CHECK(error_kind([&] { solve(cost); }) == ErrorKind::Infeasible);
        continue;
      }
      const Assignment a = solve(cost);
      REQUIRE(a.is_bijection());
      for (Index i = 0; i < n; ++i) CHECK(cost.allowed(i, a[i]));
      CHECK(assignment_cost(cost, a) == doctest::Approx(best.cost).epsilon(1e-12));
      ++checked;
    }
    CHECK(checked > 100);
  }

  TEST_CASE("integer costs with many ties still reach the optimum") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> u(0, 2);
    for (int trial = 0; trial < 100; ++trial) {
      const Index n = 2 + trial % 7;
      RowMatrixXd c(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) c(i, j) = u(rng);
      const MaskedCost cost = MaskedCost::with_forbidden_diagonal(c);
      const auto best = oracle::brute_force_lsap(c, cost.forbidden());
      CHECK(assignment_cost(cost, solve(cost)) == best.cost);
    }
  }

  TEST_CASE("deterministic output for fixed input") {
    std::mt19937_64 rng(3);
    const MaskedCost cost = MaskedCost::with_forbidden_diagonal(random_costs(40, rng));
    CHECK(solve(cost).sigma == solve(cost).sigma);
  }

  TEST_CASE("shifting by r_i + r_j moves every assignment by 2 sum r") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const Index n = 4 + trial % 5;
      const RowMatrixXd c = random_costs(n, rng);
      Eigen::VectorXd r(n);
      for (Index i = 0; i < n; ++i) r(i) = u(rng);
      RowMatrixXd shifted = c;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) shifted(i, j) += r(i) + r(j);
      const MaskedCost a = MaskedCost::with_forbidden_diagonal(c);
      const MaskedCost b = MaskedCost::with_forbidden_diagonal(shifted);
      std::mt19937_64 prng(trial);
      const auto perm = oracle::random_feasible_permutation(a.forbidden(), prng);
      REQUIRE(!perm.empty());
      const Assignment p{perm};
      CHECK(assignment_cost(b, p) ==
            doctest::Approx(assignment_cost(a, p) + 2.0 * r.sum()).epsilon(1e-12));
      CHECK(assignment_cost(b, solve(b)) ==
            doctest::Approx(assignment_cost(a, solve(a)) + 2.0 * r.sum()).epsilon(1e-12));
    }
  }

  TEST_CASE("second round with one extra mask per row succeeds for n >= 4") {
    std::mt19937_64 rng(8);
    for (Index n = 4; n <= 30; ++n) {
      MaskedCost cost = MaskedCost::with_forbidden_diagonal(random_costs(n, rng));
      const Assignment first = solve(cost);
      for (Index i = 0; i < n; ++i) cost.forbid(i, first[i]);
      const Assignment second = solve(cost);
      CHECK(second.is_bijection());
      for (Index i = 0; i < n; ++i) {
        CHECK(second[i] != i);
        CHECK(second[i] != first[i]);
      }
    }
  }

  TEST_CASE("is_bijection detects repeats and out-of-range entries") {
    CHECK(Assignment{{2, 0, 1}}.is_bijection());
    CHECK_FALSE(Assignment{{0, 0, 1}}.is_bijection());
    CHECK_FALSE(Assignment{{0, 3, 1}}.is_bijection());
  }
}
