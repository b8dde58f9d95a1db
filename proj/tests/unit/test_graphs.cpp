#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hetdist/graphs.hpp"
#include "../support/check.hpp"
#include "../support/oracles.hpp"

using namespace hetdist;
using testing_support::error_kind;

namespace {

Eigen::MatrixXd random_distances(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
  return d;
}

}  // namespace

TEST_SUITE("graphs") {
  TEST_CASE("collinear points with a tie") {
    DataMatrix x(4, 1);
    x << 0, 1, 3, 6;
    const KnnGraph g = knn(pairwise_sq_dists(x), 2);
    CHECK(g.nbr.row(0) == (IndexMatrix(1, 2) << 1, 2).finished());
    CHECK(g.nbr.row(1) == (IndexMatrix(1, 2) << 0, 2).finished());
    // d(2, 0) == d(2, 3) == 9: the smaller index wins.
    CHECK(g.nbr.row(2) == (IndexMatrix(1, 2) << 1, 0).finished());
    CHECK(g.nbr.row(3) == (IndexMatrix(1, 2) << 2, 1).finished());
    CHECK(g.dist(3, 1) == 25.0);
  }

  TEST_CASE("all-equal distances list neighbors by index") {
    const KnnGraph g = knn(SqDistMatrix(Eigen::MatrixXd::Ones(5, 5)), 3);
    CHECK(g.nbr.row(0) == (IndexMatrix(1, 3) << 1, 2, 3).finished());
    CHECK(g.nbr.row(4) == (IndexMatrix(1, 3) << 0, 1, 2).finished());
  }

  TEST_CASE("matches a stable argsort, negative values included") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
      Eigen::MatrixXd d = random_distances(30, rng);
      d.array() -= 0.3;
      // Quantize to force ties.
      d = (d * 8.0).array().round() / 8.0;
      const KnnGraph g = knn(SqDistMatrix(d), 7);
      const auto ref = oracle::naive_knn(SqDistMatrix(d).values(), 7);
      for (Index i = 0; i < 30; ++i)
        for (Index r = 0; r < 7; ++r) CHECK(g.nbr(i, r) == ref[size_t(i)][size_t(r)]);
    }
  }

  TEST_CASE("smaller k is a prefix of larger k") {
    std::mt19937_64 rng(2);
    const SqDistMatrix d(random_distances(40, rng));
    const KnnGraph big = knn(d, 20);
    for (Index k : {1, 5, 10, 19}) CHECK(knn(d, k).nbr == big.nbr.leftCols(k));
  }

  TEST_CASE("adding a per-row constant leaves the graph unchanged") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd d = random_distances(25, rng);
    Eigen::MatrixXd shifted = d;
    for (Index i = 0; i < 25; ++i) shifted.row(i).array() += 0.25 * double(i);
    CHECK(knn(SqDistMatrix(d), 6).nbr == knn(SqDistMatrix(shifted), 6).nbr);
  }

  TEST_CASE("k validation") {
    const SqDistMatrix d(Eigen::MatrixXd::Ones(4, 4));
    CHECK(error_kind([&] { knn(d, 0); }) == ErrorKind::OutOfRange);
    CHECK(error_kind([&] { knn(d, 4); }) == ErrorKind::OutOfRange);
  }

  TEST_CASE("accuracy of identical, disjoint and partial graphs") {
    KnnGraph a{IndexMatrix(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    KnnGraph b = a;
    a.nbr << 1, 2, 0, 2;
    b.nbr << 2, 1, 3, 4;
    CHECK(knn_accuracy(a, a) == 1.0);
    CHECK(knn_accuracy(a, b) == 0.5);
    KnnGraph c{IndexMatrix(2, 1), Eigen::MatrixXd::Zero(2, 1)};
    CHECK(error_kind([&] { knn_accuracy(a, c); }) == ErrorKind::ShapeMismatch);
  }

  TEST_CASE("impurity of separated clusters is zero") {
    DataMatrix x(6, 1);
    x << 0, 0.1, 0.2, 10, 10.1, 10.2;
    const KnnGraph g = knn(pairwise_sq_dists(x), 2);
    CHECK(impurity_score(g, {0, 0, 0, 1, 1, 1}) == 0.0);
    CHECK(impurity_score(g, {0, 1, 0, 1, 0, 1}) > 0.0);
    CHECK(error_kind([&] { impurity_score(g, {0, 1}); }) == ErrorKind::ShapeMismatch);
  }

  TEST_CASE("impurity under random labels matches its expectation") {
    // Balanced labels independent of the graph: each entry differs from
    // its row label with probability (n/2) / (n - 1).
    const Index n = 100;
    std::vector<double> scores;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(1000 + seed);
      const KnnGraph g = knn(SqDistMatrix(random_distances(n, rng)), 10);
      std::vector<int> labels(static_cast<size_t>(n));
      for (Index i = 0; i < n; ++i) labels[size_t(i)] = i < n / 2 ? 0 : 1;
      std::shuffle(labels.begin(), labels.end(), rng);
      scores.push_back(impurity_score(g, labels));
    }
    double mean = 0.0, var = 0.0;
    for (double s : scores) mean += s;
    mean /= 100.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= 99.0;
    const double expected = (n / 2.0) / double(n - 1);
    CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(var / 100.0));
  }

  TEST_CASE("CSV export") {
    DataMatrix x(3, 1);
    x << 0, 1, 3;
    std::ostringstream out;
    write_knn_csv(knn(pairwise_sq_dists(x), 1), out);
    CHECK(out.str() == "i,rank,j,distance\n0,1,1,1\n1,1,0,1\n2,1,1,4\n");
  }
}
