#pragma once

#include <iosfwd>
#include <vector>

#include "hetdist/distcorrect.hpp"
#include "hetdist/types.hpp"

namespace hetdist {

/// Row i lists the k nearest other points of i, ascending by distance with
/// ties broken by ascending index.
struct KnnGraph {
  IndexMatrix nbr;
  Eigen::MatrixXd dist;  ///< the distance value behind each neighbor entry

  Index n() const noexcept { return nbr.rows(); }
  Index k() const noexcept { return nbr.cols(); }
};

/// Uses the raw off-diagonal values, negatives included. OutOfRange unless
/// 1 <= k <= n - 1.
KnnGraph knn(const SqDistMatrix& d2, Index k);

/// Mean over rows of |test_i intersect truth_i| / k. ShapeMismatch if the
/// graphs differ in n or k.
double knn_accuracy(const KnnGraph& test, const KnnGraph& truth);

/// Fraction of neighbor entries whose label differs from the row's label.
double impurity_score(const KnnGraph& g, const std::vector<int>& labels);

/// CSV with header "i,rank,j,distance"; rank starts at 1.
void write_knn_csv(const KnnGraph& g, std::ostream& out);

}  // namespace hetdist
