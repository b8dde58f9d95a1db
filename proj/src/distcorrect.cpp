#include "hetdist/distcorrect.hpp"

#include <algorithm>

namespace hetdist {

MaskedCost SqDistMatrix::masked_cost() const {
  return MaskedCost::with_forbidden_diagonal(RowMatrixXd(values_));
}

SqDistMatrix GramAccumulator::distances() const {
  const Index n = gram_.rows();
  const Eigen::VectorXd norms = gram_.diagonal();
  Eigen::MatrixXd d2(n, n);
  // Only the lower triangle of gram_ is populated.
  for (Index j = 0; j < n; ++j) {
    d2(j, j) = 0.0;
    for (Index i = j + 1; i < n; ++i) {
      const double v = std::max(0.0, norms(i) + norms(j) - 2.0 * gram_(i, j));
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  return SqDistMatrix(std::move(d2));
}

NeighborPairs identify_neighbors(const SqDistMatrix& d2) {
  const Index n = d2.size();
  if (n < 4) {
    throw Error(ErrorKind::TooSmall, "need n >= 4 observations, got " + std::to_string(n));
  }
  MaskedCost cost = d2.masked_cost();
  Assignment first = solve(cost);
  for (Index i = 0; i < n; ++i) cost.forbid(i, first[i]);
  Assignment second = solve(cost);
  return {std::move(first), std::move(second)};
}

CorrectedDistances estimate_noise(const SqDistMatrix& d2, const NeighborPairs& nbrs) {
  const Index n = d2.size();
  if (nbrs.sigma1.size() != n || nbrs.sigma2.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "neighbor maps do not match the distance matrix");
  }
  Eigen::VectorXd r_hat(n);
  for (Index i = 0; i < n; ++i) {
    const Index a = nbrs.sigma1[i];
    const Index b = nbrs.sigma2[i];
    if (a == i || b == i || a == b) {
      throw IndexedError(ErrorKind::InvalidArgument, i, "neighbor triangle is degenerate");
    }
    r_hat(i) = 0.5 * (d2(i, a) + d2(i, b) - d2(a, b));
  }

  Eigen::MatrixXd d_hat(n, n);
  for (Index j = 0; j < n; ++j) {
    // Grouping the bias keeps d_hat exactly symmetric.
    for (Index i = 0; i < n; ++i) d_hat(i, j) = d2(i, j) - (r_hat(i) + r_hat(j));
  }
  return {std::move(r_hat), SqDistMatrix(std::move(d_hat))};
}

CorrectedDistances correct_distances(const SqDistMatrix& d2) {
  return estimate_noise(d2, identify_neighbors(d2));
}

SnrEstimate snr_estimate(const Eigen::VectorXd& y_norms_sq, const Eigen::VectorXd& r_hat) {
  if (y_norms_sq.size() != r_hat.size()) {
    throw Error(ErrorKind::ShapeMismatch, "norm and noise vectors differ in length");
  }
  SnrEstimate out{Eigen::VectorXd::Zero(r_hat.size()),
                  std::vector<bool>(static_cast<std::size_t>(r_hat.size()), false)};
  for (Index i = 0; i < r_hat.size(); ++i) {
    if (r_hat(i) > 0.0) {
      out.value(i) = (y_norms_sq(i) - r_hat(i)) / r_hat(i);
      out.valid[static_cast<std::size_t>(i)] = true;
    }
  }
  return out;
}

}  // namespace hetdist
