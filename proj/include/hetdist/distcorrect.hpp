#pragma once

#include <cmath>
#include <vector>

#include "hetdist/error.hpp"
#include "hetdist/lsap.hpp"
#include "hetdist/types.hpp"

namespace hetdist {

/// Symmetric n x n squared-distance matrix whose diagonal is masked.
///
/// The diagonal is stored as 0 but carries no meaning; every consumer reads
/// off-diagonal entries only. Entries built from data are nonnegative;
/// corrected matrices may hold negative values.
class SqDistMatrix {
 public:
  SqDistMatrix() = default;
  explicit SqDistMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    values_.diagonal().setZero();
  }

  Index size() const noexcept { return values_.rows(); }
  double operator()(Index i, Index j) const { return values_(i, j); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Cost matrix for the assignment solver with the diagonal forbidden.
  MaskedCost masked_cost() const;

 private:
  Eigen::MatrixXd values_;
};

/// Neighbor maps from the two assignment rounds.
struct NeighborPairs {
  Assignment sigma1;
  Assignment sigma2;
};

/// Estimated squared noise magnitudes and the corrected distances.
/// Neither is clamped: r_hat and off-diagonal d_hat entries may be negative.
struct CorrectedDistances {
  Eigen::VectorXd r_hat;
  SqDistMatrix d_hat;
};

/// Streams feature blocks of a data matrix into a Gram matrix so that
/// squared distances can be formed without holding all columns at once.
class GramAccumulator {
 public:
  explicit GramAccumulator(Index n) : gram_(Eigen::MatrixXd::Zero(n, n)) {}

  /// Adds the contribution of a column block (n rows, any number of columns).
  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& block) {
    if (block.rows() != gram_.rows()) {
      throw Error(ErrorKind::ShapeMismatch, "block row count differs from accumulator size");
    }
    if (!block.allFinite()) throw Error(ErrorKind::NonFinite, "data block contains NaN or Inf");
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(block.derived());
  }

  /// Squared distances ||a||^2 + ||b||^2 - 2<a,b>, clamped at 0.
  SqDistMatrix distances() const;

  /// Squared row norms accumulated so far.
  Eigen::VectorXd row_norms_sq() const { return gram_.diagonal(); }

 private:
  Eigen::MatrixXd gram_;
};

/// Pairwise squared Euclidean distances between rows of `data`.
/// Requires n >= 2, m >= 1 and finite entries (NonFinite otherwise).
template <typename Derived>
SqDistMatrix pairwise_sq_dists(const Eigen::MatrixBase<Derived>& data) {
  if (data.rows() < 2 || data.cols() < 1) {
    throw Error(ErrorKind::TooSmall, "need at least 2 rows and 1 column");
  }
  GramAccumulator acc(data.rows());
  acc.add(data.template cast<double>());
  return acc.distances();
}

/// Two rounds of assignment on the corrupted distances: the first with the
/// diagonal masked, the second additionally masking (i, sigma1[i]).
/// Throws TooSmall for n < 4 and propagates Infeasible.
NeighborPairs identify_neighbors(const SqDistMatrix& d2);

/// Noise magnitudes from the neighbor triangles and the corrected matrix
/// d_hat[i][j] = d2[i][j] - (r_hat[i] + r_hat[j]).
CorrectedDistances estimate_noise(const SqDistMatrix& d2, const NeighborPairs& nbrs);

/// identify_neighbors followed by estimate_noise.
CorrectedDistances correct_distances(const SqDistMatrix& d2);

/// Per-observation SNR estimate; `valid[i]` is false where r_hat[i] <= 0 and
/// the corresponding value is then 0.
struct SnrEstimate {
  Eigen::VectorXd value;
  std::vector<bool> valid;
};

SnrEstimate snr_estimate(const Eigen::VectorXd& y_norms_sq, const Eigen::VectorXd& r_hat);

}  // namespace hetdist
