#pragma once

#include <vector>

#include "hetdist/distcorrect.hpp"
#include "hetdist/synth.hpp"
#include "hetdist/types.hpp"

namespace hetdist {

/// Normalized L1 errors of one pipeline run.
struct ErrorReport {
  double l1_noise = 0.0;
  double l1_dist = 0.0;
  Index n = 0;
  Index m = 0;
  Seed seed = 0;
};

/// (1/n) sum |r_hat_i - r_i|. ShapeMismatch on unequal lengths.
double l1_noise_error(const Eigen::VectorXd& r_hat, const Eigen::VectorXd& r_true);

/// Mean absolute off-diagonal deviation, 1/(n(n-1)) sum_{i != j}.
double l1_dist_error(const SqDistMatrix& d_hat, const SqDistMatrix& d_true);

/// Grid partition of points in the unit cube into boxes of side 1/k.
struct PartitionReport {
  Index k_boxes_per_axis = 0;
  double avg_weighted_sq_diam = 0.0;  ///< (1/n) sum over nonempty boxes of |B| diam(B)^2
  Index min_subset_size = 0;          ///< smallest nonempty box
  Index nonempty_boxes = 0;
  double box_diagonal = 0.0;          ///< sqrt(d) / k, the bound used for any box
  Index n = 0;
  Index d = 0;
};

/// Box diameters are exact (largest pairwise distance among members). A
/// coordinate equal to 1 falls in the last box. OutOfRange when a coordinate
/// leaves [0, 1] or k < 1.
PartitionReport grid_partition_report(const DataMatrix& points, Index k_per_axis);

/// Boxes per axis for arbitrary densities: floor((n / log(n)^2)^(1/(2(d+2)))), at least 1.
Index partition_boxes_general(Index n, Index d);
/// Boxes per axis for densities bounded below: ceil((n / (t^(2d) log n))^(1/d)), at least 1.
Index partition_boxes_bounded(Index n, Index d, double t);
/// 4 d (log(n)^2 / n)^(1/(d+2)).
double partition_bound_general(Index n, Index d);
/// t^4 d (log(n) / n)^(2/d).
double partition_bound_bounded(Index n, Index d, double t);

/// Clean dataset families for the assignment-cost curve.
enum class CurveFamily { BallAndRing, Circle, Duplicates };

struct CostCurveRun {
  Index n = 0;
  Seed seed = 0;
  double round1 = 0.0;  ///< Tr(P1^T D) / n
  double round2 = 0.0;  ///< Tr(P2^T D) / n
};

struct CostCurvePoint {
  Index n = 0;
  double mean_round1 = 0.0;
  double mean_round2 = 0.0;
};

struct CostCurve {
  std::vector<CostCurveRun> runs;      ///< grid-major, seeds in the given order
  std::vector<CostCurvePoint> points;  ///< one per grid value
};

/// Runs identify_neighbors on the clean distances of each (n, seed) cell and
/// records both normalized assignment costs. The Duplicates family uses n/4
/// distinct values with four copies each, so n must be a multiple of 4.
CostCurve lsap_cost_curve(CurveFamily family, const std::vector<Index>& n_grid,
                          const std::vector<Seed>& seeds, int threads = 1);

/// Least-squares slope of log(ys) against log(xs). NonPositive unless all
/// values are positive; InvalidArgument with fewer than three points.
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

enum class ScalingAxis { M, N };

/// Ball and ring embedded in R^m with diagonal Gaussian noise. Along the
/// chosen axis the grid varies that dimension while the other one stays at
/// `fixed`. Noisy features are streamed in column blocks, so the noisy
/// matrix is never held in full.
struct ScalingConfig {
  ScalingAxis axis = ScalingAxis::M;
  Index fixed = 2000;
  std::vector<Index> grid;
  std::vector<Seed> seeds;
  Range tau{0.01, 0.15};
  Range delta{0.01, 0.15};
  bool with_noise = true;
  int threads = 1;
};

/// Reports in grid-major order, seeds in the given order.
std::vector<ErrorReport> error_scaling_experiment(const ScalingConfig& config);

/// Single (n, m, seed) cell of error_scaling_experiment.
ErrorReport error_scaling_run(Index n, Index m, Seed seed, const ScalingConfig& config);

/// 1 / library size per row. EmptyRow (with index) when a row sums to zero.
Eigen::VectorXd poisson_reference(const DataMatrix& counts);

/// Pearson correlation. ShapeMismatch on unequal lengths.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace hetdist
