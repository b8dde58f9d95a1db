#pragma once

#include <random>
#include <vector>

#include "hetdist/types.hpp"

namespace hetdist {

/// Seeded generator for one named stream of a dataset. The engine is
/// std::mt19937_64 initialised from std::seed_seq{seed, stream, index}, so
/// every row or block can be regenerated independently.
std::mt19937_64 make_rng(Seed seed, std::uint64_t stream, std::uint64_t index = 0);

/// Points of a low-dimensional model before embedding.
struct ManifoldSample {
  DataMatrix z;             ///< n x d intrinsic coordinates
  std::vector<int> labels;  ///< component id, empty when not applicable
  Eigen::VectorXd theta;    ///< generative angle, empty when not applicable
};

/// Dataset with its clean counterpart and the exact noise that was added.
struct SyntheticDataset {
  DataMatrix x_clean;
  DataMatrix y_noisy;
  DataMatrix eta;
  Eigen::VectorXd r_true;   ///< squared row norms of eta
  Eigen::VectorXd theta;    ///< empty when not applicable
  std::vector<int> labels;  ///< empty when not applicable
  Seed seed = 0;
  DataMatrix intrinsic;       ///< n x d coordinates before embedding (may be empty)
  Eigen::MatrixXd embedding;  ///< m x d orthonormal columns (may be empty)

  Index n() const noexcept { return x_clean.rows(); }
  Index m() const noexcept { return x_clean.cols(); }
};

/// Cross terms eps_ij = 2<x_i - x_j, eta_i - eta_j> - 2<eta_i, eta_j>.
struct EpsilonOracle {
  Eigen::MatrixXd eps;
};

/// m x d matrix with orthonormal columns: Householder QR of a seeded
/// Gaussian matrix with the signs of R's diagonal folded into Q (Haar).
/// Throws DimError when m < d.
Eigen::MatrixXd random_orthonormal_embedding(Index d, Index m, Seed seed);

/// theta ~ U[0, 2pi), z = (cos theta, sin theta).
ManifoldSample sample_circle(Index n, Seed seed);

/// Large unit circle (theta ~ N(0, (0.17 * 2pi)^2)) for the first n/2
/// points, small circle of radius 0.1 at (1.3, 0) with uniform theta for the
/// rest. Labels 0 and 1.
ManifoldSample sample_two_circles(Index n, Seed seed);

/// With probability 0.8 uniform in the ball of radius 0.3 around
/// (0.5, 0.5, 0.5), otherwise uniform on the circle of radius 0.4 around the
/// same center in the plane z = 0.5. Labels 0 (ball) and 1 (ring); theta is
/// the ring angle for ring points and 0 for ball points.
ManifoldSample sample_ball_and_ring(Index n, Seed seed);

/// x_i = R z_i with R from random_orthonormal_embedding. No noise.
SyntheticDataset embed(const ManifoldSample& sample, Index m, Seed seed);

SyntheticDataset gen_circle(Index n, Index m, Seed seed);
SyntheticDataset gen_ball_and_ring(Index n, Index m, Seed seed);

/// Noise magnitude profile 0.1 + 0.9 (1 + cos(2 theta + phi)) / 2.
double noise_profile(double theta, double phi) noexcept;

/// eta_i = magnitudes[i] * u_i with u_i uniform on the unit sphere
/// (a normalised seeded Gaussian vector, one stream per row).
SyntheticDataset add_sphere_noise(SyntheticDataset ds, const Eigen::VectorXd& magnitudes,
                                  Seed seed);

/// Sphere noise with magnitude scale * noise_profile(theta_i, phi).
/// Throws MissingTheta when ds has no angles.
SyntheticDataset add_geometry_noise(SyntheticDataset ds, double phi, double scale, Seed seed);

/// Two-circle dataset with noise already added: g(theta, pi) on the large
/// circle and 0.1 g(theta, 0) on the small one. n must be even.
SyntheticDataset gen_two_circles(Index n, Index m, Seed seed);

struct Range {
  double lo;
  double hi;
};

/// Diagonal Gaussian noise with covariance entries tau_i delta_k / m.
///
/// Columns are produced in fixed blocks of `kBlock` features, each from its
/// own stream, so a matrix can be generated in pieces and still match the
/// all-at-once result.
class DiagGaussianNoise {
 public:
  static constexpr Index kBlock = 256;

  DiagGaussianNoise(Eigen::VectorXd tau, Eigen::VectorXd delta, Seed seed);

  /// Draws tau_i ~ U(tau_range) and delta_k ~ U(delta_range).
  static DiagGaussianNoise draw(Index n, Index m, Range tau_range, Range delta_range, Seed seed);

  Index n() const noexcept { return tau_.size(); }
  Index m() const noexcept { return delta_.size(); }
  Index num_blocks() const noexcept { return (m() + kBlock - 1) / kBlock; }
  Index block_begin(Index b) const noexcept { return b * kBlock; }
  Index block_width(Index b) const noexcept;

  /// n x block_width(b) noise for columns starting at block_begin(b).
  DataMatrix sample_block(Index b) const;

  /// E||eta_i||^2 = tau_i * mean(delta).
  Eigen::VectorXd expected_energy() const;

  const Eigen::VectorXd& tau() const noexcept { return tau_; }
  const Eigen::VectorXd& delta() const noexcept { return delta_; }

 private:
  Eigen::VectorXd tau_;
  Eigen::VectorXd delta_;
  Seed seed_;
};

SyntheticDataset add_diag_gaussian_noise(SyntheticDataset ds, Range tau_range, Range delta_range,
                                         Seed seed);

/// eta_i = magnitudes[i] e_i' with {e_i'} orthonormal and orthogonal to the
/// span of the clean rows, so every cross term vanishes. Requires
/// m >= n + rank(X); throws DimError otherwise.
SyntheticDataset make_orthogonal_noise(SyntheticDataset ds, const Eigen::VectorXd& magnitudes);

/// `values` distinct points (rows of a seeded standard Gaussian in R^m,
/// scaled to norm <= 1), each repeated `copies` times consecutively.
SyntheticDataset gen_duplicates(Index values, Index copies, Index m, Seed seed);

EpsilonOracle epsilon_oracle(const SyntheticDataset& ds);

/// Count matrix from cluster-specific expression profiles.
struct CountDataset {
  DataMatrix counts;
  std::vector<int> labels;
  Eigen::VectorXd library_target;  ///< drawn library size per cell
  DataMatrix profiles;             ///< clusters x m, rows sum to 1
};

struct PoissonSurrogateParams {
  Index clusters = 6;
  Index cells_per_cluster = 500;
  Index genes = 5000;
  Range library{500.0, 5000.0};
  /// Share of the log library range covered by each cluster. Cluster
  /// windows are spaced evenly from the low to the high end, so library size
  /// depends on cell type as it does in sequencing data; 1 gives every
  /// cluster the whole range.
  double library_window = 0.7;
  double base_log_sd = 1.0;      ///< spread of the shared log-expression profile
  double marker_fraction = 0.1;  ///< fraction of genes perturbed per cluster
  double marker_log_sd = 0.6;    ///< spread of the per-cluster log fold changes
};

/// Shared lognormal base profile, per-cluster log fold changes on a random
/// subset of genes, log-uniform library sizes inside the cluster's window,
/// counts ~ Poisson(L_i p_c).
CountDataset gen_poisson_surrogate(const PoissonSurrogateParams& params, Seed seed);

}  // namespace hetdist
