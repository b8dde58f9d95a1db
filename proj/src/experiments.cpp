#include "hetdist/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "hetdist/error.hpp"
#include "hetdist/graphs.hpp"
#include "hetdist/ingest.hpp"

namespace hetdist {

namespace {

Index largest_k(const std::vector<Index>& grid, Index n) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty neighborhood grid");
  const Index k = *std::max_element(grid.begin(), grid.end());
  if (*std::min_element(grid.begin(), grid.end()) < 1 || k > n - 1) {
    throw Error(ErrorKind::OutOfRange, "neighborhood sizes must lie in [1, n - 1]");
  }
  return k;
}

/// First k columns of a larger graph; rows of a knn graph are prefix-stable.
KnnGraph prefix(const KnnGraph& g, Index k) {
  return {g.nbr.leftCols(k), g.dist.leftCols(k)};
}

}  // namespace

CircleResult run_circle(const CircleParams& p, Seed seed) {
  if (p.kernel_row < 0 || p.kernel_row >= p.n) {
    throw Error(ErrorKind::OutOfRange, "kernel row outside [0, n)");
  }
  const Index kmax = largest_k(p.k_grid, p.n);
  const SyntheticDataset ds = add_geometry_noise(gen_circle(p.n, p.m, seed), p.phi,
                                                 p.noise_scale, seed);

  CircleResult out;
  out.seed = seed;
  out.theta = ds.theta;
  out.r_true = ds.r_true;

  const SqDistMatrix clean = pairwise_sq_dists(ds.x_clean);
  const SqDistMatrix noisy = pairwise_sq_dists(ds.y_noisy);
  const CorrectedDistances corrected = correct_distances(noisy);
  out.r_hat = corrected.r_hat;
  out.r_correlation = pearson(out.r_hat, out.r_true);

  out.snr_true = ds.x_clean.rowwise().squaredNorm().array() / ds.r_true.array();
  out.snr_hat = snr_estimate(ds.y_noisy.rowwise().squaredNorm(), out.r_hat);
  std::vector<double> rel;
  for (Index i = 0; i < p.n; ++i) {
    if (!out.snr_hat.valid[static_cast<std::size_t>(i)]) {
      ++out.snr_invalid;
      continue;
    }
    rel.push_back(std::abs(out.snr_hat.value(i) - out.snr_true(i)) / out.snr_true(i));
  }
  out.snr_rel_error_p90 = rel.empty() ? INFINITY : quantile(rel, 0.9);

  const KnnGraph truth = knn(clean, kmax);
  const KnnGraph g_noisy = knn(noisy, kmax);
  const KnnGraph g_corrected = knn(corrected.d_hat, kmax);
  for (Index k : p.k_grid) {
    const KnnGraph t = prefix(truth, k);
    out.accuracy.push_back({k, knn_accuracy(prefix(g_noisy, k), t),
                            knn_accuracy(prefix(g_corrected, k), t)});
  }

  out.kernel_clean = gaussian_row_stochastic(clean, p.sigma_sq).w.row(p.kernel_row).transpose();
  out.kernel_corrupted =
      gaussian_row_stochastic(noisy, p.sigma_sq).w.row(p.kernel_row).transpose();
  out.kernel_corrected =
      gaussian_row_stochastic(corrected.d_hat, p.sigma_sq).w.row(p.kernel_row).transpose();
  return out;
}

CircleSplit circle_split(const LaplacianSpectrum& spectrum, const KernelMatrix& kernel,
                         const std::vector<int>& labels) {
  const Index n = spectrum.eigenvectors.rows();
  if (static_cast<Index>(labels.size()) != n || kernel.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "labels, kernel and eigenvectors differ in size");
  }
  if (spectrum.eigenvectors.cols() < 2) {
    throw Error(ErrorKind::TooSmall, "need the two lowest eigenvectors");
  }
  const Eigen::MatrixXd basis = spectrum.eigenvectors.leftCols(2);

  CircleSplit out;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd indicator(n);
    for (Index i = 0; i < n; ++i) indicator(i) = labels[static_cast<std::size_t>(i)] == c;
    Eigen::VectorXd v = basis * (basis.transpose() * indicator);
    v /= v.norm();

    double sum = 0.0, sum_sq = 0.0, other_sq = 0.0;
    Index count = 0;
    for (Index i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == c) {
        sum += v(i);
        sum_sq += v(i) * v(i);
        ++count;
      } else {
        other_sq += v(i) * v(i);
      }
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sum_sq / static_cast<double>(count) - mean * mean;
    out.within_rel_var[c] = std::max(0.0, var) / (mean * mean);
    out.leakage[c] = std::sqrt(other_sq);
  }

  double cross = 0.0, within = 0.0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? within
                                                                                 : cross) +=
          kernel.w(i, j);
    }
  }
  out.cross_weight_ratio = cross / within;
  return out;
}

namespace {

SpectralView spectral_view(const SqDistMatrix& d2, const TwoCircleParams& p,
                           const std::vector<int>& labels) {
  const KernelMatrix kernel = self_tuning_kernel(d2, p.bandwidth_k);
  LaplacianSpectrum spectrum =
      smallest_eigenpairs(laplacian(symmetric_normalize(kernel)), p.eigenpairs);
  const CircleSplit split = circle_split(spectrum, kernel, labels);
  return {std::move(spectrum), split};
}

}  // namespace

TwoCircleResult run_two_circles(const TwoCircleParams& p, Seed seed) {
  if (p.eigenpairs < 2) throw Error(ErrorKind::OutOfRange, "need at least two eigenpairs");
  const SyntheticDataset ds = gen_two_circles(p.n, p.m, seed);

  TwoCircleResult out;
  out.seed = seed;
  out.labels = ds.labels;
  out.theta = ds.theta;
  out.r_true = ds.r_true;
  out.clean = spectral_view(pairwise_sq_dists(ds.x_clean), p, ds.labels);

  const SqDistMatrix noisy = pairwise_sq_dists(ds.y_noisy);
  out.corrupted = spectral_view(noisy, p, ds.labels);
  const CorrectedDistances corrected = correct_distances(noisy);
  out.r_hat = corrected.r_hat;
  out.corrected = spectral_view(corrected.d_hat, p, ds.labels);
  return out;
}

PoissonResult run_poisson_surrogate(const PoissonParams& p, Seed seed) {
  const CountDataset data = gen_poisson_surrogate(p.surrogate, seed);
  const Index n = data.counts.rows();
  const Index kmax = largest_k(p.k_grid, n);

  PoissonResult out;
  out.seed = seed;
  out.reference = poisson_reference(data.counts);
  const SqDistMatrix noisy = pairwise_sq_dists(library_normalize(data.counts));
  const CorrectedDistances corrected = correct_distances(noisy);
  out.r_hat = corrected.r_hat;
  out.correlation = pearson(out.r_hat, out.reference);

  const KnnGraph g_noisy = knn(noisy, kmax);
  const KnnGraph g_corrected = knn(corrected.d_hat, kmax);
  for (Index k : p.k_grid) {
    out.impurity.push_back({k, impurity_score(prefix(g_noisy, k), data.labels),
                            impurity_score(prefix(g_corrected, k), data.labels)});
  }
  return out;
}

}  // namespace hetdist
