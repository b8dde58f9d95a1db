#pragma once

#include "hetdist/distcorrect.hpp"
#include "hetdist/types.hpp"

namespace hetdist {

enum class Normalization { Raw, RowStochastic, Symmetric };

/// Nonnegative affinity matrix with its degree vector d = w * 1.
struct KernelMatrix {
  Eigen::MatrixXd w;
  Normalization normalization = Normalization::Raw;
  Eigen::VectorXd degrees;

  Index size() const noexcept { return w.rows(); }
};

/// Ascending eigenvalues with orthonormal eigenvectors and their residuals
/// ||L v - lambda v||.
struct LaplacianSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd residuals;
};

/// Row-stochastic Gaussian kernel: K = exp(-D / sigma^2) with K_ii = 1,
/// W = diag(K 1)^-1 K. Negative distances are treated as 0.
/// Throws NonPositive for sigma_sq <= 0 and DegenerateRow if a degree is not
/// a positive finite number.
KernelMatrix gaussian_row_stochastic(const SqDistMatrix& d2, double sigma_sq);

/// Per-point bandwidths sigma_i = sqrt(k-th smallest off-diagonal entry of
/// row i), clamped at 0 before the root.
Eigen::VectorXd knn_bandwidths(const SqDistMatrix& d2, Index k);

/// Self-tuning kernel K_ij = exp(-max(0, D_ij) / (sigma_i sigma_j)), K_ii = 1.
/// Throws ZeroBandwidth (with the index) when some sigma_i is 0 and
/// OutOfRange unless 1 <= k <= n - 1.
KernelMatrix self_tuning_kernel(const SqDistMatrix& d2, Index k);

/// W = diag(d)^-1/2 K diag(d)^-1/2. Throws ZeroDegree if any degree <= 0.
KernelMatrix symmetric_normalize(const KernelMatrix& kern);

/// L = diag(W 1) - W.
template <typename Derived>
Eigen::MatrixXd laplacian(const Eigen::MatrixBase<Derived>& w) {
  Eigen::MatrixXd l = -w.template cast<double>();
  l.diagonal() += w.template cast<double>().rowwise().sum();
  return l;
}

inline Eigen::MatrixXd laplacian(const KernelMatrix& kern) { return laplacian(kern.w); }

/// The k smallest eigenpairs of a symmetric matrix.
///
/// Householder tridiagonalization, Sturm-sequence bisection for the
/// eigenvalues, inverse iteration (reorthogonalised within clusters) for
/// the tridiagonal eigenvectors, then back-transformation. Falls back to an
/// implicit QR sweep on the tridiagonal matrix when a residual exceeds
/// 1e-8 ||L||. Each eigenvector is signed so its largest-magnitude entry is
/// positive. Throws ConvergenceFailure with diagnostics if neither path meets
/// the residual bound.
LaplacianSpectrum smallest_eigenpairs(const Eigen::MatrixXd& l, Index k);

}  // namespace hetdist
