#pragma once

#include <vector>

#include "hetdist/analysis.hpp"
#include "hetdist/distcorrect.hpp"
#include "hetdist/kernels.hpp"
#include "hetdist/synth.hpp"

namespace hetdist {

// Circle with geometry-dependent noise ------------------------------------

struct CircleParams {
  Index n = 1000;
  Index m = 10000;
  double phi = 0.0;
  double noise_scale = 1.0;
  double sigma_sq = 0.5;  ///< row-stochastic kernel bandwidth
  Index kernel_row = 500;
  std::vector<Index> k_grid{5, 10, 20, 40, 60, 80, 100};
};

struct KnnAccuracyRow {
  Index k = 0;
  double corrupted = 0.0;  ///< accuracy of knn on the noisy distances
  double corrected = 0.0;  ///< accuracy of knn on the corrected distances
};

struct CircleResult {
  Seed seed = 0;
  Eigen::VectorXd theta;
  Eigen::VectorXd r_true;
  Eigen::VectorXd r_hat;
  Eigen::VectorXd snr_true;  ///< ||x_i||^2 / r_i
  SnrEstimate snr_hat;
  std::vector<KnnAccuracyRow> accuracy;
  Eigen::VectorXd kernel_clean;      ///< row `kernel_row` of each kernel
  Eigen::VectorXd kernel_corrupted;
  Eigen::VectorXd kernel_corrected;
  double r_correlation = 0.0;
  double snr_rel_error_p90 = 0.0;  ///< over points with a valid estimate
  Index snr_invalid = 0;
};

CircleResult run_circle(const CircleParams& params, Seed seed);

// Two circles and the self-tuning spectral embedding ----------------------

struct TwoCircleParams {
  Index n = 4000;
  Index m = 2000;
  Index bandwidth_k = 150;
  Index eigenpairs = 6;
};

/// Piecewise-constant check on span(psi_1, psi_2). Each circle indicator is
/// projected onto that span and normalized; `within_rel_var` is the variance
/// over the circle's own points divided by their squared mean, `leakage` is
/// the norm on the other circle over the total norm.
struct CircleSplit {
  double within_rel_var[2] = {0.0, 0.0};
  double leakage[2] = {0.0, 0.0};
  double cross_weight_ratio = 0.0;  ///< cross-circle over within-circle kernel mass
};

struct SpectralView {
  LaplacianSpectrum spectrum;
  CircleSplit split;
};

struct TwoCircleResult {
  Seed seed = 0;
  std::vector<int> labels;
  Eigen::VectorXd theta;
  Eigen::VectorXd r_true;
  Eigen::VectorXd r_hat;
  SpectralView clean;
  SpectralView corrupted;
  SpectralView corrected;
};

CircleSplit circle_split(const LaplacianSpectrum& spectrum, const KernelMatrix& kernel,
                         const std::vector<int>& labels);

TwoCircleResult run_two_circles(const TwoCircleParams& params, Seed seed);

// Poisson count surrogate --------------------------------------------------

struct PoissonParams {
  PoissonSurrogateParams surrogate;
  std::vector<Index> k_grid{5, 10, 20, 30, 40, 50};
};

struct ImpurityRow {
  Index k = 0;
  double corrupted = 0.0;
  double corrected = 0.0;
};

struct PoissonResult {
  Seed seed = 0;
  Eigen::VectorXd r_hat;
  Eigen::VectorXd reference;  ///< 1 / library size
  std::vector<ImpurityRow> impurity;
  double correlation = 0.0;
};

PoissonResult run_poisson_surrogate(const PoissonParams& params, Seed seed);

}  // namespace hetdist
