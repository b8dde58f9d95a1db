#include "hetdist/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetdist/error.hpp"
#include "hetdist/parallel.hpp"

namespace hetdist {

double l1_noise_error(const Eigen::VectorXd& r_hat, const Eigen::VectorXd& r_true) {
  if (r_hat.size() != r_true.size()) {
    throw Error(ErrorKind::ShapeMismatch, "noise vectors differ in length");
  }
  if (r_hat.size() == 0) return 0.0;
  return (r_hat - r_true).cwiseAbs().sum() / static_cast<double>(r_hat.size());
}

double l1_dist_error(const SqDistMatrix& d_hat, const SqDistMatrix& d_true) {
  if (d_hat.size() != d_true.size()) {
    throw Error(ErrorKind::ShapeMismatch, "distance matrices differ in size");
  }
  const Index n = d_hat.size();
  if (n < 2) return 0.0;
  // Stored diagonals are zero on both sides, so they add nothing.
  const double total = (d_hat.values() - d_true.values()).cwiseAbs().sum();
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

PartitionReport grid_partition_report(const DataMatrix& points, Index k_per_axis) {
  if (k_per_axis < 1) throw Error(ErrorKind::OutOfRange, "need at least one box per axis");
  const Index n = points.rows();
  const Index d = points.cols();
  if (n < 1 || d < 1) throw Error(ErrorKind::TooSmall, "need at least one point and one axis");
  if (!points.allFinite() || (points.array() < 0.0).any() || (points.array() > 1.0).any()) {
    throw Error(ErrorKind::OutOfRange, "coordinates must lie in [0, 1]");
  }

  IndexMatrix box(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index a = 0; a < d; ++a) {
      const auto c = static_cast<Index>(std::floor(points(i, a) * static_cast<double>(k_per_axis)));
      box(i, a) = std::min(c, k_per_axis - 1);
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto less = [&](Index x, Index y) {
    for (Index a = 0; a < d; ++a) {
      if (box(x, a) != box(y, a)) return box(x, a) < box(y, a);
    }
    return x < y;
  };
  std::sort(order.begin(), order.end(), less);

  PartitionReport rep;
  rep.k_boxes_per_axis = k_per_axis;
  rep.n = n;
  rep.d = d;
  rep.box_diagonal = std::sqrt(static_cast<double>(d)) / static_cast<double>(k_per_axis);
  rep.min_subset_size = n;
  double weighted = 0.0;
  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin + 1;
    while (end < order.size() && box.row(order[end]) == box.row(order[begin])) ++end;
    double diam_sq = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      for (std::size_t q = p + 1; q < end; ++q) {
        diam_sq = std::max(diam_sq, (points.row(order[p]) - points.row(order[q])).squaredNorm());
      }
    }
    const auto size = static_cast<Index>(end - begin);
    weighted += static_cast<double>(size) * diam_sq;
    rep.min_subset_size = std::min(rep.min_subset_size, size);
    ++rep.nonempty_boxes;
    begin = end;
  }
  rep.avg_weighted_sq_diam = weighted / static_cast<double>(n);
  return rep;
}

Index partition_boxes_general(Index n, Index d) {
  const double ln = std::log(static_cast<double>(n));
  const double k = std::floor(std::pow(static_cast<double>(n) / (ln * ln),
                                       1.0 / (2.0 * static_cast<double>(d + 2))));
  return std::max<Index>(1, static_cast<Index>(k));
}

Index partition_boxes_bounded(Index n, Index d, double t) {
  const double dd = static_cast<double>(d);
  const double k = std::ceil(
      std::pow(static_cast<double>(n) / (std::pow(t, 2.0 * dd) * std::log(static_cast<double>(n))),
               1.0 / dd));
  return std::max<Index>(1, static_cast<Index>(k));
}

double partition_bound_general(Index n, Index d) {
  const double ln = std::log(static_cast<double>(n));
  return 4.0 * static_cast<double>(d) *
         std::pow(ln * ln / static_cast<double>(n), 1.0 / static_cast<double>(d + 2));
}

double partition_bound_bounded(Index n, Index d, double t) {
  const double ln = std::log(static_cast<double>(n));
  return std::pow(t, 4.0) * static_cast<double>(d) *
         std::pow(ln / static_cast<double>(n), 2.0 / static_cast<double>(d));
}

namespace {

DataMatrix curve_points(CurveFamily family, Index n, Seed seed) {
  switch (family) {
    case CurveFamily::BallAndRing:
      return sample_ball_and_ring(n, seed).z;
    case CurveFamily::Circle:
      return sample_circle(n, seed).z;
    case CurveFamily::Duplicates:
      if (n % 4 != 0) {
        throw Error(ErrorKind::InvalidArgument, "duplicate family needs n divisible by 4");
      }
      return gen_duplicates(n / 4, 4, 3, seed).x_clean;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown family");
}

}  // namespace

CostCurve lsap_cost_curve(CurveFamily family, const std::vector<Index>& n_grid,
                          const std::vector<Seed>& seeds, int threads) {
  if (seeds.empty()) throw Error(ErrorKind::InvalidArgument, "no seeds given");
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    if (n_grid[g] < 4) throw Error(ErrorKind::TooSmall, "every n must be at least 4");
    if (g > 0 && n_grid[g] <= n_grid[g - 1]) {
      throw Error(ErrorKind::InvalidArgument, "n grid must be ascending");
    }
  }

  CostCurve curve;
  curve.runs.resize(n_grid.size() * seeds.size());
  parallel_for(curve.runs.size(), threads, [&](std::size_t cell) {
    const Index n = n_grid[cell / seeds.size()];
    const Seed seed = seeds[cell % seeds.size()];
    const SqDistMatrix d2 = pairwise_sq_dists(curve_points(family, n, seed));
    const NeighborPairs nbrs = identify_neighbors(d2);
    const MaskedCost cost = d2.masked_cost();
    const double scale = 1.0 / static_cast<double>(n);
    curve.runs[cell] = {n, seed, assignment_cost(cost, nbrs.sigma1) * scale,
                        assignment_cost(cost, nbrs.sigma2) * scale};
  });

  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    CostCurvePoint p{n_grid[g], 0.0, 0.0};
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      p.mean_round1 += curve.runs[g * seeds.size() + s].round1;
      p.mean_round2 += curve.runs[g * seeds.size() + s].round2;
    }
    p.mean_round1 /= static_cast<double>(seeds.size());
    p.mean_round2 /= static_cast<double>(seeds.size());
    curve.points.push_back(p);
  }
  return curve;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::ShapeMismatch, "xs and ys differ in length");
  if (xs.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least three points");
  const auto count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw Error(ErrorKind::NonPositive, "log-log fit needs positive values");
    }
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= count;
  my /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "xs are all equal");
  return sxy / sxx;
}

ErrorReport error_scaling_run(Index n, Index m, Seed seed, const ScalingConfig& config) {
  const ManifoldSample sample = sample_ball_and_ring(n, seed);
  const Eigen::MatrixXd embedding = random_orthonormal_embedding(sample.z.cols(), m, seed);
  const DiagGaussianNoise noise =
      DiagGaussianNoise::draw(n, m, config.tau, config.delta, seed);

  // Gram updates are most efficient on wide blocks; eight noise blocks each.
  constexpr Index kBlocksPerChunk = 8;
  GramAccumulator gram(n);
  Eigen::VectorXd r_true = Eigen::VectorXd::Zero(n);
  for (Index b0 = 0; b0 < noise.num_blocks(); b0 += kBlocksPerChunk) {
    const Index b1 = std::min(noise.num_blocks(), b0 + kBlocksPerChunk);
    const Index begin = noise.block_begin(b0);
    const Index width = noise.block_begin(b1 - 1) + noise.block_width(b1 - 1) - begin;
    DataMatrix chunk = sample.z * embedding.middleRows(begin, width).transpose();
    if (config.with_noise) {
      for (Index b = b0; b < b1; ++b) {
        const DataMatrix eta = noise.sample_block(b);
        chunk.middleCols(noise.block_begin(b) - begin, eta.cols()) += eta;
        r_true += eta.rowwise().squaredNorm();
      }
    }
    gram.add(chunk);
  }

  const CorrectedDistances corrected = correct_distances(gram.distances());
  const SqDistMatrix clean = pairwise_sq_dists(sample.z);
  return {l1_noise_error(corrected.r_hat, r_true), l1_dist_error(corrected.d_hat, clean), n, m,
          seed};
}

std::vector<ErrorReport> error_scaling_experiment(const ScalingConfig& config) {
  if (config.seeds.empty()) throw Error(ErrorKind::InvalidArgument, "no seeds given");
  for (std::size_t g = 1; g < config.grid.size(); ++g) {
    if (config.grid[g] <= config.grid[g - 1]) {
      throw Error(ErrorKind::InvalidArgument, "grid must be ascending");
    }
  }
  const std::size_t seeds = config.seeds.size();
  std::vector<ErrorReport> out(config.grid.size() * seeds);
  parallel_for(out.size(), config.threads, [&](std::size_t cell) {
    const Index value = config.grid[cell / seeds];
    const Index n = config.axis == ScalingAxis::N ? value : config.fixed;
    const Index m = config.axis == ScalingAxis::M ? value : config.fixed;
    out[cell] = error_scaling_run(n, m, config.seeds[cell % seeds], config);
  });
  return out;
}

Eigen::VectorXd poisson_reference(const DataMatrix& counts) {
  Eigen::VectorXd out(counts.rows());
  for (Index i = 0; i < counts.rows(); ++i) {
    const double total = counts.row(i).sum();
    if (!(total > 0.0)) throw IndexedError(ErrorKind::EmptyRow, i, "row sums to zero");
    out(i) = 1.0 / total;
  }
  return out;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "vectors differ in length");
  if (a.size() < 2) throw Error(ErrorKind::TooSmall, "need at least two values");
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::TooSmall, "quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::OutOfRange, "q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace hetdist
