#include "hetdist/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hetdist/error.hpp"

namespace hetdist {

namespace {

// Stream identifiers keep independent draws of the same seed apart.
enum Stream : std::uint64_t {
  kEmbedding = 1,
  kCircle = 2,
  kTwoCircles = 3,
  kBallRing = 4,
  kSphere = 5,
  kTau = 6,
  kDelta = 7,
  kDiagBlock = 8,
  kDuplicates = 9,
  kPoissonProfile = 10,
  kPoissonCells = 11,
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, ErrorKind kind, const char* what) {
  if (!ok) throw Error(kind, what);
}

}  // namespace

std::mt19937_64 make_rng(Seed seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Eigen::MatrixXd random_orthonormal_embedding(Index d, Index m, Seed seed) {
  require(d >= 1, ErrorKind::DimError, "embedding dimension must be >= 1");
  require(m >= d, ErrorKind::DimError, "ambient dimension m must be >= intrinsic dimension d");
  auto rng = make_rng(seed, kEmbedding);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(m, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < m; ++i) g(i, j) = normal(rng);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, d);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

ManifoldSample sample_circle(Index n, Seed seed) {
  require(n >= 1, ErrorKind::TooSmall, "need n >= 1");
  auto rng = make_rng(seed, kCircle);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  ManifoldSample s{DataMatrix(n, 2), std::vector<int>(static_cast<std::size_t>(n), 0),
                   Eigen::VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    const double t = angle(rng);
    s.theta(i) = t;
    s.z(i, 0) = std::cos(t);
    s.z(i, 1) = std::sin(t);
  }
  return s;
}

ManifoldSample sample_two_circles(Index n, Seed seed) {
  require(n >= 2 && n % 2 == 0, ErrorKind::InvalidArgument, "n must be even and >= 2");
  auto rng = make_rng(seed, kTwoCircles);
  std::normal_distribution<double> large_angle(0.0, 0.17 * kTwoPi);
  std::uniform_real_distribution<double> small_angle(0.0, kTwoPi);
  const Index half = n / 2;
  ManifoldSample s{DataMatrix(n, 2), std::vector<int>(static_cast<std::size_t>(n), 0),
                   Eigen::VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    if (i < half) {
      const double t = large_angle(rng);
      s.theta(i) = t;
      s.z(i, 0) = std::cos(t);
      s.z(i, 1) = std::sin(t);
    } else {
      const double t = small_angle(rng);
      s.theta(i) = t;
      s.z(i, 0) = 1.3 + std::cos(t) / 10.0;
      s.z(i, 1) = std::sin(t) / 10.0;
      s.labels[static_cast<std::size_t>(i)] = 1;
    }
  }
  return s;
}

ManifoldSample sample_ball_and_ring(Index n, Seed seed) {
  require(n >= 1, ErrorKind::TooSmall, "need n >= 1");
  auto rng = make_rng(seed, kBallRing);
  std::bernoulli_distribution in_ball(0.8);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  const Eigen::RowVector3d center(0.5, 0.5, 0.5);

  ManifoldSample s{DataMatrix(n, 3), std::vector<int>(static_cast<std::size_t>(n), 0),
                   Eigen::VectorXd::Zero(n)};
  for (Index i = 0; i < n; ++i) {
    if (in_ball(rng)) {
      Eigen::RowVector3d dir(normal(rng), normal(rng), normal(rng));
      dir.normalize();
      const double radius = 0.3 * std::cbrt(unit(rng));
      s.z.row(i) = center + radius * dir;
    } else {
      const double t = angle(rng);
      s.z.row(i) = center + Eigen::RowVector3d(0.4 * std::cos(t), 0.4 * std::sin(t), 0.0);
      s.labels[static_cast<std::size_t>(i)] = 1;
      s.theta(i) = t;
    }
  }
  return s;
}

SyntheticDataset embed(const ManifoldSample& sample, Index m, Seed seed) {
  const Index n = sample.z.rows();
  SyntheticDataset ds;
  ds.embedding = random_orthonormal_embedding(sample.z.cols(), m, seed);
  ds.intrinsic = sample.z;
  ds.x_clean = sample.z * ds.embedding.transpose();
  ds.eta = DataMatrix::Zero(n, m);
  ds.y_noisy = ds.x_clean;
  ds.r_true = Eigen::VectorXd::Zero(n);
  ds.theta = sample.theta;
  ds.labels = sample.labels;
  ds.seed = seed;
  return ds;
}

SyntheticDataset gen_circle(Index n, Index m, Seed seed) {
  require(n >= 4, ErrorKind::TooSmall, "circle needs n >= 4");
  require(m >= 2, ErrorKind::DimError, "circle needs m >= 2");
  return embed(sample_circle(n, seed), m, seed);
}

SyntheticDataset gen_ball_and_ring(Index n, Index m, Seed seed) {
  require(n >= 4, ErrorKind::TooSmall, "ball and ring needs n >= 4");
  require(m >= 3, ErrorKind::DimError, "ball and ring needs m >= 3");
  return embed(sample_ball_and_ring(n, seed), m, seed);
}

double noise_profile(double theta, double phi) noexcept {
  return 0.1 + 0.9 * (1.0 + std::cos(2.0 * theta + phi)) / 2.0;
}

SyntheticDataset add_sphere_noise(SyntheticDataset ds, const Eigen::VectorXd& magnitudes,
                                  Seed seed) {
  const Index n = ds.n();
  const Index m = ds.m();
  require(magnitudes.size() == n, ErrorKind::ShapeMismatch, "one magnitude per row required");
  ds.eta.resize(n, m);
  std::normal_distribution<double> normal;
  for (Index i = 0; i < n; ++i) {
    auto rng = make_rng(seed, kSphere, static_cast<std::uint64_t>(i));
    auto row = ds.eta.row(i);
    for (Index k = 0; k < m; ++k) row(k) = normal(rng);
    row *= magnitudes(i) / row.norm();
  }
  ds.y_noisy = ds.x_clean + ds.eta;
  ds.r_true = ds.eta.rowwise().squaredNorm();
  return ds;
}

SyntheticDataset add_geometry_noise(SyntheticDataset ds, double phi, double scale, Seed seed) {
  if (ds.theta.size() != ds.n()) throw Error(ErrorKind::MissingTheta, "dataset has no angles");
  Eigen::VectorXd mags(ds.n());
  for (Index i = 0; i < ds.n(); ++i) mags(i) = scale * noise_profile(ds.theta(i), phi);
  return add_sphere_noise(std::move(ds), mags, seed);
}

SyntheticDataset gen_two_circles(Index n, Index m, Seed seed) {
  require(m >= 2, ErrorKind::DimError, "two circles need m >= 2");
  SyntheticDataset ds = embed(sample_two_circles(n, seed), m, seed);
  Eigen::VectorXd mags(n);
  for (Index i = 0; i < n; ++i) {
    const bool large = ds.labels[static_cast<std::size_t>(i)] == 0;
    mags(i) = large ? noise_profile(ds.theta(i), std::numbers::pi)
                    : 0.1 * noise_profile(ds.theta(i), 0.0);
  }
  return add_sphere_noise(std::move(ds), mags, seed);
}

DiagGaussianNoise::DiagGaussianNoise(Eigen::VectorXd tau, Eigen::VectorXd delta, Seed seed)
    : tau_(std::move(tau)), delta_(std::move(delta)), seed_(seed) {
  require(delta_.size() >= 1, ErrorKind::DimError, "need m >= 1");
  require((tau_.array() >= 0.0).all() && (delta_.array() >= 0.0).all(),
          ErrorKind::InvalidArgument, "noise levels must be nonnegative");
}

DiagGaussianNoise DiagGaussianNoise::draw(Index n, Index m, Range tau_range, Range delta_range,
                                          Seed seed) {
  require(m >= 1, ErrorKind::DimError, "need m >= 1");
  require(tau_range.lo <= tau_range.hi && delta_range.lo <= delta_range.hi,
          ErrorKind::InvalidArgument, "empty noise range");
  auto draw_uniform = [seed](Index count, Range r, std::uint64_t stream) {
    auto rng = make_rng(seed, stream);
    std::uniform_real_distribution<double> u(r.lo, r.hi);
    Eigen::VectorXd v(count);
    for (Index i = 0; i < count; ++i) v(i) = r.lo == r.hi ? r.lo : u(rng);
    return v;
  };
  return DiagGaussianNoise(draw_uniform(n, tau_range, kTau), draw_uniform(m, delta_range, kDelta),
                           seed);
}

Index DiagGaussianNoise::block_width(Index b) const noexcept {
  return std::min(kBlock, m() - block_begin(b));
}

DataMatrix DiagGaussianNoise::sample_block(Index b) const {
  require(b >= 0 && b < num_blocks(), ErrorKind::OutOfRange, "noise block index out of range");
  const Index c0 = block_begin(b);
  const Index w = block_width(b);
  const double inv_m = 1.0 / static_cast<double>(m());
  Eigen::RowVectorXd col_sd = (delta_.segment(c0, w) * inv_m).cwiseSqrt().transpose();

  auto rng = make_rng(seed_, kDiagBlock, static_cast<std::uint64_t>(b));
  std::normal_distribution<double> normal;
  DataMatrix block(n(), w);
  for (Index i = 0; i < n(); ++i) {
    const double row_sd = std::sqrt(tau_(i));
    for (Index k = 0; k < w; ++k) block(i, k) = row_sd * col_sd(k) * normal(rng);
  }
  return block;
}

Eigen::VectorXd DiagGaussianNoise::expected_energy() const { return tau_ * delta_.mean(); }

SyntheticDataset add_diag_gaussian_noise(SyntheticDataset ds, Range tau_range, Range delta_range,
                                         Seed seed) {
  const auto noise = DiagGaussianNoise::draw(ds.n(), ds.m(), tau_range, delta_range, seed);
  ds.eta.resize(ds.n(), ds.m());
  for (Index b = 0; b < noise.num_blocks(); ++b) {
    ds.eta.middleCols(noise.block_begin(b), noise.block_width(b)) = noise.sample_block(b);
  }
  ds.y_noisy = ds.x_clean + ds.eta;
  ds.r_true = ds.eta.rowwise().squaredNorm();
  return ds;
}

SyntheticDataset make_orthogonal_noise(SyntheticDataset ds, const Eigen::VectorXd& magnitudes) {
  const Index n = ds.n();
  const Index m = ds.m();
  require(magnitudes.size() == n, ErrorKind::ShapeMismatch, "one magnitude per row required");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ds.x_clean.transpose());
  const Index rank = qr.rank();
  if (m < n + rank) {
    throw Error(ErrorKind::DimError, "orthogonal noise needs m >= n + rank(X) = " +
                                         std::to_string(n + rank) + ", got m = " +
                                         std::to_string(m));
  }
  // Columns rank .. rank+n-1 of Q are orthonormal and orthogonal to the row space of X.
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, rank + n);
  ds.eta.resize(n, m);
  for (Index i = 0; i < n; ++i) {
    ds.eta.row(i) = magnitudes(i) * q.col(rank + i).transpose();
  }
  ds.y_noisy = ds.x_clean + ds.eta;
  ds.r_true = ds.eta.rowwise().squaredNorm();
  return ds;
}

SyntheticDataset gen_duplicates(Index values, Index copies, Index m, Seed seed) {
  require(values >= 1 && copies >= 1, ErrorKind::TooSmall, "need at least one value and copy");
  require(m >= 1, ErrorKind::DimError, "need m >= 1");
  auto rng = make_rng(seed, kDuplicates);
  std::normal_distribution<double> normal;
  DataMatrix centers(values, m);
  for (Index v = 0; v < values; ++v) {
    for (Index k = 0; k < m; ++k) centers(v, k) = normal(rng);
    centers.row(v) /= std::max(1.0, centers.row(v).norm());
  }
  const Index n = values * copies;
  SyntheticDataset ds;
  ds.x_clean.resize(n, m);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    ds.x_clean.row(i) = centers.row(i / copies);
    ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(i / copies);
  }
  ds.eta = DataMatrix::Zero(n, m);
  ds.y_noisy = ds.x_clean;
  ds.r_true = Eigen::VectorXd::Zero(n);
  ds.seed = seed;
  return ds;
}

EpsilonOracle epsilon_oracle(const SyntheticDataset& ds) {
  require(ds.x_clean.rows() == ds.eta.rows() && ds.x_clean.cols() == ds.eta.cols() &&
              ds.y_noisy.rows() == ds.eta.rows(),
          ErrorKind::ShapeMismatch, "dataset is missing clean, noisy or noise rows");
  const Eigen::MatrixXd xe = ds.x_clean * ds.eta.transpose();  // <x_i, eta_j>
  const Eigen::MatrixXd ee = ds.eta * ds.eta.transpose();      // <eta_i, eta_j>
  const Index n = ds.n();
  Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      // <x_i - x_j, eta_i - eta_j>
      const double cross = xe(i, i) - xe(i, j) - xe(j, i) + xe(j, j);
      eps(i, j) = 2.0 * cross - 2.0 * ee(i, j);
    }
  }
  return {std::move(eps)};
}

CountDataset gen_poisson_surrogate(const PoissonSurrogateParams& p, Seed seed) {
  require(p.clusters >= 1 && p.cells_per_cluster >= 1, ErrorKind::TooSmall,
          "need at least one cluster and one cell");
  require(p.genes >= 1, ErrorKind::DimError, "need at least one gene");
  require(p.library.lo > 0.0 && p.library.lo <= p.library.hi, ErrorKind::InvalidArgument,
          "library range must be positive and ordered");
  require(p.library_window >= 0.0 && p.library_window <= 1.0, ErrorKind::OutOfRange,
          "library window must lie in [0, 1]");

  auto prng = make_rng(seed, kPoissonProfile);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution is_marker(p.marker_fraction);
  Eigen::VectorXd base_log(p.genes);
  for (Index g = 0; g < p.genes; ++g) base_log(g) = p.base_log_sd * normal(prng);

  CountDataset out;
  out.profiles.resize(p.clusters, p.genes);
  for (Index c = 0; c < p.clusters; ++c) {
    for (Index g = 0; g < p.genes; ++g) {
      const double shift = is_marker(prng) ? p.marker_log_sd * normal(prng) : 0.0;
      out.profiles(c, g) = std::exp(base_log(g) + shift);
    }
    out.profiles.row(c) /= out.profiles.row(c).sum();
  }

  const Index n = p.clusters * p.cells_per_cluster;
  out.counts.resize(n, p.genes);
  out.labels.resize(static_cast<std::size_t>(n));
  out.library_target.resize(n);
  const double log_lo = std::log(p.library.lo);
  const double log_span = std::log(p.library.hi) - log_lo;
  const double window = p.library_window * log_span;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    const Index c = i / p.cells_per_cluster;
    auto rng = make_rng(seed, kPoissonCells, static_cast<std::uint64_t>(i));
    const double start =
        p.clusters > 1 ? log_lo + static_cast<double>(c) / static_cast<double>(p.clusters - 1) *
                                      (log_span - window)
                       : log_lo;
    const double lib = std::clamp(std::exp(start + window * unit(rng)), p.library.lo,
                                  p.library.hi);
    out.library_target(i) = lib;
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
    for (Index g = 0; g < p.genes; ++g) {
      std::poisson_distribution<long> counts(lib * out.profiles(c, g));
      out.counts(i, g) = static_cast<double>(counts(rng));
    }
  }
  return out;
}

}  // namespace hetdist
