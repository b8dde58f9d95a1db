#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hetdist/distcorrect.hpp"
#include "hetdist/synth.hpp"
#include "../support/check.hpp"

using namespace hetdist;
using testing_support::error_kind;

namespace {

constexpr double kPi = std::numbers::pi;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("square embedding is orthogonal") {
    const Eigen::MatrixXd r = random_orthonormal_embedding(2, 2, 1);
    CHECK((r.transpose() * r - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("tall embedding is an isometry") {
    const Eigen::MatrixXd r = random_orthonormal_embedding(3, 100, 2);
    CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    for (int t = 0; t < 20; ++t) {
      const Eigen::Vector3d v(z(rng), z(rng), z(rng));
      CHECK(std::abs((r * v).norm() - v.norm()) <= 1e-9);
    }
  }

  TEST_CASE("embedding is deterministic per seed and validates dimensions") {
    CHECK(random_orthonormal_embedding(3, 10, 5) == random_orthonormal_embedding(3, 10, 5));
    CHECK(random_orthonormal_embedding(3, 10, 5) != random_orthonormal_embedding(3, 10, 6));
    CHECK(error_kind([] { random_orthonormal_embedding(4, 3, 1); }) == ErrorKind::DimError);
  }

  TEST_CASE("circle chords follow the angle difference") {
    const SyntheticDataset ds = gen_circle(50, 20, 3);
    const SqDistMatrix d = pairwise_sq_dists(ds.x_clean);
    for (Index i = 0; i < 50; ++i) {
      CHECK(std::abs(ds.x_clean.row(i).norm() - 1.0) <= 1e-9);
      for (Index j = 0; j < 50; ++j) {
        if (i == j) continue;
        CHECK(std::abs(d(i, j) - (2.0 - 2.0 * std::cos(ds.theta(i) - ds.theta(j)))) <= 1e-8);
      }
    }
  }

  TEST_CASE("antipodal circle points are at squared distance 4") {
    ManifoldSample s{DataMatrix(2, 2), {0, 0}, Eigen::Vector2d(0.0, kPi)};
    s.z << 1, 0, -1, 0;
    const SyntheticDataset ds = embed(s, 2, 4);
    CHECK(pairwise_sq_dists(ds.x_clean)(0, 1) == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("circle angles are uniform") {
    const SyntheticDataset ds = gen_circle(1000, 2, 5);
    const Eigen::ArrayXd c = ds.theta.array().cos();
    const double stderr_ = std::sqrt(0.5 / 1000.0);
    CHECK(std::abs(c.mean()) <= 3.0 * stderr_);
    CHECK((ds.theta.array() >= 0.0).all());
    CHECK((ds.theta.array() < 2.0 * kPi).all());
  }

  TEST_CASE("circle preconditions") {
    CHECK(error_kind([] { gen_circle(3, 5, 1); }) == ErrorKind::TooSmall);
    CHECK(error_kind([] { gen_circle(10, 1, 1); }) == ErrorKind::DimError);
  }

  TEST_CASE("noise profile extremes") {
    CHECK(noise_profile(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(noise_profile(kPi / 2.0, 0.0) == doctest::Approx(0.1));
    CHECK(noise_profile(kPi / 4.0, 0.0) == doctest::Approx(0.55));
  }

  TEST_CASE("geometry noise magnitudes follow the profile") {
    ManifoldSample s{DataMatrix(3, 2), {0, 0, 0}, Eigen::Vector3d(0.0, kPi / 2.0, kPi / 4.0)};
    for (Index i = 0; i < 3; ++i) s.z.row(i) << std::cos(s.theta(i)), std::sin(s.theta(i));
    const SyntheticDataset ds = add_geometry_noise(embed(s, 30, 6), 0.0, 1.0, 6);
    CHECK(ds.eta.row(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ds.eta.row(1).norm() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(ds.eta.row(2).norm() == doctest::Approx(0.55).epsilon(1e-12));
    const SyntheticDataset scaled = add_geometry_noise(embed(s, 30, 6), 0.0, 2.0, 6);
    for (Index i = 0; i < 3; ++i) {
      const double g = noise_profile(s.theta(i), 0.0);
      CHECK(std::abs(scaled.r_true(i) - 4.0 * g * g) <= 1e-10 * 4.0 * g * g);
    }
  }

  TEST_CASE("geometry noise needs angles") {
    SyntheticDataset ds = gen_duplicates(2, 4, 5, 1);
    CHECK(error_kind([&] { add_geometry_noise(ds, 0.0, 1.0, 1); }) == ErrorKind::MissingTheta);
  }

  TEST_CASE("two circles: labels, gap and noise caps") {
    const SyntheticDataset ds = gen_two_circles(4000, 5, 7);
    CHECK(std::count(ds.labels.begin(), ds.labels.end(), 0) == 2000);
    CHECK(std::count(ds.labels.begin(), ds.labels.end(), 1) == 2000);
    double gap = INFINITY;
    for (Index i = 0; i < 2000; ++i)
      for (Index j = 2000; j < 4000; ++j)
        gap = std::min(gap, (ds.intrinsic.row(i) - ds.intrinsic.row(j)).norm());
    CHECK(gap >= 0.2 - 1e-12);
    CHECK(gap <= 0.2 + 1e-2);
    const Eigen::VectorXd mags = ds.r_true.cwiseSqrt();
    CHECK(mags.tail(2000).maxCoeff() <= 0.1 + 1e-12);
    CHECK(mags.tail(2000).maxCoeff() >= 0.099);
    CHECK(mags.head(2000).maxCoeff() <= 1.0 + 1e-12);
    CHECK(error_kind([] { gen_two_circles(7, 5, 1); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("ball and ring geometry") {
    const SyntheticDataset ds = gen_ball_and_ring(10000, 3, 8);
    const Eigen::RowVector3d c(0.5, 0.5, 0.5);
    const Eigen::RowVectorXd c_embedded = c * ds.embedding.transpose();
    Index ring = 0;
    for (Index i = 0; i < ds.n(); ++i) {
      CHECK((ds.x_clean.row(i) - c_embedded).norm() <= 0.4 + 1e-9);
      const double r = (ds.intrinsic.row(i) - c).norm();
      if (ds.labels[static_cast<std::size_t>(i)] == 1) {
        ++ring;
        CHECK(std::abs(r - 0.4) <= 1e-9);
        CHECK(ds.intrinsic(i, 2) == 0.5);
      } else {
        CHECK(r <= 0.3 + 1e-12);
      }
      CHECK(ds.x_clean.row(i).norm() <= c.norm() + 0.4 + 1e-9);
    }
    const double frac = static_cast<double>(ring) / 10000.0;
    CHECK(std::abs(frac - 0.2) <= 3.0 * std::sqrt(0.2 * 0.8 / 10000.0));
    CHECK(error_kind([] { gen_ball_and_ring(10, 2, 1); }) == ErrorKind::DimError);
  }

  TEST_CASE("embedding preserves intrinsic distances") {
    const SyntheticDataset ds = gen_ball_and_ring(60, 40, 9);
    const Eigen::MatrixXd a = pairwise_sq_dists(ds.intrinsic).values();
    const Eigen::MatrixXd b = pairwise_sq_dists(ds.x_clean).values();
    for (Index i = 0; i < 60; ++i)
      for (Index j = 0; j < 60; ++j)
        if (i != j) CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-8 * a(i, j));
  }

  TEST_CASE("diagonal noise energy at the range ends") {
    const DiagGaussianNoise lo(Eigen::VectorXd::Constant(3, 0.01), Eigen::VectorXd::Constant(50, 0.01), 1);
    const DiagGaussianNoise hi(Eigen::VectorXd::Constant(3, 0.15), Eigen::VectorXd::Constant(50, 0.15), 1);
    CHECK(lo.expected_energy()(0) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(hi.expected_energy()(0) == doctest::Approx(2.25e-2).epsilon(1e-12));
  }

  TEST_CASE("diagonal noise energy matches its expectation") {
    const DiagGaussianNoise noise = DiagGaussianNoise::draw(10000, 300, {0.01, 0.15}, {0.01, 0.15}, 10);
    const Eigen::VectorXd e = noise.expected_energy();
    CHECK((e.array() >= 1e-4).all());
    CHECK((e.array() <= 2.25e-2).all());
    Eigen::VectorXd energy = Eigen::VectorXd::Zero(10000);
    for (Index b = 0; b < noise.num_blocks(); ++b) energy += noise.sample_block(b).rowwise().squaredNorm();
    // Each ratio has mean 1 and variance 2 sum(delta^2) / sum(delta)^2.
    const Eigen::ArrayXd ratio = energy.array() / e.array();
    const double var = 2.0 * noise.delta().squaredNorm() / std::pow(noise.delta().sum(), 2);
    CHECK(std::abs(ratio.mean() - 1.0) <= 3.0 * std::sqrt(var / 10000.0));
  }

  TEST_CASE("streamed diagonal noise equals the in-memory draw") {
    const SyntheticDataset base = gen_ball_and_ring(20, 600, 11);
    const SyntheticDataset ds = add_diag_gaussian_noise(base, {0.01, 0.15}, {0.01, 0.15}, 11);
    const DiagGaussianNoise noise = DiagGaussianNoise::draw(20, 600, {0.01, 0.15}, {0.01, 0.15}, 11);
    CHECK(noise.num_blocks() == 3);
    CHECK(noise.block_width(2) == 600 - 2 * DiagGaussianNoise::kBlock);
    for (Index b = 0; b < noise.num_blocks(); ++b) {
      CHECK(ds.eta.middleCols(noise.block_begin(b), noise.block_width(b)) == noise.sample_block(b));
    }
    CHECK(error_kind([&] { noise.sample_block(3); }) == ErrorKind::OutOfRange);
  }

  TEST_CASE("orthogonal noise cancels every cross term") {
    SyntheticDataset ds = gen_circle(20, 40, 12);
    Eigen::VectorXd mags = Eigen::VectorXd::LinSpaced(20, 0.1, 1.0);
    ds = make_orthogonal_noise(std::move(ds), mags);
    CHECK(epsilon_oracle(ds).eps.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((ds.r_true - mags.cwiseAbs2()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(error_kind([] { make_orthogonal_noise(gen_circle(20, 21, 1), Eigen::VectorXd::Ones(20)); }) ==
          ErrorKind::DimError);
  }

  TEST_CASE("epsilon oracle is consistent with the distance decomposition") {
    CHECK(epsilon_oracle(gen_circle(10, 5, 13)).eps.cwiseAbs().maxCoeff() == 0.0);
    const SyntheticDataset ds = add_geometry_noise(gen_circle(40, 200, 13), 0.0, 1.0, 13);
    const Eigen::MatrixXd eps = epsilon_oracle(ds).eps;
    const SqDistMatrix noisy = pairwise_sq_dists(ds.y_noisy);
    const SqDistMatrix clean = pairwise_sq_dists(ds.x_clean);
    for (Index i = 0; i < 40; ++i)
      for (Index j = 0; j < 40; ++j)
        if (i != j) {
          CHECK(std::abs(eps(i, j) - (noisy(i, j) - clean(i, j) - ds.r_true(i) - ds.r_true(j))) <=
                1e-7);
        }
  }

  TEST_CASE("cross terms shrink as the dimension grows") {
    // Reduced sizes keep the test quick; medians over five seeds.
    std::vector<double> low, high;
    for (Seed s = 1; s <= 5; ++s) {
      low.push_back(epsilon_oracle(add_geometry_noise(gen_circle(100, 1000, s), 0.0, 1.0, s))
                        .eps.cwiseAbs().maxCoeff());
      high.push_back(epsilon_oracle(add_geometry_noise(gen_circle(100, 10000, s), 0.0, 1.0, s))
                         .eps.cwiseAbs().maxCoeff());
    }
    CHECK(median(high) < median(low));
  }

  TEST_CASE("generators are deterministic and satisfy y = x + eta") {
    const SyntheticDataset a = gen_two_circles(40, 30, 14);
    const SyntheticDataset b = gen_two_circles(40, 30, 14);
    CHECK(a.y_noisy == b.y_noisy);
    CHECK(a.eta == b.eta);
    CHECK(a.y_noisy == a.x_clean + a.eta);
    const SyntheticDataset c = add_diag_gaussian_noise(gen_ball_and_ring(30, 50, 14), {0.01, 0.15}, {0.01, 0.15}, 14);
    CHECK(c.y_noisy == c.x_clean + c.eta);
    CHECK((c.r_true - c.eta.rowwise().squaredNorm()).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("duplicates repeat each value consecutively") {
    const SyntheticDataset ds = gen_duplicates(5, 4, 8, 15);
    CHECK(ds.n() == 20);
    for (Index i = 0; i < 20; ++i) {
      CHECK(ds.x_clean.row(i) == ds.x_clean.row(4 * (i / 4)));
      CHECK(ds.labels[static_cast<std::size_t>(i)] == i / 4);
      CHECK(ds.x_clean.row(i).norm() <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("poisson surrogate") {
    PoissonSurrogateParams p;
    p.clusters = 3;
    p.cells_per_cluster = 20;
    p.genes = 200;
    const CountDataset a = gen_poisson_surrogate(p, 16);
    const CountDataset b = gen_poisson_surrogate(p, 16);
    CHECK(a.counts == b.counts);
    CHECK(a.counts.rows() == 60);
    CHECK((a.counts.array() >= 0.0).all());
    CHECK((a.counts.array() == a.counts.array().round()).all());
    CHECK((a.profiles.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((a.library_target.array() >= 500.0).all());
    CHECK((a.library_target.array() <= 5000.0).all());
    // Cluster c draws log library sizes from [lo + c/2 (span - w), ... + w].
    const double log_lo = std::log(500.0), span = std::log(5000.0) - log_lo, w = 0.7 * span;
    for (Index i = 0; i < 60; ++i) {
      const double start = log_lo + static_cast<double>(i / 20) / 2.0 * (span - w);
      const double v = std::log(a.library_target(i));
      CHECK(v >= start - 1e-12);
      CHECK(v <= start + w + 1e-12);
    }
    CHECK(a.library_target.head(20).mean() < a.library_target.tail(20).mean());
    for (Index i = 0; i < 60; ++i) CHECK(a.labels[static_cast<std::size_t>(i)] == i / 20);
    const double rel = ((a.counts.rowwise().sum() - a.library_target).array() / a.library_target.array()).abs().maxCoeff();
    CHECK(rel < 0.2);
    p.library_window = 1.5;
    CHECK(error_kind([&] { gen_poisson_surrogate(p, 1); }) == ErrorKind::OutOfRange);
  }
}
