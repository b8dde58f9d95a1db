#include "hetdist/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "hetdist/error.hpp"

namespace hetdist {

namespace {

KernelMatrix with_degrees(Eigen::MatrixXd w, Normalization tag) {
  Eigen::VectorXd d = w.rowwise().sum();
  return {std::move(w), tag, std::move(d)};
}

}  // namespace

KernelMatrix gaussian_row_stochastic(const SqDistMatrix& d2, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw Error(ErrorKind::NonPositive, "bandwidth sigma^2 must be > 0");
  const Index n = d2.size();
  Eigen::MatrixXd k(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      k(i, j) = i == j ? 1.0 : std::exp(-std::max(0.0, d2(i, j)) / sigma_sq);
    }
  }
  const Eigen::VectorXd deg = k.rowwise().sum();
  for (Index i = 0; i < n; ++i) {
    if (!(deg(i) > 0.0) || !std::isfinite(deg(i))) {
      throw IndexedError(ErrorKind::DegenerateRow, i, "kernel row degree is not positive");
    }
  }
  k = deg.cwiseInverse().asDiagonal() * k;
  return with_degrees(std::move(k), Normalization::RowStochastic);
}

Eigen::VectorXd knn_bandwidths(const SqDistMatrix& d2, Index k) {
  const Index n = d2.size();
  if (k < 1 || k > n - 1) {
    throw Error(ErrorKind::OutOfRange, "neighbor rank k must satisfy 1 <= k <= n - 1");
  }
  Eigen::VectorXd sigma(n);
  std::vector<double> row(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t pos = 0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) row[pos++] = d2(i, j);
    }
    auto kth = row.begin() + (k - 1);
    std::nth_element(row.begin(), kth, row.end());
    sigma(i) = std::sqrt(std::max(0.0, *kth));
  }
  return sigma;
}

KernelMatrix self_tuning_kernel(const SqDistMatrix& d2, Index k) {
  const Eigen::VectorXd sigma = knn_bandwidths(d2, k);
  const Index n = d2.size();
  for (Index i = 0; i < n; ++i) {
    if (!(sigma(i) > 0.0)) {
      throw IndexedError(ErrorKind::ZeroBandwidth, i, "k-th neighbor distance is zero");
    }
  }
  Eigen::MatrixXd w(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      w(i, j) = i == j ? 1.0 : std::exp(-std::max(0.0, d2(i, j)) / (sigma(i) * sigma(j)));
    }
  }
  return with_degrees(std::move(w), Normalization::Raw);
}

KernelMatrix symmetric_normalize(const KernelMatrix& kern) {
  const Eigen::VectorXd deg = kern.w.rowwise().sum();
  for (Index i = 0; i < deg.size(); ++i) {
    if (!(deg(i) > 0.0)) throw IndexedError(ErrorKind::ZeroDegree, i, "degree must be > 0");
  }
  const Eigen::VectorXd s = deg.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd w = s.asDiagonal() * kern.w * s.asDiagonal();
  // Exact symmetry despite rounding in the two scalings.
  w = (0.5 * (w + w.transpose())).eval();
  return with_degrees(std::move(w), Normalization::Symmetric);
}

// ---------------------------------------------------------------------------
// Smallest eigenpairs of a symmetric matrix.

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Tridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;  // size n - 1

  Index size() const { return diag.size(); }

  double norm_bound() const {
    double m = 0.0;
    const Index n = size();
    for (Index i = 0; i < n; ++i) {
      double r = std::abs(diag(i));
      if (i > 0) r += std::abs(off(i - 1));
      if (i + 1 < n) r += std::abs(off(i));
      m = std::max(m, r);
    }
    return m;
  }

  // Number of eigenvalues strictly below x (Sturm sequence).
  Index count_below(double x, double pivmin) const {
    Index count = 0;
    double d = diag(0) - x;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
    for (Index i = 1; i < size(); ++i) {
      d = diag(i) - x - off(i - 1) * off(i - 1) / d;
      if (std::abs(d) < pivmin) d = -pivmin;
      if (d < 0.0) ++count;
    }
    return count;
  }
};

// Gaussian elimination with partial pivoting for (T - lambda I) x = b.
class ShiftedTridiagonalSolver {
 public:
  ShiftedTridiagonalSolver(const Tridiagonal& t, double lambda, double tiny)
      : n_(t.size()), d_(n_), du_(n_), du2_(n_), dl_(n_), pivot_(n_, false) {
    for (Index i = 0; i < n_; ++i) d_(i) = t.diag(i) - lambda;
    for (Index i = 0; i + 1 < n_; ++i) {
      du_(i) = t.off(i);
      dl_(i) = t.off(i);
    }
    du2_.setZero();
    for (Index i = 0; i + 1 < n_; ++i) {
      if (std::abs(d_(i)) >= std::abs(dl_(i))) {
        if (std::abs(d_(i)) < tiny) d_(i) = tiny;
        const double f = dl_(i) / d_(i);
        dl_(i) = f;
        d_(i + 1) -= f * du_(i);
      } else {
        // Swap rows i and i+1.
        const double f = d_(i) / dl_(i);
        d_(i) = dl_(i);
        dl_(i) = f;
        const double tmp = du_(i);
        du_(i) = d_(i + 1);
        d_(i + 1) = tmp - f * du_(i);
        if (i + 2 < n_) {
          du2_(i) = du_(i + 1);
          du_(i + 1) = -f * du2_(i);
        }
        pivot_[static_cast<std::size_t>(i)] = true;
      }
    }
    if (std::abs(d_(n_ - 1)) < tiny) d_(n_ - 1) = tiny;
  }

  void solve(Eigen::VectorXd& b) const {
    for (Index i = 0; i + 1 < n_; ++i) {
      if (pivot_[static_cast<std::size_t>(i)]) {
        const double tmp = b(i);
        b(i) = b(i + 1);
        b(i + 1) = tmp - dl_(i) * b(i);
      } else {
        b(i + 1) -= dl_(i) * b(i);
      }
    }
    b(n_ - 1) /= d_(n_ - 1);
    if (n_ > 1) b(n_ - 2) = (b(n_ - 2) - du_(n_ - 2) * b(n_ - 1)) / d_(n_ - 2);
    for (Index i = n_ - 3; i >= 0; --i) {
      b(i) = (b(i) - du_(i) * b(i + 1) - du2_(i) * b(i + 2)) / d_(i);
    }
  }

 private:
  Index n_;
  Eigen::VectorXd d_, du_, du2_, dl_;
  std::vector<bool> pivot_;
};

Eigen::VectorXd bisect_smallest(const Tridiagonal& t, Index k) {
  const Index n = t.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.off(i - 1));
    if (i + 1 < n) r += std::abs(t.off(i));
    lo = std::min(lo, t.diag(i) - r);
    hi = std::max(hi, t.diag(i) + r);
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, scale * scale);
  lo -= 2.0 * kEps * scale + pivmin;
  hi += 2.0 * kEps * scale + pivmin;

  Eigen::VectorXd values(k);
  for (Index j = 0; j < k; ++j) {
    // Eigenvalue j (0-based) lies where count_below jumps from <= j to > j.
    double a = j > 0 ? values(j - 1) - 2.0 * kEps * scale : lo;
    double b = hi;
    a = std::max(a, lo);
    for (int it = 0; it < 200 && b - a > 2.0 * kEps * (std::abs(a) + std::abs(b)) + pivmin;
         ++it) {
      const double mid = 0.5 * (a + b);
      if (t.count_below(mid, pivmin) > j) {
        b = mid;
      } else {
        a = mid;
      }
    }
    values(j) = 0.5 * (a + b);
  }
  return values;
}

// Inverse iteration with modified Gram-Schmidt inside clusters of close
// eigenvalues, in the manner of LAPACK's stein.
Eigen::MatrixXd inverse_iteration(const Tridiagonal& t, const Eigen::VectorXd& values) {
  const Index n = t.size();
  const Index k = values.size();
  const double tnorm = std::max(t.norm_bound(), std::numeric_limits<double>::min());
  const double cluster_tol = 1e-3 * tnorm;
  const double tiny = kEps * tnorm;
  Eigen::MatrixXd z(n, k);

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  Index cluster_start = 0;
  for (Index j = 0; j < k; ++j) {
    if (j > 0 && values(j) - values(j - 1) > cluster_tol) cluster_start = j;
    // Perturb repeated eigenvalues so the shifted systems differ.
    double lambda = values(j);
    if (j > cluster_start && lambda - values(j - 1) < 10.0 * kEps * tnorm) {
      lambda = values(j - 1) + 10.0 * kEps * tnorm;
    }
    ShiftedTridiagonalSolver solver(t, lambda, tiny);

    Eigen::VectorXd x(n);
    for (Index i = 0; i < n; ++i) x(i) = unif(rng);
    x.normalize();
    auto orthogonalize = [&](Eigen::VectorXd& v) {
      for (Index p = cluster_start; p < j; ++p) v -= z.col(p).dot(v) * z.col(p);
    };
    int extra = 0;
    for (int it = 0; it < 8; ++it) {
      orthogonalize(x);
      x.normalize();
      solver.solve(x);
      const double growth = x.norm();
      orthogonalize(x);
      x.normalize();
      if (growth * tiny >= 1e-3) {
        if (++extra >= 2) break;
      }
    }
    orthogonalize(x);
    x.normalize();
    z.col(j) = x;
  }
  return z;
}

void fix_signs(Eigen::MatrixXd& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
}

Eigen::VectorXd residual_norms(const Eigen::MatrixXd& l, const Eigen::VectorXd& values,
                               const Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd r = l * vectors - vectors * values.asDiagonal();
  return r.colwise().norm().transpose();
}

}  // namespace

LaplacianSpectrum smallest_eigenpairs(const Eigen::MatrixXd& l, Index k) {
  const Index n = l.rows();
  if (l.cols() != n) throw Error(ErrorKind::ShapeMismatch, "matrix must be square");
  if (k < 1 || k > n) throw Error(ErrorKind::OutOfRange, "need 1 <= k <= n");

  const double lnorm = l.cwiseAbs().rowwise().sum().maxCoeff();
  const double tol = 1e-8 * std::max(lnorm, std::numeric_limits<double>::min());
  const double ortho_tol = 1e-8;

  auto accept = [&](LaplacianSpectrum& s) {
    s.residuals = residual_norms(l, s.eigenvalues, s.eigenvectors);
    const double ortho =
        (s.eigenvectors.transpose() * s.eigenvectors - Eigen::MatrixXd::Identity(k, k))
            .cwiseAbs()
            .maxCoeff();
    return s.residuals.maxCoeff() <= tol && ortho <= ortho_tol;
  };

  if (n == 1) {
    LaplacianSpectrum s{Eigen::VectorXd::Constant(1, l(0, 0)), Eigen::MatrixXd::Ones(1, 1), {}};
    accept(s);
    return s;
  }

  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(l);
  const Tridiagonal t{tri.diagonal(), tri.subDiagonal()};

  LaplacianSpectrum spec;
  spec.eigenvalues = bisect_smallest(t, k);
  spec.eigenvectors = tri.matrixQ() * inverse_iteration(t, spec.eigenvalues);
  if (accept(spec)) {
    fix_signs(spec.eigenvectors);
    return spec;
  }
  const double first_residual = spec.residuals.maxCoeff();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  Eigen::VectorXd diag = t.diag;
  Eigen::VectorXd off = t.off;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "tridiagonal QR iteration did not converge");
  }
  spec.eigenvalues = es.eigenvalues().head(k);
  spec.eigenvectors = tri.matrixQ() * es.eigenvectors().leftCols(k);
  if (!accept(spec)) {
    std::ostringstream msg;
    msg << "residual bound " << tol << " not met: inverse iteration max residual "
        << first_residual << ", QR fallback max residual " << spec.residuals.maxCoeff();
    throw Error(ErrorKind::ConvergenceFailure, msg.str());
  }
  fix_signs(spec.eigenvectors);
  return spec;
}

}  // namespace hetdist
