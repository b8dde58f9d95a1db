#include "hetdist/graphs.hpp"

#include <algorithm>
#include <ostream>
#include <utility>

#include "hetdist/error.hpp"
#include "hetdist/ingest.hpp"

namespace hetdist {

KnnGraph knn(const SqDistMatrix& d2, Index k) {
  const Index n = d2.size();
  if (k < 1 || k > n - 1) throw Error(ErrorKind::OutOfRange, "need 1 <= k <= n - 1");

  KnnGraph g{IndexMatrix(n, k), Eigen::MatrixXd(n, k)};
  std::vector<std::pair<double, Index>> row;
  row.reserve(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    row.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(d2(i, j), j);
    }
    // Lexicographic pair order gives the ascending-index tie rule.
    std::partial_sort(row.begin(), row.begin() + k, row.end());
    for (Index r = 0; r < k; ++r) {
      g.nbr(i, r) = row[static_cast<std::size_t>(r)].second;
      g.dist(i, r) = row[static_cast<std::size_t>(r)].first;
    }
  }
  return g;
}

double knn_accuracy(const KnnGraph& test, const KnnGraph& truth) {
  if (test.n() != truth.n() || test.k() != truth.k()) {
    throw Error(ErrorKind::ShapeMismatch, "graphs differ in size or neighborhood size");
  }
  const Index n = test.n();
  const Index k = test.k();
  if (n == 0) return 1.0;
  std::vector<Index> a(static_cast<std::size_t>(k)), b(static_cast<std::size_t>(k));
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < k; ++r) {
      a[static_cast<std::size_t>(r)] = test.nbr(i, r);
      b[static_cast<std::size_t>(r)] = truth.nbr(i, r);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    Index common = 0;
    for (auto x = a.begin(), y = b.begin(); x != a.end() && y != b.end();) {
      if (*x < *y) {
        ++x;
      } else if (*y < *x) {
        ++y;
      } else {
        ++common;
        ++x;
        ++y;
      }
    }
    total += static_cast<double>(common) / static_cast<double>(k);
  }
  return total / static_cast<double>(n);
}

double impurity_score(const KnnGraph& g, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != g.n()) {
    throw Error(ErrorKind::ShapeMismatch, "one label per node required");
  }
  if (g.n() == 0) return 0.0;
  Index mismatched = 0;
  for (Index i = 0; i < g.n(); ++i) {
    const int ci = labels[static_cast<std::size_t>(i)];
    for (Index r = 0; r < g.k(); ++r) {
      if (labels[static_cast<std::size_t>(g.nbr(i, r))] != ci) ++mismatched;
    }
  }
  return static_cast<double>(mismatched) / static_cast<double>(g.k() * g.n());
}

void write_knn_csv(const KnnGraph& g, std::ostream& out) {
  out << "i,rank,j,distance\n";
  for (Index i = 0; i < g.n(); ++i) {
    for (Index r = 0; r < g.k(); ++r) {
      out << i << ',' << (r + 1) << ',' << g.nbr(i, r) << ',' << format_double(g.dist(i, r))
          << '\n';
    }
  }
}

}  // namespace hetdist
