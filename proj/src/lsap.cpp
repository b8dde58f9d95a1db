#include "hetdist/lsap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hetdist/error.hpp"

namespace hetdist {

MaskedCost::MaskedCost(RowMatrixXd cost, BoolMatrix forbidden)
    : cost_(std::move(cost)), forbidden_(std::move(forbidden)) {
  if (cost_.rows() != cost_.cols() || forbidden_.rows() != cost_.rows() ||
      forbidden_.cols() != cost_.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "cost and mask must be square and of equal size");
  }
  for (Index i = 0; i < cost_.rows(); ++i) {
    for (Index j = 0; j < cost_.cols(); ++j) {
      if (!forbidden_(i, j) && !std::isfinite(cost_(i, j))) {
        throw IndexedError(ErrorKind::NonFinite, i,
                           "allowed cost cell (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") is not finite");
      }
    }
  }
}

MaskedCost MaskedCost::with_forbidden_diagonal(RowMatrixXd cost) {
  const Index n = cost.rows();
  BoolMatrix mask = BoolMatrix::Constant(n, cost.cols(), false);
  for (Index i = 0; i < std::min(n, mask.cols()); ++i) mask(i, i) = true;
  return MaskedCost(std::move(cost), std::move(mask));
}

bool Assignment::is_bijection() const {
  std::vector<bool> seen(sigma.size(), false);
  for (Index j : sigma) {
    if (j < 0 || j >= size() || seen[static_cast<std::size_t>(j)]) return false;
    seen[static_cast<std::size_t>(j)] = true;
  }
  return true;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kNone = -1;

struct Solver {
  const MaskedCost& c;
  Index n;
  std::vector<double> u, v, path_cost;
  std::vector<Index> col4row, row4col, path, remaining;
  std::vector<bool> row_seen, col_seen;

  explicit Solver(const MaskedCost& cost)
      : c(cost),
        n(cost.size()),
        u(n, 0.0),
        v(n, 0.0),
        path_cost(n),
        col4row(n, kNone),
        row4col(n, kNone),
        path(n, kNone),
        row_seen(n),
        col_seen(n) {
    remaining.reserve(n);
  }

  // Column reduction: v_j = min over allowed rows. Leaves every reduced cost
  // nonnegative and tight on the greedily assigned cells.
  void initialize() {
    for (Index j = 0; j < n; ++j) {
      Index best = kNone;
      double best_cost = kInf;
      for (Index i = 0; i < n; ++i) {
        if (c.allowed(i, j) && c(i, j) < best_cost) {
          best_cost = c(i, j);
          best = i;
        }
      }
      if (best == kNone) {
        throw IndexedError(ErrorKind::Infeasible, j, "column has no allowed cell");
      }
      v[j] = best_cost;
      if (col4row[best] == kNone) {
        col4row[best] = j;
        row4col[j] = best;
      }
    }
  }

  // Dijkstra over reduced costs from a free row; returns the sink column and
  // the length of the shortest augmenting path.
  Index shortest_path(Index start, double& min_val) {
    remaining.clear();
    for (Index j = 0; j < n; ++j) remaining.push_back(j);
    std::fill(row_seen.begin(), row_seen.end(), false);
    std::fill(col_seen.begin(), col_seen.end(), false);
    std::fill(path_cost.begin(), path_cost.end(), kInf);

    min_val = 0.0;
    Index i = start;
    for (;;) {
      row_seen[i] = true;
      Index best_pos = kNone;
      double lowest = kInf;
      const double ui = u[i];
      for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
        const Index j = remaining[pos];
        if (c.allowed(i, j)) {
          const double r = min_val + c(i, j) - ui - v[j];
          if (r < path_cost[j]) {
            path[j] = i;
            path_cost[j] = r;
          }
        }
        if (path_cost[j] < lowest || (path_cost[j] == lowest && lowest < kInf &&
                                      row4col[j] == kNone && row4col[remaining[best_pos]] != kNone)) {
          lowest = path_cost[j];
          best_pos = static_cast<Index>(pos);
        }
      }
      if (!(lowest < kInf)) return kNone;
      min_val = lowest;
      const Index j = remaining[best_pos];
      col_seen[j] = true;
      remaining.erase(remaining.begin() + best_pos);
      if (row4col[j] == kNone) return j;
      i = row4col[j];
    }
  }

  void augment(Index start) {
    double min_val = 0.0;
    const Index sink = shortest_path(start, min_val);
    if (sink == kNone) {
      throw IndexedError(ErrorKind::Infeasible, start,
                         "no augmenting path avoids the forbidden cells");
    }
    u[start] += min_val;
    for (Index i = 0; i < n; ++i) {
      if (row_seen[i] && i != start) u[i] += min_val - path_cost[col4row[i]];
    }
    for (Index j = 0; j < n; ++j) {
      if (col_seen[j]) v[j] -= min_val - path_cost[j];
    }
    Index j = sink;
    for (;;) {
      const Index i = path[j];
      row4col[j] = i;
      std::swap(col4row[i], j);
      if (i == start) break;
    }
  }
};

}  // namespace

Assignment solve(const MaskedCost& cost) {
  const Index n = cost.size();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "cost matrix is empty");

  Solver s(cost);
  s.initialize();
  for (Index i = 0; i < n; ++i) {
    if (s.col4row[i] == kNone) s.augment(i);
  }
  return Assignment{std::move(s.col4row)};
}

double assignment_cost(const MaskedCost& cost, const Assignment& a) {
  if (a.size() != cost.size()) {
    throw Error(ErrorKind::ShapeMismatch, "assignment size differs from cost size");
  }
  double total = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const Index j = a[i];
    if (j < 0 || j >= cost.size()) {
      throw IndexedError(ErrorKind::ShapeMismatch, i, "assigned column out of range");
    }
    if (!cost.allowed(i, j)) {
      throw IndexedError(ErrorKind::MaskViolation, i, "assignment selects a forbidden cell");
    }
    total += cost(i, j);
  }
  return total;
}

}  // namespace hetdist
