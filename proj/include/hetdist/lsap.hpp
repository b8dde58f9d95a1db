#pragma once

#include <vector>

#include "hetdist/types.hpp"

namespace hetdist {

/// Square cost matrix with a mask of cells that may never be assigned.
///
/// Forbidden cells stand in for +inf costs. Their stored cost value is never
/// read, so arithmetic on reduced costs stays finite.
class MaskedCost {
 public:
  MaskedCost() = default;

  /// Throws NonFinite if an allowed cell is not finite, ShapeMismatch if the
  /// matrices are not square and of equal size.
  MaskedCost(RowMatrixXd cost, BoolMatrix forbidden);

  /// All cells allowed except the diagonal.
  static MaskedCost with_forbidden_diagonal(RowMatrixXd cost);

  Index size() const noexcept { return cost_.rows(); }
  const RowMatrixXd& cost() const noexcept { return cost_; }
  const BoolMatrix& forbidden() const noexcept { return forbidden_; }

  bool allowed(Index i, Index j) const { return !forbidden_(i, j); }
  double operator()(Index i, Index j) const { return cost_(i, j); }

  /// Marks an additional cell as forbidden.
  void forbid(Index i, Index j) { forbidden_(i, j) = true; }

 private:
  RowMatrixXd cost_;
  BoolMatrix forbidden_;
};

/// A permutation: row i is assigned column sigma[i].
struct Assignment {
  std::vector<Index> sigma;

  Index size() const noexcept { return static_cast<Index>(sigma.size()); }
  Index operator[](Index i) const { return sigma[static_cast<std::size_t>(i)]; }

  bool is_bijection() const;
};

/// Minimum-cost perfect matching avoiding forbidden cells.
///
/// Shortest augmenting path method (Jonker-Volgenant style) with dual
/// potentials, O(n^3) worst case. Columns are scanned in ascending index
/// order and the first minimum wins (an unassigned column is preferred on
/// equal path length), so the result is deterministic.
///
/// Throws Infeasible as soon as a row cannot be augmented, and
/// InvalidArgument for an empty matrix.
Assignment solve(const MaskedCost& cost);

/// Sum of cost[i][sigma[i]]. Throws MaskViolation on a forbidden cell and
/// ShapeMismatch if the sizes differ.
double assignment_cost(const MaskedCost& cost, const Assignment& a);

}  // namespace hetdist
