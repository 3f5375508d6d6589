#pragma once

#include <vector>

#include "freeprod/common.hpp"

namespace freeprod {

/// Unital *-algebra generated by a list of d×d matrices.
///
/// The closure is computed by multiplying basis elements until the span
/// stops growing (at most 10 rounds). The basis is orthonormal for the
/// Hilbert-Schmidt inner product, so membership is a projection residual.
class MatrixAlgebra {
 public:
  explicit MatrixAlgebra(std::vector<Mat> generators, double rank_tol = 1e-9);

  int hilbert_dim() const { return d_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  const std::vector<Mat>& basis() const { return basis_; }
  const std::vector<Mat>& generators() const { return generators_; }

  // Hilbert-Schmidt distance from x to the algebra.
  double distance(const Mat& x) const;
  bool contains(const Mat& x, double tol = 1e-9) const;

  // Orthonormal basis of {y : [y, x] = 0 for all x in the algebra}.
  std::vector<Mat> commutant_basis() const;

 private:
  bool try_add(const Mat& x);

  int d_ = 0;
  double rank_tol_;
  std::vector<Mat> generators_;
  std::vector<Mat> basis_;
};

}  // namespace freeprod
