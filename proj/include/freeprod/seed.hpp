#pragma once

#include "freeprod/common.hpp"
#include "freeprod/semilinear.hpp"

namespace freeprod {

// A finite-dimensional Hilbert space H with a distinguished unit vector Omega.
// Coordinates are always taken in the standard basis of C^d; the reduced
// space H° = H ⊖ C·Omega gets a fixed orthonormal basis built at construction.
class SeedSpace {
 public:
  SeedSpace(Label label, Vec omega);

  // Omega = e_0 in C^dim.
  static SeedSpace standard(Label label, int dim);

  Label label() const { return label_; }
  int dim() const { return static_cast<int>(omega_.size()); }
  int reduced_dim() const { return dim() - 1; }
  const Vec& omega() const { return omega_; }

  // dim × (dim-1), orthonormal columns orthogonal to omega.
  const Mat& reduced_basis() const { return reduced_; }

  // Unitary [omega | reduced_basis].
  const Mat& adapted_basis() const { return adapted_; }

  // Matrix of T in the adapted basis; entry (0,0) is <Omega, T Omega>.
  Mat to_adapted(const Mat& t) const;
  // Same for an antilinear map: coordinates c -> result(c̄).
  Mat to_adapted(const SemilinearMap& t) const;

  cplx expectation(const Mat& x) const { return omega_.dot(x * omega_); }

  // x - <Omega, x Omega> 1
  Mat centered(const Mat& x) const;

 private:
  Label label_;
  Vec omega_;
  Mat reduced_;
  Mat adapted_;
};

}  // namespace freeprod
