#pragma once

#include "freeprod/common.hpp"

namespace freeprod {

/// A linear or antilinear map in normal form `v -> matrix * (antilinear ? conj(v) : v)`.
///
/// Every antilinear operator (S, J, complex conjugation on the vacuum line)
/// is reduced to this form in the fixed coordinate basis before it is
/// composed, so conjugations never get lost between factors.
struct SemilinearMap {
  Mat matrix;
  bool antilinear = false;

  static SemilinearMap linear(Mat m) { return {std::move(m), false}; }
  static SemilinearMap anti(Mat m) { return {std::move(m), true}; }

  Vec apply(const Vec& v) const {
    return antilinear ? Vec(matrix * v.conjugate()) : Vec(matrix * v);
  }

  // (this ∘ rhs)(v) = this(rhs(v))
  SemilinearMap compose(const SemilinearMap& rhs) const {
    Mat m = antilinear ? Mat(matrix * rhs.matrix.conjugate()) : Mat(matrix * rhs.matrix);
    return {std::move(m), antilinear != rhs.antilinear};
  }

  // Antilinear adjoint of M∘C is M^T∘C.
  SemilinearMap adjoint() const {
    return antilinear ? SemilinearMap{matrix.transpose(), true}
                      : SemilinearMap{matrix.adjoint(), false};
  }
};

}  // namespace freeprod
