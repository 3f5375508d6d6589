#include "freeprod/seed.hpp"

#include <cmath>
#include <sstream>

namespace freeprod {

std::string word_to_string(const Word& w) {
  if (w.empty()) return "()";
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) os << ',';
    os << w[i];
  }
  os << ')';
  return os.str();
}

bool is_alternating(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == w[i - 1]) return false;
  return true;
}

namespace {

constexpr double kUnitTolerance = 1e-12;

}  // namespace

SeedSpace::SeedSpace(Label label, Vec omega) : label_(label), omega_(std::move(omega)) {
  const Eigen::Index d = omega_.size();
  if (d < 1)
    throw Error(ErrorCode::InvalidArgument,
                "seed " + std::to_string(label) + ": dimension must be at least 1");
  if (std::abs(omega_.norm() - 1.0) > kUnitTolerance)
    throw Error(ErrorCode::InvalidArgument,
                "seed " + std::to_string(label) + ": omega is not a unit vector");

  // Gram-Schmidt of the standard basis against omega, skipping the basis
  // vector with the largest overlap. Two passes keep orthogonality at 1e-16.
  Eigen::Index drop = 0;
  omega_.cwiseAbs().maxCoeff(&drop);

  reduced_.resize(d, d - 1);
  Eigen::Index col = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (k == drop) continue;
    Vec v = Vec::Unit(d, k);
    for (int pass = 0; pass < 2; ++pass) {
      v -= omega_ * omega_.dot(v);
      for (Eigen::Index j = 0; j < col; ++j) v -= reduced_.col(j) * reduced_.col(j).dot(v);
    }
    reduced_.col(col++) = v / v.norm();
  }

  adapted_.resize(d, d);
  adapted_.col(0) = omega_;
  adapted_.rightCols(d - 1) = reduced_;
}

SeedSpace SeedSpace::standard(Label label, int dim) {
  if (dim < 1)
    throw Error(ErrorCode::InvalidArgument,
                "seed " + std::to_string(label) + ": dimension must be at least 1");
  return SeedSpace(label, Vec::Unit(dim, 0));
}

Mat SeedSpace::to_adapted(const Mat& t) const {
  if (t.rows() != dim() || t.cols() != dim())
    throw Error(ErrorCode::InvalidArgument,
                "seed " + std::to_string(label_) + ": operator has wrong shape");
  return adapted_.adjoint() * t * adapted_;
}

Mat SeedSpace::to_adapted(const SemilinearMap& t) const {
  if (!t.antilinear) return to_adapted(t.matrix);
  if (t.matrix.rows() != dim() || t.matrix.cols() != dim())
    throw Error(ErrorCode::InvalidArgument,
                "seed " + std::to_string(label_) + ": operator has wrong shape");
  // T(U c) = M conj(U) conj(c)
  return adapted_.adjoint() * t.matrix * adapted_.conjugate();
}

Mat SeedSpace::centered(const Mat& x) const {
  return x - expectation(x) * Mat::Identity(dim(), dim());
}

}  // namespace freeprod
