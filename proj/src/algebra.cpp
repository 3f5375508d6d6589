#include "freeprod/algebra.hpp"

namespace freeprod {

namespace {

constexpr int kMaxClosureRounds = 10;

cplx hs_dot(const Mat& a, const Mat& b) {
  // <a, b> = tr(a* b) without forming the product
  return (a.conjugate().cwiseProduct(b)).sum();
}

}  // namespace

MatrixAlgebra::MatrixAlgebra(std::vector<Mat> generators, double rank_tol)
    : rank_tol_(rank_tol), generators_(std::move(generators)) {
  if (generators_.empty()) throw Error(ErrorCode::InvalidArgument, "algebra needs at least one generator");
  d_ = static_cast<int>(generators_.front().rows());
  for (const auto& g : generators_)
    if (g.rows() != d_ || g.cols() != d_)
      throw Error(ErrorCode::InvalidArgument, "algebra generators must be square and of equal size");

  try_add(Mat::Identity(d_, d_));
  for (const auto& g : generators_) {
    try_add(g);
    try_add(g.adjoint());
  }

  for (int round = 0;; ++round) {
    if (round == kMaxClosureRounds)
      throw Error(ErrorCode::RankDeficient, "algebra closure did not stabilize in 10 rounds");
    const std::vector<Mat> snapshot = basis_;
    bool grew = false;
    for (const auto& a : snapshot)
      for (const auto& b : snapshot) grew = try_add(a * b) || grew;
    if (!grew) break;
  }
}

bool MatrixAlgebra::try_add(const Mat& x) {
  const double scale = std::max(1.0, x.norm());
  Mat r = x;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis_) r -= q * hs_dot(q, r);
  const double n = r.norm();
  if (n <= rank_tol_ * scale) return false;
  basis_.push_back(r / n);
  return true;
}

double MatrixAlgebra::distance(const Mat& x) const {
  if (x.rows() != d_ || x.cols() != d_)
    throw Error(ErrorCode::InvalidArgument, "algebra distance: matrix has wrong shape");
  Mat r = x;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis_) r -= q * hs_dot(q, r);
  return r.norm();
}

bool MatrixAlgebra::contains(const Mat& x, double tol) const {
  return distance(x) <= tol * std::max(1.0, x.norm());
}

std::vector<Mat> MatrixAlgebra::commutant_basis() const {
  const Eigen::Index n = static_cast<Eigen::Index>(d_) * d_;
  const Mat id = Mat::Identity(d_, d_);
  Mat system(n * static_cast<Eigen::Index>(basis_.size()), n);
  // vec(Y x - x Y) = (x^T ⊗ 1 - 1 ⊗ x) vec(Y), column-major vec
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const Mat& x = basis_[k];
    Mat block = Mat::Zero(n, n);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        block.block(i * d_, j * d_, d_, d_) += x(j, i) * id;
        if (i == j) block.block(i * d_, j * d_, d_, d_) -= x;
      }
    system.middleRows(static_cast<Eigen::Index>(k) * n, n) = block;
  }
  Eigen::JacobiSVD<Mat> svd(system, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = rank_tol_ * std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::vector<Mat> out;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double s = c < sv.size() ? sv(c) : 0.0;
    if (s > cutoff) continue;
    Vec v = svd.matrixV().col(c);
    out.push_back(Eigen::Map<Mat>(v.data(), d_, d_));
  }
  return out;
}

}  // namespace freeprod
