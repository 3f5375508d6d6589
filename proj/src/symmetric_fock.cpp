#include "freeprod/symmetric_fock.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace freeprod {

Eigen::VectorXd RapidityGrid::thetas() const {
  Eigen::VectorXd t(points);
  for (int k = 0; k < points; ++k) t(k) = theta(k);
  return t;
}

Eigen::VectorXd RapidityGrid::weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(points, step());
  w(0) *= 0.5;
  w(points - 1) *= 0.5;
  return w;
}

void RapidityGrid::validate() const {
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "rapidity grid needs at least 2 points");
  if (!(theta_max > theta_min)) throw Error(ErrorCode::InvalidArgument, "rapidity grid: theta_max must exceed theta_min");
}

cplx grid_inner(const RapidityGrid& grid, const Vec& a, const Vec& b) {
  if (a.size() != grid.points || b.size() != grid.points)
    throw Error(ErrorCode::InvalidArgument, "grid_inner: vector length differs from the grid");
  const Eigen::VectorXd w = grid.weights();
  return (a.conjugate().cwiseProduct(b).cwiseProduct(w.cast<cplx>())).sum();
}

SymmetricFock::SymmetricFock(RapidityGrid grid, int cap) : grid_(grid), cap_(cap) {
  grid_.validate();
  if (cap < 1) throw Error(ErrorCode::InvalidArgument, "symmetric Fock: cap must be >= 1");
  const Eigen::VectorXd w = grid_.weights();
  weights_.push_back(Eigen::VectorXd::Ones(1));
  for (int n = 1; n <= cap_; ++n) {
    Eigen::VectorXd next = Eigen::kroneckerProduct(weights_.back(), w).eval();
    weights_.push_back(std::move(next));
  }
}

std::size_t SymmetricFock::component_size(int n) const {
  std::size_t s = 1;
  for (int i = 0; i < n; ++i) s *= static_cast<std::size_t>(grid_.points);
  return s;
}

FockState SymmetricFock::zero() const {
  FockState s;
  for (int n = 0; n <= cap_; ++n) s.components.push_back(Vec::Zero(static_cast<Eigen::Index>(component_size(n))));
  return s;
}

FockState SymmetricFock::vacuum() const {
  FockState s = zero();
  s.components[0](0) = 1.0;
  return s;
}

FockState SymmetricFock::one_particle(const Vec& psi) const {
  if (psi.size() != grid_.points) throw Error(ErrorCode::InvalidArgument, "one_particle: wrong length");
  FockState s = zero();
  s.components[1] = psi;
  return s;
}

void SymmetricFock::check(const FockState& s) const {
  if (static_cast<int>(s.components.size()) != cap_ + 1)
    throw Error(ErrorCode::InvalidArgument, "Fock state has the wrong number of components");
  for (int n = 0; n <= cap_; ++n)
    if (static_cast<std::size_t>(s.components[static_cast<std::size_t>(n)].size()) != component_size(n))
      throw Error(ErrorCode::InvalidArgument, "Fock state component has the wrong size");
}

const Eigen::VectorXd& SymmetricFock::weights(int n) const { return weights_[static_cast<std::size_t>(n)]; }

FockState SymmetricFock::create(const Vec& psi, const FockState& state) const {
  check(state);
  if (psi.size() != grid_.points) throw Error(ErrorCode::InvalidArgument, "create: wrong length");
  FockState out = zero();
  out.exact = state.exact && state.components[static_cast<std::size_t>(cap_)].norm() == 0.0;
  const auto big_n = static_cast<std::size_t>(grid_.points);
  for (int n = 1; n <= cap_; ++n) {
    const Vec& prev = state.components[static_cast<std::size_t>(n - 1)];
    Vec& cur = out.components[static_cast<std::size_t>(n)];
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) {
      // index = (hi, i, lo) with hi over k variables and lo over n-1-k variables
      const std::size_t hi_size = component_size(k), lo_size = component_size(n - 1 - k);
      for (std::size_t hi = 0; hi < hi_size; ++hi)
        for (std::size_t i = 0; i < big_n; ++i) {
          const cplx p = scale * psi(static_cast<Eigen::Index>(i));
          const std::size_t out_base = (hi * big_n + i) * lo_size;
          const std::size_t in_base = hi * lo_size;
          cur.segment(static_cast<Eigen::Index>(out_base), static_cast<Eigen::Index>(lo_size)) +=
              p * prev.segment(static_cast<Eigen::Index>(in_base), static_cast<Eigen::Index>(lo_size));
        }
    }
  }
  return out;
}

FockState SymmetricFock::annihilate(const Vec& chi, const FockState& state) const {
  check(state);
  if (chi.size() != grid_.points) throw Error(ErrorCode::InvalidArgument, "annihilate: wrong length");
  FockState out = zero();
  out.exact = state.exact;
  const Vec coeff = chi.conjugate().cwiseProduct(grid_.weights().cast<cplx>());
  for (int n = 1; n <= cap_; ++n) {
    const Vec& cur = state.components[static_cast<std::size_t>(n)];
    const auto rest = static_cast<Eigen::Index>(component_size(n - 1));
    Eigen::Map<const Mat> m(cur.data(), rest, grid_.points);
    out.components[static_cast<std::size_t>(n - 1)] = std::sqrt(static_cast<double>(n)) * (m * coeff);
  }
  return out;
}

cplx SymmetricFock::inner(const FockState& a, const FockState& b) const {
  check(a);
  check(b);
  cplx sum = 0.0;
  for (int n = 0; n <= cap_; ++n) {
    const auto& x = a.components[static_cast<std::size_t>(n)];
    const auto& y = b.components[static_cast<std::size_t>(n)];
    sum += (x.conjugate().cwiseProduct(y).cwiseProduct(weights(n).cast<cplx>())).sum();
  }
  return sum;
}

double SymmetricFock::norm(const FockState& a) const { return std::sqrt(std::max(0.0, inner(a, a).real())); }

FockState SymmetricFock::add(const FockState& a, const FockState& b, cplx scale_b) const {
  check(a);
  check(b);
  FockState out = a;
  for (std::size_t n = 0; n < out.components.size(); ++n) out.components[n] += scale_b * b.components[n];
  out.exact = a.exact && b.exact;
  return out;
}

}  // namespace freeprod
