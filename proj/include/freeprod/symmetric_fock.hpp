#pragma once

#include <vector>

#include "freeprod/common.hpp"

namespace freeprod {

/// Uniform rapidity grid with trapezoid weights.
struct RapidityGrid {
  double theta_min = -6.0;
  double theta_max = 6.0;
  int points = 2048;

  double step() const { return (theta_max - theta_min) / (points - 1); }
  double theta(int k) const { return theta_min + k * step(); }
  Eigen::VectorXd thetas() const;
  Eigen::VectorXd weights() const;
  void validate() const;
};

// Trapezoid inner product <a, b> = sum w conj(a) b.
cplx grid_inner(const RapidityGrid& grid, const Vec& a, const Vec& b);

struct FockState {
  // components[n] is a function on grid^n, first variable most significant.
  std::vector<Vec> components;
  bool exact = true;
};

/// Symmetric Fock space over the grid one-particle space, truncated at
/// `cap` particles. With trapezoid weights the discrete CCR hold exactly.
class SymmetricFock {
 public:
  SymmetricFock(RapidityGrid grid, int cap);

  const RapidityGrid& grid() const { return grid_; }
  int cap() const { return cap_; }
  std::size_t component_size(int n) const;

  FockState vacuum() const;
  FockState zero() const;
  FockState one_particle(const Vec& psi) const;

  // (z†(psi) Psi)_n = (1/sqrt n) sum_k psi(theta_k) Psi_{n-1}(theta without k).
  // Particles beyond the cap are dropped and clear `exact`.
  FockState create(const Vec& psi, const FockState& state) const;
  // (z(chi) Psi)_{n-1} = sqrt n sum_i w_i conj(chi_i) Psi_n(theta_i, ...), antilinear in chi.
  FockState annihilate(const Vec& chi, const FockState& state) const;

  cplx inner(const FockState& a, const FockState& b) const;
  double norm(const FockState& a) const;
  FockState add(const FockState& a, const FockState& b, cplx scale_b = 1.0) const;

 private:
  void check(const FockState& s) const;
  const Eigen::VectorXd& weights(int n) const;

  RapidityGrid grid_;
  int cap_;
  std::vector<Eigen::VectorXd> weights_;  // product weights per particle number
};

}  // namespace freeprod
