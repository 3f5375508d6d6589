#pragma once

#include <map>
#include <string>
#include <vector>

#include "freeprod/algebra.hpp"
#include "freeprod/fock.hpp"
#include "freeprod/free_operator.hpp"
#include "freeprod/freeness.hpp"
#include "freeprod/semilinear.hpp"

namespace freeprod {

// Eigenvalues of Delta are clamped below at this value before taking powers.
inline constexpr double kSpectrumFloor = 1e-14;

/// Modular objects of (M, Omega) in standard coordinates of C^d.
///
/// S is the closure of x Omega -> x* Omega, Delta = S* S and J = S Delta^{-1/2}.
/// Powers of Delta are always taken from `delta` itself so that an edited
/// Delta is seen by every check.
struct ModularData {
  SemilinearMap S;
  Mat delta;
  SemilinearMap J;
  Mat cyclic_basis;  // columns x_i Omega for the algebra basis x_i
  std::vector<Mat> algebra_basis;
  Vec omega;
  Eigen::VectorXd delta_spectrum;  // ascending
  double condition_number = 1.0;

  Mat delta_power(double p) const;
  Mat delta_it(double t) const;
  // sigma_t(x) = Delta^{it} x Delta^{-it}
  Mat flow(const Mat& x, double t) const;
};

ModularData tomita(const MatrixAlgebra& algebra, const Vec& omega, double rank_tol = 1e-9);

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed() const { return residual < tolerance; }
};

struct ModularAxiomsReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  const CheckResult& check(const std::string& name) const;
};

// Default t-grid used for the flow checks: 21 points on [-10, 10].
std::vector<double> default_t_grid();

ModularAxiomsReport modular_axioms_check(const ModularData& md, const MatrixAlgebra& algebra,
                                         const Vec& omega,
                                         const std::vector<double>& t_grid = default_t_grid(),
                                         double tol = 1e-9);

struct StarResiduals {
  double flow = 0.0;        // ||(⋆Delta^{it}) x Omega - (sigma_t x) Omega||
  double s_identity = 0.0;  // ||S_free x Omega - x* Omega||
};

/// Free-product modular structure assembled from seed modular data:
/// Delta^{it} = ⋆Delta_k^{it}, J = (⋆J_k) Z, S = (⋆J_k) Z (⋆Delta_k^{1/2}).
class FreeModular {
 public:
  FreeModular(const FockSpace& fock, std::map<Label, ModularData> seeds);

  FreeOperator unitary(double t) const;
  const FreeOperator& s_operator() const { return s_; }
  const FreeOperator& j_operator() const { return j_; }
  const ModularData& seed(Label l) const { return seeds_.at(l); }

  StarResiduals verify(const MomentWord& word, double t) const;

 private:
  FockSpace fock_;
  std::map<Label, ModularData> seeds_;
  FreeOperator j_;
  FreeOperator s_;
};

StarResiduals verify_modular_star(const FockSpace& fock,
                                  const std::map<Label, ModularData>& seed_modular,
                                  const MomentWord& word, double t);

struct HsmiPair {
  std::vector<Mat> sub_generators;    // N
  std::vector<Mat> outer_generators;  // M
  Vec omega;
};

struct HsmiRow {
  Label label;
  double t;
  double distance;
};

struct HsmiReport {
  std::vector<HsmiRow> rows;
  std::map<Label, double> max_violation;
  double overall = 0.0;
  double tolerance = 1e-9;
  bool invariant() const { return overall < tolerance; }
};

/// For each seed and t >= 0: Hilbert-Schmidt distance of sigma^M_t(n) from N,
/// maximized over an orthonormal basis of N. By the factorization of the
/// free modular flow the same number bounds the free-product inclusion.
HsmiReport hsmi_flow_inclusion_check(const std::map<Label, HsmiPair>& pairs,
                                     const std::vector<double>& t_grid, double tol = 1e-9);

}  // namespace freeprod
