#include "freeprod/modular.hpp"

#include <algorithm>
#include <cmath>

namespace freeprod {

namespace {

struct HermitianEigen {
  Eigen::VectorXd values;
  Mat vectors;
};

HermitianEigen hermitian_eigen(const Mat& h) {
  const Mat sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  return {es.eigenvalues().cwiseMax(kSpectrumFloor), es.eigenvectors()};
}

template <class F>
Mat spectral_function(const Mat& h, F f) {
  const HermitianEigen e = hermitian_eigen(h);
  Vec fv(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) fv(i) = f(e.values(i));
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Eigen::Index numerical_rank(const Mat& m, double tol, double* smallest) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) {
    *smallest = 0.0;
    return 0;
  }
  *smallest = sv(sv.size() - 1);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, sv(0))) ++rank;
  return rank;
}

double distance_to_span(const std::vector<Mat>& orthonormal, const Mat& x) {
  Mat r = x;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : orthonormal) r -= q * (q.conjugate().cwiseProduct(r)).sum();
  return r.norm();
}

}  // namespace

Mat ModularData::delta_power(double p) const {
  return spectral_function(delta, [p](double mu) { return cplx(std::pow(mu, p), 0.0); });
}

Mat ModularData::delta_it(double t) const {
  return spectral_function(delta, [t](double mu) { return std::exp(cplx(0.0, t * std::log(mu))); });
}

Mat ModularData::flow(const Mat& x, double t) const {
  const Mat u = delta_it(t);
  return u * x * u.adjoint();
}

ModularData tomita(const MatrixAlgebra& algebra, const Vec& omega, double rank_tol) {
  const int d = algebra.hilbert_dim();
  if (omega.size() != d) throw Error(ErrorCode::InvalidArgument, "tomita: omega has wrong length");
  if (std::abs(omega.norm() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "tomita: omega is not a unit vector");

  const auto& basis = algebra.basis();
  const auto k = static_cast<Eigen::Index>(basis.size());
  Mat x_omega(d, k), xstar_omega(d, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    x_omega.col(i) = basis[static_cast<std::size_t>(i)] * omega;
    xstar_omega.col(i) = basis[static_cast<std::size_t>(i)].adjoint() * omega;
  }

  double smallest = 0.0;
  const Eigen::Index cyc_rank = numerical_rank(x_omega, rank_tol, &smallest);
  if (cyc_rank < d)
    throw Error(ErrorCode::NotCyclic, "tomita: omega is not cyclic (rank " + std::to_string(cyc_rank) +
                                          " of " + std::to_string(d) + ", smallest singular value " +
                                          std::to_string(smallest) + ")");

  const auto commutant = algebra.commutant_basis();
  Mat y_omega(d, static_cast<Eigen::Index>(commutant.size()));
  for (std::size_t i = 0; i < commutant.size(); ++i)
    y_omega.col(static_cast<Eigen::Index>(i)) = commutant[i] * omega;
  const Eigen::Index sep_rank = numerical_rank(y_omega, rank_tol, &smallest);
  if (sep_rank < d)
    throw Error(ErrorCode::NotSeparating,
                "tomita: omega is not separating (commutant rank " + std::to_string(sep_rank) +
                    " of " + std::to_string(d) + ", smallest singular value " +
                    std::to_string(smallest) + ")");
  if (k != d)
    throw Error(ErrorCode::RankDeficient, "tomita: algebra dimension " + std::to_string(k) +
                                              " differs from the space dimension " + std::to_string(d));

  ModularData md;
  md.omega = omega;
  md.algebra_basis = basis;
  md.cyclic_basis = x_omega;

  // S(X c) = Y conj(c)  =>  S v = Y conj(X^{-1}) conj(v)
  const Mat x_inv = x_omega.fullPivLu().inverse();
  md.S = SemilinearMap::anti(xstar_omega * x_inv.conjugate());

  // S* S for S = M∘C is M^T conj(M)
  const Mat m = md.S.matrix;
  md.delta = m.transpose() * m.conjugate();
  md.delta = 0.5 * (md.delta + md.delta.adjoint()).eval();

  const HermitianEigen e = hermitian_eigen(md.delta);
  md.delta_spectrum = e.values;
  md.condition_number = e.values.maxCoeff() / e.values.minCoeff();

  const Mat inv_sqrt = md.delta_power(-0.5);
  md.J = SemilinearMap::anti(m * inv_sqrt.conjugate());
  return md;
}

bool ModularAxiomsReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

const CheckResult& ModularAxiomsReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw Error(ErrorCode::InvalidArgument, "no check named " + name);
}

std::vector<double> default_t_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(-10.0 + i);
  return grid;
}

ModularAxiomsReport modular_axioms_check(const ModularData& md, const MatrixAlgebra& algebra,
                                         const Vec& omega, const std::vector<double>& t_grid,
                                         double tol) {
  const int d = algebra.hilbert_dim();
  const auto& basis = algebra.basis();
  const Mat id = Mat::Identity(d, d);
  ModularAxiomsReport report;
  auto add = [&](std::string name, double residual) {
    report.checks.push_back({std::move(name), residual, tol});
  };

  double s_res = 0.0;
  for (const auto& x : basis) s_res = std::max(s_res, (md.S.apply(x * omega) - x.adjoint() * omega).norm());
  add("S_on_algebra", s_res);

  const Mat sqrt_delta = md.delta_power(0.5);
  add("polar_S_eq_J_delta_half", (md.S.matrix - md.J.matrix * sqrt_delta.conjugate()).norm());
  add("J_fixes_omega", (md.J.apply(omega) - omega).norm());
  add("delta_fixes_omega", (md.delta * omega - omega).norm());
  add("J_involution", (md.J.matrix * md.J.matrix.conjugate() - id).norm());

  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (md.delta + md.delta.adjoint()));
  const double hermiticity = (md.delta - md.delta.adjoint()).norm();
  const double negativity = std::max(0.0, -es.eigenvalues().minCoeff());
  add("delta_positive", hermiticity + negativity + (es.eigenvalues().minCoeff() > 0.0 ? 0.0 : 1.0));

  // J x J = M_J conj(x) conj(M_J)
  double jmj = 0.0;
  for (const auto& x : basis) {
    const Mat jxj = md.J.matrix * x.conjugate() * md.J.matrix.conjugate();
    for (const auto& y : basis) jmj = std::max(jmj, (jxj * y - y * jxj).norm());
  }
  add("JMJ_in_commutant", jmj);

  double state = 0.0, invariance = 0.0;
  for (double t : t_grid) {
    const Mat u = md.delta_it(t);
    for (const auto& x : basis) {
      const Mat sx = u * x * u.adjoint();
      state = std::max(state, std::abs(omega.dot(sx * omega) - omega.dot(x * omega)));
      invariance = std::max(invariance, algebra.distance(sx));
    }
  }
  add("state_invariance", state);
  add("flow_preserves_algebra", invariance);

  // omega(x sigma_{-i}(y)) = omega(y x) with sigma_{-i}(y) = Delta y Delta^{-1}
  const Mat inv_delta = md.delta_power(-1.0);
  double kms = 0.0;
  for (const auto& x : basis)
    for (const auto& y : basis) {
      const cplx lhs = omega.dot(x * md.delta * y * inv_delta * omega);
      const cplx rhs = omega.dot(y * x * omega);
      kms = std::max(kms, std::abs(lhs - rhs));
    }
  add("kms", kms);
  return report;
}

FreeModular::FreeModular(const FockSpace& fock, std::map<Label, ModularData> seeds)
    : fock_(fock),
      seeds_(std::move(seeds)),
      j_(std::map<FreeOperator::Key, Mat>{}, true),
      s_(std::map<FreeOperator::Key, Mat>{}, true) {
  std::map<Label, SemilinearMap> js;
  std::map<Label, Mat> half;
  for (const auto& s : fock_.seeds()) {
    auto it = seeds_.find(s.label());
    if (it == seeds_.end())
      throw Error(ErrorCode::InvalidArgument,
                  "free modular structure: no modular data for seed " + std::to_string(s.label()));
    if (it->second.omega.size() != s.dim() || (it->second.omega - s.omega()).norm() > 1e-12)
      throw Error(ErrorCode::InvalidArgument,
                  "free modular structure: modular data of seed " + std::to_string(s.label()) +
                      " uses a different vector");
    js.emplace(s.label(), it->second.J);
    half.emplace(s.label(), it->second.delta_power(0.5));
  }
  const FreeOperator z = z_operator(fock_);
  j_ = star_operator(fock_, js).compose(z);
  s_ = j_.compose(star_operator(fock_, half));
}

FreeOperator FreeModular::unitary(double t) const {
  std::map<Label, Mat> us;
  for (const auto& [label, md] : seeds_) us.emplace(label, md.delta_it(t));
  return star_operator(fock_, us);
}

StarResiduals FreeModular::verify(const MomentWord& word, double t) const {
  std::vector<std::pair<Label, Mat>> plain, flowed, adjoints;
  for (const auto& f : word.factors) {
    const ModularData& md = seed(f.label);
    const double dist = distance_to_span(md.algebra_basis, f.x);
    if (dist > 1e-9 * std::max(1.0, f.x.norm()))
      throw Error(ErrorCode::InvalidArgument,
                  "verify_modular_star: factor at label " + std::to_string(f.label) +
                      " is not in the seed algebra");
    plain.emplace_back(f.label, f.x);
    flowed.emplace_back(f.label, md.flow(f.x, t));
  }
  for (auto it = word.factors.rbegin(); it != word.factors.rend(); ++it)
    adjoints.emplace_back(it->label, it->x.adjoint());

  const Applied v = free_word_vector(fock_, plain);
  const Applied v_flow = free_word_vector(fock_, flowed);
  const Applied v_adj = free_word_vector(fock_, adjoints);
  if (!(v.exact && v_flow.exact && v_adj.exact))
    throw Error(ErrorCode::Truncation, "verify_modular_star: word leaves the exact regime");

  StarResiduals r;
  r.flow = (unitary(t).apply(fock_, v.vector) - v_flow.vector).norm();
  r.s_identity = (s_.apply(fock_, v.vector) - v_adj.vector).norm();
  return r;
}

StarResiduals verify_modular_star(const FockSpace& fock,
                                  const std::map<Label, ModularData>& seed_modular,
                                  const MomentWord& word, double t) {
  return FreeModular(fock, seed_modular).verify(word, t);
}

HsmiReport hsmi_flow_inclusion_check(const std::map<Label, HsmiPair>& pairs,
                                     const std::vector<double>& t_grid, double tol) {
  HsmiReport report;
  report.tolerance = tol;
  for (double t : t_grid)
    if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "hsmi check: t grid must be nonnegative");

  for (const auto& [label, pair] : pairs) {
    const MatrixAlgebra outer(pair.outer_generators);
    const MatrixAlgebra sub(pair.sub_generators);
    for (const auto& n : sub.basis())
      if (outer.distance(n) > 1e-9)
        throw Error(ErrorCode::InvalidArgument,
                    "hsmi check: N is not contained in M at seed " + std::to_string(label));
    const ModularData md = tomita(outer, pair.omega);
    double worst = 0.0;
    for (double t : t_grid) {
      const Mat u = md.delta_it(t);
      double at_t = 0.0;
      for (const auto& n : sub.basis()) at_t = std::max(at_t, sub.distance(u * n * u.adjoint()));
      report.rows.push_back({label, t, at_t});
      worst = std::max(worst, at_t);
    }
    report.max_violation[label] = worst;
    report.overall = std::max(report.overall, worst);
  }
  return report;
}

}  // namespace freeprod
