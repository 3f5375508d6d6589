// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <tuple>

#include <unsupported/Eigen/KroneckerProduct>

#include "freeprod/algebra.hpp"
#include "freeprod/free_operator.hpp"
#include "freeprod/freeness.hpp"
#include "freeprod/gamma.hpp"
#include "freeprod/modular.hpp"
#include "freeprod/smatrix.hpp"
#include "freeprod/spectral.hpp"
#include "support.hpp"

using namespace freeprod;
using namespace freeprod::testing;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome free_independence_suite() {
  constexpr double tol = 1e-10;
  constexpr double time_limit = 60.0;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::size_t sampled = 0, excluded = 0, configs = 0;
  double worst = 0.0;
  const std::vector<std::vector<int>> multisets = {
      {2}, {3}, {4}, {2, 2}, {2, 3}, {2, 4}, {3, 3}, {3, 4}, {4, 4},
      {2, 2, 2}, {2, 2, 3}, {2, 2, 4}, {2, 3, 3}, {2, 3, 4}, {2, 4, 4}, {3, 3, 3}, {3, 3, 4}, {3, 4, 4}, {4, 4, 4}};
  for (const auto& dims : multisets)
    for (int len = 1; len <= 4; ++len) {
      std::vector<SeedSpace> seeds;
      for (std::size_t i = 0; i < dims.size(); ++i)
        seeds.emplace_back(static_cast<Label>(i + 1), random_unit(rng, dims[i]));
      const FockSpace fock(seeds, len);
      std::map<Label, std::vector<Mat>> families;
      for (const auto& s : seeds) families[s.label()] = {random_matrix(rng, s.dim()), random_matrix(rng, s.dim())};
      const auto r = check_free_independence(fock, families, 200, tol, rng());
      sampled += r.sampled;
      excluded += r.excluded_inexact;
      worst = std::max(worst, r.max_residual);
      ++configs;
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < tol && sampled >= 10000 && secs < time_limit,
          fmt("%zu configs, %zu words (%zu inexact excluded), max |omega| %.2e < %.0e, %.1fs < %.0fs", configs,
              sampled, excluded, worst, tol, secs, time_limit)};
}

Outcome commutation_suite() {
  constexpr double tol = 1e-10;
  constexpr double time_limit = 30.0;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int same = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = uniform_int(rng, 1, 3);
    const FockSpace fock(random_seeds(rng, k, 2, 4), uniform_int(rng, 2, 4));
    const Label a = uniform_int(rng, 1, k), b = uniform_int(rng, 1, k);
    if (a == b) ++same;
    const Vec v = random_vector_up_to(rng, fock, fock.max_len() - 2);
    const double r = commutation_residual(fock, a, random_matrix(rng, fock.seed(a).dim()), b,
                                          random_matrix(rng, fock.seed(b).dim()), v);
    worst = std::max(worst, r / std::max(1.0, v.norm()));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < tol && secs < time_limit,
          fmt("1000 pairs (%d same-label), max residual/||v|| %.2e < %.0e, %.1fs < %.0fs", same, worst, tol, secs,
              time_limit)};
}

Mat unit(int n, int i, int j) {
  Mat m = Mat::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

std::vector<Mat> amplified(int n) {
  std::vector<Mat> g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.push_back(Eigen::kroneckerProduct(unit(n, i, j), Mat::Identity(n, n)).eval());
  return g;
}

Vec entangled(double lam) {
  Vec v = Vec::Zero(4);
  v(0) = std::sqrt(lam);
  v(3) = std::sqrt(1 - lam);
  return v;
}

Outcome modular_oracle() {
  constexpr double spec_tol = 1e-10, axiom_tol = 1e-9;
  const MatrixAlgebra alg(amplified(2));
  const Vec om = entangled(0.3);
  const ModularData md = tomita(alg, om);
  std::vector<double> got(md.delta_spectrum.data(), md.delta_spectrum.data() + 4);
  std::sort(got.begin(), got.end());
  const std::vector<double> want = {3.0 / 7.0, 1.0, 1.0, 7.0 / 3.0};

  // S assembled as a real 8x8 map from x Omega -> x* Omega; eigenvalues of R^T R come in pairs.
  Mat x(4, 4), xs(4, 4);
  for (int i = 0; i < 4; ++i) {
    x.col(i) = alg.basis()[static_cast<std::size_t>(i)] * om;
    xs.col(i) = alg.basis()[static_cast<std::size_t>(i)].adjoint() * om;
  }
  Eigen::MatrixXd r(8, 8);
  for (int k = 0; k < 8; ++k) {
    Vec e = Vec::Zero(4);
    e(k % 4) = k < 4 ? cplx(1, 0) : cplx(0, 1);
    const Vec s = xs * x.colPivHouseholderQr().solve(e).conjugate();
    r.col(k).head(4) = s.real();
    r.col(k).tail(4) = s.imag();
  }
  Eigen::VectorXd real = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r.transpose() * r).eigenvalues();
  std::sort(real.data(), real.data() + 8);

  double spec_err = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    spec_err = std::max(spec_err, std::abs(got[i] - want[i]));
    spec_err = std::max(spec_err, std::abs(real(static_cast<Eigen::Index>(2 * i)) - want[i]));
    spec_err = std::max(spec_err, std::abs(real(static_cast<Eigen::Index>(2 * i + 1)) - want[i]));
  }
  const auto axioms = modular_axioms_check(md, alg, om, default_t_grid(), axiom_tol);
  double worst_axiom = 0.0;
  std::string worst_name;
  for (const auto& c : axioms.checks)
    if (c.residual >= worst_axiom) {
      worst_axiom = c.residual;
      worst_name = c.name;
    }
  return {spec_err < spec_tol && axioms.passed(),
          fmt("spectrum {3/7,1,1,7/3} err %.2e < %.0e (engine and real-assembly oracle), %zu axioms max %.2e (%s) < %.0e",
              spec_err, spec_tol, axioms.checks.size(), worst_axiom, worst_name.c_str(), axiom_tol)};
}

Mat random_in(std::mt19937_64& rng, const std::vector<Mat>& basis) {
  std::normal_distribution<double> n;
  Mat x = Mat::Zero(basis.front().rows(), basis.front().cols());
  for (const auto& b : basis) x += cplx(n(rng), n(rng)) * b;
  return x;
}

void alternating_patterns(int k, int max_len, Word& prefix, std::vector<Word>& out) {
  if (!prefix.empty()) out.push_back(prefix);
  if (static_cast<int>(prefix.size()) == max_len) return;
  for (Label l = 1; l <= k; ++l) {
    if (!prefix.empty() && prefix.back() == l) continue;
    prefix.push_back(l);
    alternating_patterns(k, max_len, prefix, out);
    prefix.pop_back();
  }
}

// Residuals over every alternating pattern of length <= 3 and every t on the grid.
std::pair<double, std::size_t> star_sweep(std::mt19937_64& rng, const std::vector<SeedSpace>& seeds,
                                          const std::vector<MatrixAlgebra>& algebras) {
  const FockSpace fock(seeds, 3);
  std::map<Label, ModularData> data;
  for (std::size_t i = 0; i < seeds.size(); ++i) data.emplace(seeds[i].label(), tomita(algebras[i], seeds[i].omega()));
  const FreeModular fm(fock, data);
  std::vector<Word> patterns;
  Word prefix;
  alternating_patterns(static_cast<int>(seeds.size()), 3, prefix, patterns);
  double worst = 0.0;
  std::size_t count = 0;
  for (double t : default_t_grid())
    for (const auto& p : patterns) {
      std::vector<std::pair<Label, Mat>> factors;
      for (Label l : p) factors.emplace_back(l, random_in(rng, algebras[static_cast<std::size_t>(l - 1)].basis()));
      const StarResiduals r = fm.verify(make_moment_word(fock, factors), t);
      worst = std::max({worst, r.flow, r.s_identity});
      ++count;
    }
  return {worst, count};
}

Outcome free_modular_identities() {
  constexpr double tol = 1e-8;
  constexpr double time_limit = 120.0;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  double worst_small = 0.0, worst_m2 = 0.0;
  std::size_t words = 0;
  // seed dims <= 3: faithful states on (rotated) maximal abelian subalgebras
  for (int k : {2, 3})
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<SeedSpace> seeds;
      std::vector<MatrixAlgebra> algebras;
      for (int l = 1; l <= k; ++l) {
        const int d = uniform_int(rng, 2, 3);
        const Mat u = random_unitary(rng, d);
        std::vector<Mat> gens;
        for (int i = 0; i < d; ++i) gens.push_back(u * unit(d, i, i) * u.adjoint());
        Eigen::VectorXd w(d);
        for (int i = 0; i < d; ++i) w(i) = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
        w /= w.sum();
        seeds.emplace_back(l, u * w.cwiseSqrt().cast<cplx>());
        algebras.emplace_back(gens);
      }
      const auto [w, n] = star_sweep(rng, seeds, algebras);
      worst_small = std::max(worst_small, w);
      words += n;
    }
  // non-trivial modular flow: M_2 ⊗ 1 on C^4 with weights 0.3 / 0.7 and 0.6 / 0.4
  {
    const std::vector<SeedSpace> seeds{SeedSpace(1, entangled(0.3)), SeedSpace(2, entangled(0.6))};
    const std::vector<MatrixAlgebra> algebras{MatrixAlgebra(amplified(2)), MatrixAlgebra(amplified(2))};
    const auto [w, n] = star_sweep(rng, seeds, algebras);
    worst_m2 = w;
    words += n;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_small < tol && worst_m2 < tol && secs < time_limit,
          fmt("%zu (word, t) cases, dims<=3 max %.2e, M2(x)1 dim-4 max %.2e < %.0e, %.1fs < %.0fs", words, worst_small,
              worst_m2, tol, secs, time_limit)};
}

Outcome trace_bound() {
  const double e = std::exp(-1.0);
  const double eps_exact = e / (1 - e);
  const double bound_exact = 1 + 2 * eps_exact / (1 - eps_exact);
  const auto r = verify_trace_bound({{1, geometric_seed(1)}, {2, geometric_seed(2)}}, 1.0, 6, 60.0);
  bool monotone = true;
  for (std::size_t i = 1; i < r.series.size(); ++i)
    monotone = monotone && r.series[i].truncated_trace >= r.series[i - 1].truncated_trace;
  const double split = split_distance(geometric_seed(1), 2, 1e-9);
  const bool ok = std::abs(r.epsilon - 0.5820) < 5e-5 && std::abs(r.epsilon - eps_exact) < 1e-12 && r.conclusive() &&
                  std::abs(*r.closed_form_bound - 3.784) < 5e-4 && std::abs(*r.closed_form_bound - bound_exact) < 1e-12 &&
                  monotone && r.bound_holds() && std::abs(split - std::log(2.0)) < 1e-6;
  return {ok, fmt("eps %.6f, bound %.6f, trace(max_len 0..6) %.6f..%.6f monotone %s <= bound+1e-9, split %.9f vs ln2 "
                  "(tol 1e-6)",
                  r.epsilon, r.conclusive() ? *r.closed_form_bound : NAN, r.series.front().truncated_trace,
                  r.truncated_trace, monotone ? "yes" : "no", split)};
}

Outcome l2_series() {
  const auto half = l2_nuclearity_series({0.2, 0.3});
  const auto one = l2_nuclearity_series({0.5, 0.5});
  const auto more = l2_nuclearity_series({0.9, 0.4});
  const bool ok = half.bound && *half.bound == 2.0 && !one.bound && !more.bound;
  return {ok, fmt("{0.2,0.3} -> %.17g, {0.5,0.5} -> %s, {0.9,0.4} -> %s", half.bound ? *half.bound : NAN,
                  one.bound ? "finite" : "divergent", more.bound ? "finite" : "divergent")};
}

Outcome smatrix_suite() {
  constexpr double direct_tol = 1e-10, norm_tol = 1e-10, support_tol = 1e-3;
  constexpr double time_limit = 60.0;
  const auto start = std::chrono::steady_clock::now();
  const RapidityGrid fine;  // 2048 points
  const RapidityGrid coarse{fine.theta_min, fine.theta_max, 256};
  const auto f = WavePacket2D::on_shell(1.0, 0.8, 6.0);
  const auto g = WavePacket2D::on_shell(1.0, -0.8, 6.0);

  bool ok = precedes(g, f);
  // one-particle pieces on the full grid
  const auto fp = rapidity_transform(f, 1, fine);
  const SymmetricFock sf(fine, 1);
  const auto phi = apply_field(sf, fp, rapidity_transform(f, -1, fine), sf.vacuum());
  const double field = (phi.components[1] - fp.values).norm();
  ok = ok && field < direct_tol;

  double direct = 0.0;
  for (Direction d : {Direction::Out, Direction::In}) {
    const auto dr = direct_scattering_state(d, 1, 2, f, g, coarse);
    direct = std::max(direct, dr.residual);
    ok = ok && dr.exact;
  }
  const auto out = scattering_state(Direction::Out, 1, 2, f, g, coarse);
  const auto in = scattering_state(Direction::In, 1, 2, f, g, coarse);
  const cplx overlap = out.inner(in);
  const auto s_out = smatrix_apply(out);
  const double flip_err = std::max(std::abs(s_out.norm() - out.norm()) / out.norm(),
                                   (s_out.amplitude - in.amplitude).norm() / in.amplitude.norm());
  const auto diag_out = scattering_state(Direction::Out, 1, 1, f, g, coarse);
  const auto diag_in = scattering_state(Direction::In, 1, 1, f, g, coarse);
  const bool diag_identity = smatrix_apply(diag_out).amplitude == diag_out.amplitude &&
                             diag_out.amplitude == diag_in.amplitude;

  // support condition over pairs whose velocity supports are at least 0.5 apart
  double worst_support = 0.0;
  int swept = 0;
  for (double a = 0.2; a <= 2.0; a += 0.2)
    for (double spread : {4.0, 6.0, 8.0}) {
      const auto fa = WavePacket2D::on_shell(1.0, a, spread);
      const auto ga = WavePacket2D::on_shell(1.0, -a, spread);
      if (velocity_support(fa).min - velocity_support(ga).max < 0.5) continue;
      worst_support = std::max(worst_support, support_condition_check(fa, ga, fine));
      ++swept;
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && direct < direct_tol && overlap == cplx(0.0) && flip_err < norm_tol && diag_identity && swept > 0 &&
       worst_support < support_tol && secs < time_limit;
  return {ok, fmt("field %.1e, direct %.2e < %.0e, <out,in> = %g exactly, flip %.1e < %.0e, diagonal identity %s, "
                  "support %.1e < %.0e over %d pairs, %.1fs < %.0fs",
                  field, direct, direct_tol, std::abs(overlap), flip_err, norm_tol, diag_identity ? "yes" : "no",
                  worst_support, support_tol, swept, secs, time_limit)};
}

Outcome claim6_suite() {
  constexpr double tol = 1e-10;
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = uniform_int(rng, 2, 3);
    const int n = uniform_int(rng, 1, 3);
    const FockSpace fock(random_seeds(rng, k, 2, 4), n + 1);
    std::set<Label> k1;
    for (int l = 1; l < k; ++l) k1.insert(l);
    std::vector<std::pair<Label, Mat>> xs;
    for (int i = 0; i < n; ++i) {
      const Label l = uniform_int(rng, 1, k - 1);
      xs.emplace_back(l, random_matrix(rng, fock.seed(l).dim()));
    }
    const Mat a = fock.seed(k).centered(random_matrix(rng, fock.seed(k).dim()));
    worst = std::max(worst, std::abs(claim6_orthogonality(fock, k1, make_moment_word(fock, xs), k, a)));
  }
  return {worst < tol, fmt("1000 instances, max |<aE(x)Omega, E(x)aOmega>| %.2e < %.0e", worst, tol)};
}

Outcome gamma_proxy() {
  bool ok = true;
  int zero_rows = 0, rows = 0;
  const std::vector<std::tuple<int, int, int>> shapes = {{16, 4, 8}, {20, 5, 8}, {12, 2, 5}};
  for (const auto& [size, b, e] : shapes) {
    const int gap = e - b;
    const std::map<Label, GammaModel> models{{1, truncated_shift(size, b, e)}, {2, truncated_shift(size, b, e)}};
    const auto table = gamma_decay_probe(models, 2, size);
    ok = ok && table.monotone && table.n_computed >= gap;
    for (const auto& row : table.rows) {
      ++rows;
      if (row.n >= gap) {
        ok = ok && row.sup_entry == 0.0;
        ++zero_rows;
      } else {
        ok = ok && row.sup_entry == 1.0;
      }
    }
  }
  return {ok, fmt("%d rows over 3 shift shapes, %d rows past the index gap all exactly 0, nonincreasing", rows,
                  zero_rows)};
}

Outcome spectrum_oracle() {
  constexpr double tol = 1e-10;
  std::mt19937_64 rng(10);
  double worst = 0.0;
  int spaces = 0;
  std::size_t largest = 0;
  bool sizes_ok = true;
  for (int trial = 0; trial < 40; ++trial) {
    const int k = uniform_int(rng, 1, 3);
    std::vector<SeedSpace> seeds;
    std::map<Label, Mat> hams;
    std::map<Label, SpectrumModel> specs;
    for (int l = 1; l <= k; ++l) {
      const int d = uniform_int(rng, 2, 3);
      const SeedSpace s(l, random_unit(rng, d));
      Eigen::VectorXd diag(d);
      diag(0) = 0.0;
      std::vector<Level> levels;
      for (int i = 1; i < d; ++i) {
        diag(i) = 0.5 * uniform_int(rng, 1, 4);
        levels.push_back({diag(i), 1});
      }
      hams[l] = s.adapted_basis() * diag.cast<cplx>().asDiagonal() * s.adapted_basis().adjoint();
      specs.emplace(l, SpectrumModel(l, levels));
      seeds.push_back(s);
    }
    int len = uniform_int(rng, 1, 4);
    while (len > 1 && FockSpace(seeds, len).total_dim() > 200) --len;
    const FockSpace fock(seeds, len);
    if (fock.total_dim() > 200) continue;
    largest = std::max(largest, fock.total_dim());
    const Mat h = star_sum(fock, hams).dense(fock).matrix;
    Eigen::VectorXd direct = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (h + h.adjoint())).eigenvalues();
    std::sort(direct.data(), direct.data() + direct.size());
    std::vector<double> predicted{0.0};
    const SpectrumModel fp = free_product_spectrum(specs, len, 1e6);
    for (const auto& l : fp.levels())
      for (std::uint64_t m = 0; m < l.multiplicity; ++m) predicted.push_back(l.energy);
    if (predicted.size() != static_cast<std::size_t>(direct.size())) {
      sizes_ok = false;
      continue;
    }
    for (std::size_t i = 0; i < predicted.size(); ++i)
      worst = std::max(worst, std::abs(predicted[i] - direct(static_cast<Eigen::Index>(i))));
    ++spaces;
  }
  return {sizes_ok && worst < tol,
          fmt("%d Fock spaces (largest dim %zu <= 200), max level error %.2e < %.0e", spaces, largest, worst, tol)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"free independence suite", free_independence_suite},
      {"commutation relation suite", commutation_suite},
      {"modular engine oracle", modular_oracle},
      {"free-product modular identities", free_modular_identities},
      {"trace bound reproduction", trace_bound},
      {"L2-nuclearity series", l2_series},
      {"S-matrix suite", smatrix_suite},
      {"centered orthogonality", claim6_suite},
      {"gamma-decay proxy", gamma_proxy},
      {"brute-force spectrum oracle", spectrum_oracle},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  [%2zu] %-32s %s  (%.2fs)\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.passed) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
