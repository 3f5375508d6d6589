#include "freeprod/freeness.hpp"

#include <algorithm>
#include <random>

namespace freeprod {

Word MomentWord::letters() const {
  Word w;
  w.reserve(factors.size());
  for (const auto& f : factors) w.push_back(f.label);
  return w;
}

MomentWord make_moment_word(const FockSpace& fock,
                            const std::vector<std::pair<Label, Mat>>& factors) {
  MomentWord w;
  for (const auto& [label, x] : factors) {
    const SeedSpace& s = fock.seed(label);
    if (x.rows() != s.dim() || x.cols() != s.dim())
      throw Error(ErrorCode::InvalidArgument,
                  "moment word: factor at label " + std::to_string(label) + " has wrong shape");
    w.factors.push_back({label, x, std::abs(s.expectation(x)) < kCenteringTolerance});
  }
  return w;
}

cplx vacuum_expectation(const FockSpace& fock, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != fock.total_dim())
    throw Error(ErrorCode::InvalidArgument, "vacuum_expectation: vector length mismatch");
  return v(0);
}

StateValue moment(const FockSpace& fock, const MomentWord& w) {
  const int n = static_cast<int>(w.size());
  Vec acc = fock.vacuum();
  bool exact = true;
  int applied = 0;
  for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it) {
    Applied step = lambda_act(fock, it->label, it->x, acc);
    ++applied;
    // A component dropped at length max_len + 1 needs as many further
    // factors to come back to the vacuum.
    if (!step.exact && n - applied >= fock.max_len() + 1) exact = false;
    acc = std::move(step.vector);
  }
  return {vacuum_expectation(fock, acc), exact};
}

FreenessReport check_free_independence(const FockSpace& fock,
                                       const std::map<Label, std::vector<Mat>>& families,
                                       std::size_t trials, double tol, std::uint64_t prng_seed,
                                       bool keep_residuals) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "check_free_independence: tol must be positive");

  FreenessReport report;
  report.prng_seed = prng_seed;
  report.trials = trials;
  report.tolerance = tol;

  std::map<Label, std::vector<Mat>> centered;
  for (const auto& [label, gens] : families) {
    const SeedSpace& s = fock.seed(label);
    auto& out = centered[label];
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const cplx shift = s.expectation(gens[i]);
      if (std::abs(shift) >= kCenteringTolerance) report.centering_shifts.push_back({label, i, shift});
      out.push_back(s.centered(gens[i]));
    }
    if (out.empty()) centered.erase(label);
  }
  if (trials == 0 || centered.empty()) return report;

  std::vector<Label> labels;
  for (const auto& [label, gens] : centered) labels.push_back(label);
  const int max_len = labels.size() == 1 ? 1 : fock.max_len();

  std::mt19937_64 rng(prng_seed);
  std::uniform_int_distribution<int> length_dist(1, max_len);

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const int len = length_dist(rng);
    std::vector<std::pair<Label, Mat>> factors;
    Label prev = 0;
    for (int j = 0; j < len; ++j) {
      std::vector<Label> allowed;
      for (Label l : labels)
        if (j == 0 || l != prev) allowed.push_back(l);
      std::uniform_int_distribution<std::size_t> pick_label(0, allowed.size() - 1);
      const Label l = allowed[pick_label(rng)];
      const auto& gens = centered.at(l);
      std::uniform_int_distribution<std::size_t> pick_gen(0, gens.size() - 1);
      factors.emplace_back(l, gens[pick_gen(rng)]);
      prev = l;
    }
    const MomentWord word = make_moment_word(fock, factors);
    const StateValue value = moment(fock, word);
    const double residual = std::abs(value.value);
    if (keep_residuals) report.residuals.push_back({word.letters(), residual, value.exact});
    if (!value.exact) {
      ++report.excluded_inexact;
      continue;
    }
    ++report.sampled;
    if (report.worst_word.empty() || residual > report.max_residual) {
      report.max_residual = residual;
      report.worst_word = word.letters();
    }
  }
  report.passed = report.max_residual < tol;
  return report;
}

Vec conditional_expectation_vector(const FockSpace& fock, const std::set<Label>& k1, const Vec& v) {
  if (k1.empty()) throw Error(ErrorCode::InvalidArgument, "conditional expectation: K1 must be nonempty");
  for (Label l : k1) fock.seed(l);
  if (static_cast<std::size_t>(v.size()) != fock.total_dim())
    throw Error(ErrorCode::InvalidArgument, "conditional expectation: vector length mismatch");
  return fock.project(v, [&k1](const Word& w) {
    return std::all_of(w.begin(), w.end(), [&k1](Label l) { return k1.count(l) > 0; });
  });
}

namespace {

Applied apply_word(const FockSpace& fock, const MomentWord& w, Vec v) {
  bool exact = true;
  for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it) {
    Applied step = lambda_act(fock, it->label, it->x, v);
    exact = exact && step.exact;
    v = std::move(step.vector);
  }
  return {std::move(v), exact};
}

}  // namespace

cplx claim6_orthogonality(const FockSpace& fock, const std::set<Label>& k1,
                          const MomentWord& x_word, Label a_label, const Mat& a) {
  for (const auto& f : x_word.factors)
    if (!k1.count(f.label))
      throw Error(ErrorCode::InvalidArgument,
                  "claim6: x uses label " + std::to_string(f.label) + " outside K1");
  if (k1.count(a_label))
    throw Error(ErrorCode::InvalidArgument, "claim6: a must sit at a label outside K1");
  const SeedSpace& s = fock.seed(a_label);
  if (a.rows() != s.dim() || a.cols() != s.dim())
    throw Error(ErrorCode::InvalidArgument, "claim6: a has wrong shape");
  if (std::abs(s.expectation(a)) >= kCenteringTolerance)
    throw Error(ErrorCode::InvalidArgument, "claim6: a is not centered");

  const Vec omega = fock.vacuum();
  const Applied x_omega = apply_word(fock, x_word, omega);
  const cplx mean = vacuum_expectation(fock, x_omega.vector);

  // E(x_c) Omega with x_c = x - omega(x) 1
  const Vec ex_omega = conditional_expectation_vector(fock, k1, x_omega.vector - mean * omega);
  const Applied left = lambda_act(fock, a_label, a, ex_omega);

  // E(x_c) lambda(a) Omega = x lambda(a) Omega - omega(x) lambda(a) Omega, since x ∈ M_K1
  const Applied a_omega = lambda_act(fock, a_label, a, omega);
  const Applied x_a_omega = apply_word(fock, x_word, a_omega.vector);
  const Vec right = x_a_omega.vector - mean * a_omega.vector;

  if (!(x_omega.exact && left.exact && a_omega.exact && x_a_omega.exact))
    throw Error(ErrorCode::Truncation, "claim6: word too long for max_len " +
                                           std::to_string(fock.max_len()));
  return left.vector.dot(right);
}

Eq31Probe eq31_inequality_probe(const FockSpace& fock, Label label, const Mat& a, const Mat& b,
                                const Vec& x_vector, double x_norm) {
  const SeedSpace& s = fock.seed(label);
  if (a.rows() != s.dim() || a.cols() != s.dim() || b.rows() != s.dim() || b.cols() != s.dim())
    throw Error(ErrorCode::InvalidArgument, "eq31 probe: a and b must act on the seed space");
  if (std::abs(s.expectation(a)) >= kCenteringTolerance)
    throw Error(ErrorCode::InvalidArgument, "eq31 probe: a is not centered");
  if (static_cast<std::size_t>(x_vector.size()) != fock.total_dim())
    throw Error(ErrorCode::InvalidArgument, "eq31 probe: x vector length mismatch");
  Eq31Probe p;
  p.lhs = (a * s.omega()).norm() * x_vector.norm();
  p.rhs = 2.0 * x_norm * ((a - b) * s.omega()).norm();
  return p;
}

}  // namespace freeprod
