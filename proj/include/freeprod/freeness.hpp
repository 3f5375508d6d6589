#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "freeprod/fock.hpp"

namespace freeprod {

struct StateValue {
  cplx value;
  bool exact = true;
};

struct MomentFactor {
  Label label;
  Mat x;
  bool centered = false;
};

// Product lambda_k1(x1) ... lambda_kn(xn), read left to right.
struct MomentWord {
  std::vector<MomentFactor> factors;

  Word letters() const;
  std::size_t size() const { return factors.size(); }
};

// Builds a word and fills in the centered flags against the seeds of `fock`.
MomentWord make_moment_word(const FockSpace& fock, const std::vector<std::pair<Label, Mat>>& factors);

// <Omega, v>
cplx vacuum_expectation(const FockSpace& fock, const Vec& v);

/// omega(lambda_k1(x1) ... lambda_kn(xn)).
///
/// `exact` is false only when a dropped component could have reached the
/// vacuum coordinate; words of length <= 2 max_len + 1 are always exact.
StateValue moment(const FockSpace& fock, const MomentWord& w);

struct WordResidual {
  Word letters;
  double residual = 0.0;
  bool exact = true;
};

struct FreenessReport {
  std::uint64_t prng_seed = 0;
  std::size_t trials = 0;
  std::size_t sampled = 0;
  std::size_t excluded_inexact = 0;
  double tolerance = 0.0;
  double max_residual = 0.0;
  Word worst_word;
  bool passed = true;
  // Generators shifted by -omega_k(x) before sampling: (label, index, shift).
  struct Shift {
    Label label;
    std::size_t generator;
    cplx shift;
  };
  std::vector<Shift> centering_shifts;
  std::vector<WordResidual> residuals;
};

/// Samples `trials` random alternating words of length 1..max_len built from
/// centered copies of the generators and records |omega(word)|.
FreenessReport check_free_independence(const FockSpace& fock,
                                       const std::map<Label, std::vector<Mat>>& families,
                                       std::size_t trials, double tol, std::uint64_t prng_seed,
                                       bool keep_residuals = false);

/// Orthogonal projection onto C·Omega ⊕ (sectors whose letters all lie in k1).
/// At vector level this is E_K1(x) Omega = P_K1 x Omega, i.e. the Jones projection.
Vec conditional_expectation_vector(const FockSpace& fock, const std::set<Label>& k1, const Vec& v);

/// <lambda(a) E(x) Omega, E(x) lambda(a) Omega> for x the centered product
/// `x_word - omega(x_word)` over K1 and a centered element at label `a_label`
/// outside K1. Free independence forces zero.
cplx claim6_orthogonality(const FockSpace& fock, const std::set<Label>& k1,
                          const MomentWord& x_word, Label a_label, const Mat& a);

struct Eq31Probe {
  double lhs = 0.0;  // ||a Omega_0|| ||x Omega||
  double rhs = 0.0;  // 2 ||x|| ||(a - b) Omega_0||
  bool holds() const { return lhs <= rhs; }
};

// Evaluates both sides of the relative-commutant inequality for a candidate
// x given through x Omega and its operator norm.
Eq31Probe eq31_inequality_probe(const FockSpace& fock, Label label, const Mat& a, const Mat& b,
                                const Vec& x_vector, double x_norm);

}  // namespace freeprod
