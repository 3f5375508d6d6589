#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace freeprod {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Seed labels. Sector ordering is lexicographic in this type.
using Label = int;

// A word (k1, ..., kn) labels the sector H°_k1 ⊗ ... ⊗ H°_kn; the empty word
// is the vacuum line.
using Word = std::vector<Label>;

enum class ErrorCode {
  InvalidArgument,
  NotCyclic,
  NotSeparating,
  RankDeficient,
  Truncation,
  DomainViolation,
  Divergent,
  Parse,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// |<Omega_k, x Omega_k>| below this marks x as centered.
inline constexpr double kCenteringTolerance = 1e-12;

std::string word_to_string(const Word& w);

bool is_alternating(const Word& w);

}  // namespace freeprod
