#pragma once

#include <map>
#include <utility>

#include "freeprod/fock.hpp"
#include "freeprod/semilinear.hpp"

namespace freeprod {

/// Sector-block operator on a FockSpace.
///
/// Block (source, target) maps coordinates of sector `source` into sector
/// `target`. Antilinear operators keep a linear block and conjugate the
/// input coordinates first, in the same way as SemilinearMap.
class FreeOperator {
 public:
  using Key = std::pair<Word, Word>;

  FreeOperator(std::map<Key, Mat> blocks, bool antilinear, bool exact = true);

  const std::map<Key, Mat>& blocks() const { return blocks_; }
  bool antilinear() const { return antilinear_; }
  bool exact() const { return exact_; }

  Vec apply(const FockSpace& fock, const Vec& v) const;

  // (this ∘ rhs)
  FreeOperator compose(const FreeOperator& rhs) const;

  SemilinearMap dense(const FockSpace& fock) const;

  // Largest spectral norm over blocks.
  double max_block_norm() const;

 private:
  std::map<Key, Mat> blocks_;
  bool antilinear_;
  bool exact_;
};

/// ⋆-operator: T_Omega ⊕ (⊕_w T°_w1 ⊗ ... ⊗ T°_wn).
///
/// Each T_k must leave H°_k invariant (checked to 1e-10). Labels absent from
/// `ops` use the identity (linear case only). T_Omega is 1 for linear input
/// and complex conjugation for antilinear input. No norm bound is imposed.
FreeOperator star_operator(const FockSpace& fock, const std::map<Label, SemilinearMap>& ops);
FreeOperator star_operator(const FockSpace& fock, const std::map<Label, Mat>& ops);

/// Sector-wise sum H°_w1 ⊗ 1 ⊗ ... + ... + 1 ⊗ ... ⊗ H°_wn, zero on the vacuum:
/// the generator of t -> ⋆exp(itH_k).
FreeOperator star_sum(const FockSpace& fock, const std::map<Label, Mat>& generators);

// Z as a sector-permutation operator.
FreeOperator z_operator(const FockSpace& fock);

// Reduced block T° of a seed operator in the reduced basis, after checking
// T H° ⊆ H°.
Mat reduced_block(const SeedSpace& seed, const SemilinearMap& t);

}  // namespace freeprod
