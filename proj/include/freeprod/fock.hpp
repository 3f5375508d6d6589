#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "freeprod/common.hpp"
#include "freeprod/seed.hpp"

namespace freeprod {

struct Sector {
  Word word;
  std::size_t dim = 0;
  std::size_t offset = 0;
};

/// Truncated free product of pointed Hilbert spaces.
///
/// The space is C·Omega ⊕ (⊕ over alternating words w, 1 <= |w| <= max_len)
/// of H°_w1 ⊗ ... ⊗ H°_wn. Sector 0 is the vacuum (empty word, offset 0).
/// Sectors are ordered by length, then lexicographically in the labels.
/// Inside a sector the coordinates are tensor products of the seeds'
/// reduced bases, with the first letter most significant.
///
/// Immutable after construction; all actions are free functions below.
class FockSpace {
 public:
  FockSpace(std::vector<SeedSpace> seeds, int max_len);

  const std::vector<SeedSpace>& seeds() const { return seeds_; }
  const SeedSpace& seed(Label label) const;
  bool has_label(Label label) const;
  std::vector<Label> labels() const;

  int max_len() const { return max_len_; }
  std::size_t total_dim() const { return total_dim_; }
  const std::vector<Sector>& sectors() const { return sectors_; }

  std::optional<std::size_t> sector_index(const Word& w) const;
  const Sector& sector(const Word& w) const;

  // Vacuum vector Omega.
  Vec vacuum() const;

  // Per-letter reduced dimensions of a word.
  std::vector<int> radices(const Word& w) const;

  // Orthogonal projection onto the sectors whose word satisfies `keep`.
  template <class Pred>
  Vec project(const Vec& v, Pred keep) const {
    Vec out = Vec::Zero(v.size());
    for (const auto& s : sectors_)
      if (keep(s.word)) out.segment(s.offset, s.dim) = v.segment(s.offset, s.dim);
    return out;
  }

  // Embeds c_1 ⊗ ... ⊗ c_n (reduced-basis coordinates per letter) into the space.
  Vec basis_tensor(const Word& w, const std::vector<Vec>& factors) const;

 private:
  std::vector<SeedSpace> seeds_;
  int max_len_;
  std::vector<Sector> sectors_;
  std::map<Word, std::size_t> index_;
  std::size_t total_dim_ = 0;
};

struct Applied {
  Vec vector;
  bool exact = true;
};

// Left action lambda_k(T). Components that would need a word longer than
// max_len are dropped and reported through `exact`.
Applied lambda_act(const FockSpace& fock, Label k, const Mat& t, const Vec& v);

// Right action rho_k(T) = Z lambda_k(T) Z.
Applied rho_act(const FockSpace& fock, Label k, const Mat& t, const Vec& v);

// Z: reverses every word together with its tensor factors.
Vec z_involution(const FockSpace& fock, const Vec& v);

// lambda_k1(x1) ... lambda_kn(xn) Omega, applied right to left.
Applied free_word_vector(const FockSpace& fock,
                         const std::vector<std::pair<Label, Mat>>& factors);

// ||[lambda_k(T), rho_k'(T')] v - delta_{kk'} (P_Omega + P_(k)) lambda_k([T, T']) v||.
// v must live on words of length <= max_len - 2, where no action truncates.
double commutation_residual(const FockSpace& fock, Label k, const Mat& t, Label k_prime,
                            const Mat& t_prime, const Vec& v);

// Number of alternating words of length n over k letters: k (k-1)^(n-1).
std::size_t alternating_word_count(std::size_t k, std::size_t n);

}  // namespace freeprod
