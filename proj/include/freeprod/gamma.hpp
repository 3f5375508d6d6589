#pragma once

#include <map>
#include <vector>

#include "freeprod/common.hpp"

namespace freeprod {

// Column norms of interior powers must stay within this of 1.
inline constexpr double kIsometryTolerance = 1e-12;

/// Finite model of a reduced endomorphism on one seed: a square matrix and a
/// window [window_begin, window_end) of indices treated as boundary-free.
struct GammaModel {
  Mat gamma_reduced;
  int window_begin = 0;
  int window_end = 0;

  int window_size() const { return window_end - window_begin; }
};

// Truncated bilateral shift on C^size (e_j -> e_{j+1}, last column zero)
// with the given interior window.
GammaModel truncated_shift(int size, int window_begin, int window_end);

// Largest |entry| of M restricted to rows and columns in the window.
double interior_sup(const Mat& m, int window_begin, int window_end);

struct GammaRow {
  int n = 0;
  Word word;
  double sup_entry = 0.0;
};

struct GammaDecayTable {
  std::vector<GammaRow> rows;  // ordered by n, then by sector
  int n_max = 0;               // as requested
  int n_computed = 0;          // last n in the table
  int horizon = 0;             // largest n with isometric interior columns for every model
  bool truncated = false;      // n_max > horizon
  bool monotone = true;        // sup(n+1) <= sup(n) + 1e-12 for every word
  // Labels whose single-letter sup does not drop between n = 1 and n_computed.
  std::vector<Label> no_decay;
  bool hypothesis_failure() const { return !no_decay.empty(); }
};

/// Interior sup-entries of (Γ°_k1 ⊗ ... ⊗ Γ°_km)^n over the alternating words of
/// length 1..max_len in the labels of `models`, for n = 0..n_max.
///
/// Since (A ⊗ B)^n = A^n ⊗ B^n, the windowed sup over a tensor sector is the
/// product of the per-factor windowed sups. Rows past the boundary-free
/// horizon are not computed; `truncated` records that.
GammaDecayTable gamma_decay_probe(const std::map<Label, GammaModel>& models, int max_len, int n_max);

}  // namespace freeprod
