#pragma once

// Generators and brute-force oracles shared by the test binaries.

#include <map>
#include <random>
#include <vector>

#include "freeprod/fock.hpp"

namespace freeprod::testing {

inline Mat random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

inline Vec random_vector(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = cplx(n(rng), n(rng));
  return v;
}

inline Vec random_unit(std::mt19937_64& rng, int d) {
  Vec v = random_vector(rng, d);
  return v / v.norm();
}

inline Mat random_unitary(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(rng, d));
  return qr.householderQ() * Mat::Identity(d, d);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Seeds with labels 1..k, dims drawn from [min_dim, max_dim], random omega.
inline std::vector<SeedSpace> random_seeds(std::mt19937_64& rng, int k, int min_dim, int max_dim) {
  std::vector<SeedSpace> seeds;
  for (int l = 1; l <= k; ++l) seeds.emplace_back(l, random_unit(rng, uniform_int(rng, min_dim, max_dim)));
  return seeds;
}

// Random vector supported on sectors whose word length is at most max_word.
inline Vec random_vector_up_to(std::mt19937_64& rng, const FockSpace& fock, int max_word) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(fock.total_dim()));
  for (const auto& s : fock.sectors())
    if (static_cast<int>(s.word.size()) <= max_word)
      v.segment(static_cast<Eigen::Index>(s.offset), static_cast<Eigen::Index>(s.dim)) =
          random_vector(rng, static_cast<Eigen::Index>(s.dim));
  return v;
}

/// Left action computed one basis tensor at a time from the defining rules:
/// prepend (T Omega) when the first letter differs, absorb into the first
/// factor otherwise. Shares only the coordinate convention with the library.
inline Vec oracle_lambda(const FockSpace& fock, Label k, const Mat& t, const Vec& v) {
  const SeedSpace& seed = fock.seed(k);
  const Mat& red = seed.reduced_basis();
  const Vec& om = seed.omega();
  const int r = seed.reduced_dim();
  Vec out = Vec::Zero(v.size());

  for (const auto& s : fock.sectors()) {
    const auto rad = fock.radices(s.word);
    for (std::size_t flat = 0; flat < s.dim; ++flat) {
      const cplx c = v(static_cast<Eigen::Index>(s.offset + flat));
      if (c == cplx(0.0)) continue;
      std::vector<int> idx(rad.size());
      std::size_t rem = flat;
      for (std::size_t j = rad.size(); j-- > 0;) {
        idx[j] = static_cast<int>(rem % static_cast<std::size_t>(rad[j]));
        rem /= static_cast<std::size_t>(rad[j]);
      }
      auto put = [&](const Word& w, const std::vector<int>& digits, cplx amount) {
        if (static_cast<int>(w.size()) > fock.max_len()) return;
        const Sector& target = fock.sector(w);
        const auto trad = fock.radices(w);
        std::size_t f = 0;
        for (std::size_t j = 0; j < digits.size(); ++j) f = f * static_cast<std::size_t>(trad[j]) + static_cast<std::size_t>(digits[j]);
        out(static_cast<Eigen::Index>(target.offset + f)) += amount;
      };
      if (s.word.empty() || s.word.front() != k) {
        const Vec y = t * om;
        put(s.word, idx, c * om.dot(y));
        Word w = s.word;
        w.insert(w.begin(), k);
        for (int a = 0; a < r; ++a) {
          std::vector<int> d = idx;
          d.insert(d.begin(), a);
          put(w, d, c * red.col(a).dot(y));
        }
      } else {
        const Vec y = t * red.col(idx[0]);
        Word tail(s.word.begin() + 1, s.word.end());
        std::vector<int> tidx(idx.begin() + 1, idx.end());
        put(tail, tidx, c * om.dot(y));
        for (int a = 0; a < r; ++a) {
          std::vector<int> d = idx;
          d[0] = a;
          put(s.word, d, c * red.col(a).dot(y));
        }
      }
    }
  }
  return out;
}

}  // namespace freeprod::testing
