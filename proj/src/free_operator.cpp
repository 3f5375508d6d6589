#include "freeprod/free_operator.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace freeprod {

namespace {

constexpr double kInvarianceTolerance = 1e-10;

Mat kron_chain(const std::vector<const Mat*>& factors) {
  Mat acc = Mat::Ones(1, 1);
  for (const Mat* f : factors) acc = Eigen::kroneckerProduct(acc, *f).eval();
  return acc;
}

}  // namespace

FreeOperator::FreeOperator(std::map<Key, Mat> blocks, bool antilinear, bool exact)
    : blocks_(std::move(blocks)), antilinear_(antilinear), exact_(exact) {}

Vec FreeOperator::apply(const FockSpace& fock, const Vec& v) const {
  if (static_cast<std::size_t>(v.size()) != fock.total_dim())
    throw Error(ErrorCode::InvalidArgument, "FreeOperator::apply: vector length mismatch");
  const Vec in = antilinear_ ? Vec(v.conjugate()) : v;
  Vec out = Vec::Zero(v.size());
  for (const auto& [key, m] : blocks_) {
    const Sector& src = fock.sector(key.first);
    const Sector& dst = fock.sector(key.second);
    if (static_cast<std::size_t>(m.cols()) != src.dim || static_cast<std::size_t>(m.rows()) != dst.dim)
      throw Error(ErrorCode::InvalidArgument,
                  "FreeOperator block " + word_to_string(key.first) + "->" +
                      word_to_string(key.second) + " has wrong shape");
    out.segment(dst.offset, dst.dim).noalias() += m * in.segment(src.offset, src.dim);
  }
  return out;
}

FreeOperator FreeOperator::compose(const FreeOperator& rhs) const {
  std::map<Key, Mat> result;
  for (const auto& [rk, rm] : rhs.blocks_) {
    for (const auto& [lk, lm] : blocks_) {
      if (lk.first != rk.second) continue;
      Mat prod = antilinear_ ? Mat(lm * rm.conjugate()) : Mat(lm * rm);
      Key key{rk.first, lk.second};
      auto it = result.find(key);
      if (it == result.end())
        result.emplace(std::move(key), std::move(prod));
      else
        it->second += prod;
    }
  }
  return FreeOperator(std::move(result), antilinear_ != rhs.antilinear_, exact_ && rhs.exact_);
}

SemilinearMap FreeOperator::dense(const FockSpace& fock) const {
  const auto n = static_cast<Eigen::Index>(fock.total_dim());
  Mat m = Mat::Zero(n, n);
  for (const auto& [key, b] : blocks_) {
    const Sector& src = fock.sector(key.first);
    const Sector& dst = fock.sector(key.second);
    m.block(dst.offset, src.offset, dst.dim, src.dim) = b;
  }
  return {std::move(m), antilinear_};
}

double FreeOperator::max_block_norm() const {
  double best = 0.0;
  for (const auto& [key, m] : blocks_) {
    if (m.size() == 0) continue;
    Eigen::JacobiSVD<Mat> svd(m);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

Mat reduced_block(const SeedSpace& seed, const SemilinearMap& t) {
  const Mat th = seed.to_adapted(t);
  const Eigen::Index r = seed.reduced_dim();
  if (r > 0 && th.row(0).tail(r).norm() > kInvarianceTolerance)
    throw Error(ErrorCode::InvalidArgument,
                "operator on seed " + std::to_string(seed.label()) +
                    " does not preserve the reduced space");
  return th.bottomRightCorner(r, r);
}

FreeOperator star_operator(const FockSpace& fock, const std::map<Label, SemilinearMap>& ops) {
  if (ops.empty()) throw Error(ErrorCode::InvalidArgument, "star_operator: no operators given");
  const bool antilinear = ops.begin()->second.antilinear;
  for (const auto& [label, op] : ops) {
    if (op.antilinear != antilinear)
      throw Error(ErrorCode::InvalidArgument, "star_operator: mixed linear and antilinear input");
    fock.seed(label);
  }

  std::map<Label, Mat> reduced;
  for (const auto& s : fock.seeds()) {
    auto it = ops.find(s.label());
    if (it == ops.end()) {
      if (antilinear)
        throw Error(ErrorCode::InvalidArgument,
                    "star_operator: antilinear input needs every label; missing " +
                        std::to_string(s.label()));
      reduced.emplace(s.label(), Mat::Identity(s.reduced_dim(), s.reduced_dim()));
    } else {
      reduced.emplace(s.label(), reduced_block(s, it->second));
    }
  }

  std::map<FreeOperator::Key, Mat> blocks;
  std::vector<const Mat*> factors;
  for (const auto& sec : fock.sectors()) {
    factors.clear();
    for (Label l : sec.word) factors.push_back(&reduced.at(l));
    blocks.emplace(FreeOperator::Key{sec.word, sec.word}, kron_chain(factors));
  }
  return FreeOperator(std::move(blocks), antilinear);
}

FreeOperator star_operator(const FockSpace& fock, const std::map<Label, Mat>& ops) {
  std::map<Label, SemilinearMap> lifted;
  for (const auto& [label, m] : ops) lifted.emplace(label, SemilinearMap::linear(m));
  return star_operator(fock, lifted);
}

FreeOperator star_sum(const FockSpace& fock, const std::map<Label, Mat>& generators) {
  std::map<Label, Mat> reduced;
  for (const auto& s : fock.seeds()) {
    auto it = generators.find(s.label());
    reduced.emplace(s.label(), it == generators.end()
                                   ? Mat(Mat::Zero(s.reduced_dim(), s.reduced_dim()))
                                   : reduced_block(s, SemilinearMap::linear(it->second)));
  }
  std::map<FreeOperator::Key, Mat> blocks;
  std::vector<Mat> identities;
  std::vector<const Mat*> factors;
  for (const auto& sec : fock.sectors()) {
    Mat sum = Mat::Zero(static_cast<Eigen::Index>(sec.dim), static_cast<Eigen::Index>(sec.dim));
    identities.clear();
    for (Label l : sec.word) {
      const int r = fock.seed(l).reduced_dim();
      identities.push_back(Mat::Identity(r, r));
    }
    for (std::size_t j = 0; j < sec.word.size(); ++j) {
      factors.clear();
      for (std::size_t i = 0; i < sec.word.size(); ++i)
        factors.push_back(i == j ? &reduced.at(sec.word[i]) : &identities[i]);
      sum += kron_chain(factors);
    }
    blocks.emplace(FreeOperator::Key{sec.word, sec.word}, std::move(sum));
  }
  return FreeOperator(std::move(blocks), false);
}

FreeOperator z_operator(const FockSpace& fock) {
  std::map<FreeOperator::Key, Mat> blocks;
  for (const auto& sec : fock.sectors()) {
    Word reversed(sec.word.rbegin(), sec.word.rend());
    const auto n = static_cast<Eigen::Index>(sec.dim);
    Mat p = Mat::Zero(n, n);
    const auto rad = fock.radices(sec.word);
    // Column j is Z applied to the j-th basis vector of the sector.
    std::vector<std::size_t> digits(rad.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      std::size_t rem = static_cast<std::size_t>(j);
      for (std::size_t i = rad.size(); i-- > 0;) {
        digits[i] = rem % rad[i];
        rem /= rad[i];
      }
      std::size_t rj = 0;
      for (std::size_t i = rad.size(); i-- > 0;) rj = rj * rad[i] + digits[i];
      p(static_cast<Eigen::Index>(rj), j) = 1.0;
    }
    blocks.emplace(FreeOperator::Key{sec.word, reversed}, std::move(p));
  }
  return FreeOperator(std::move(blocks), false);
}

}  // namespace freeprod
