#include "freeprod/fock.hpp"

#include <algorithm>
#include <set>

namespace freeprod {

namespace {

// Relative size below which a dropped component counts as rounding noise.
constexpr double kDropTolerance = 1e-13;

}  // namespace

std::size_t alternating_word_count(std::size_t k, std::size_t n) {
  if (n == 0) return 1;
  std::size_t count = k;
  for (std::size_t j = 1; j < n; ++j) count *= (k - 1);
  return count;
}

FockSpace::FockSpace(std::vector<SeedSpace> seeds, int max_len)
    : seeds_(std::move(seeds)), max_len_(max_len) {
  if (seeds_.empty()) throw Error(ErrorCode::InvalidArgument, "free product needs at least one seed");
  if (max_len_ < 1) throw Error(ErrorCode::InvalidArgument, "max_len must be at least 1");
  std::sort(seeds_.begin(), seeds_.end(),
            [](const SeedSpace& a, const SeedSpace& b) { return a.label() < b.label(); });
  for (std::size_t i = 1; i < seeds_.size(); ++i)
    if (seeds_[i].label() == seeds_[i - 1].label())
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate seed label " + std::to_string(seeds_[i].label()));

  sectors_.push_back({Word{}, 1, 0});
  std::vector<Word> previous{Word{}};
  for (int n = 1; n <= max_len_; ++n) {
    std::vector<Word> current;
    for (const auto& w : previous) {
      for (const auto& s : seeds_) {
        if (!w.empty() && w.back() == s.label()) continue;
        Word next = w;
        next.push_back(s.label());
        current.push_back(std::move(next));
      }
    }
    for (const auto& w : current) {
      std::size_t dim = 1;
      for (Label l : w) dim *= static_cast<std::size_t>(seed(l).reduced_dim());
      sectors_.push_back({w, dim, 0});
    }
    previous = std::move(current);
  }

  std::size_t offset = 0;
  for (std::size_t i = 0; i < sectors_.size(); ++i) {
    sectors_[i].offset = offset;
    offset += sectors_[i].dim;
    index_.emplace(sectors_[i].word, i);
  }
  total_dim_ = offset;
}

const SeedSpace& FockSpace::seed(Label label) const {
  auto it = std::lower_bound(seeds_.begin(), seeds_.end(), label,
                             [](const SeedSpace& s, Label l) { return s.label() < l; });
  if (it == seeds_.end() || it->label() != label)
    throw Error(ErrorCode::InvalidArgument, "unknown seed label " + std::to_string(label));
  return *it;
}

bool FockSpace::has_label(Label label) const {
  return std::any_of(seeds_.begin(), seeds_.end(),
                     [label](const SeedSpace& s) { return s.label() == label; });
}

std::vector<Label> FockSpace::labels() const {
  std::vector<Label> out;
  for (const auto& s : seeds_) out.push_back(s.label());
  return out;
}

std::optional<std::size_t> FockSpace::sector_index(const Word& w) const {
  auto it = index_.find(w);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Sector& FockSpace::sector(const Word& w) const {
  auto idx = sector_index(w);
  if (!idx) throw Error(ErrorCode::InvalidArgument, "no sector " + word_to_string(w));
  return sectors_[*idx];
}

Vec FockSpace::vacuum() const {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(total_dim_));
  v(0) = 1.0;
  return v;
}

std::vector<int> FockSpace::radices(const Word& w) const {
  std::vector<int> r;
  r.reserve(w.size());
  for (Label l : w) r.push_back(seed(l).reduced_dim());
  return r;
}

Vec FockSpace::basis_tensor(const Word& w, const std::vector<Vec>& factors) const {
  if (factors.size() != w.size())
    throw Error(ErrorCode::InvalidArgument, "basis_tensor: one factor per letter required");
  const Sector& s = sector(w);
  Vec block = Vec::Ones(1);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (factors[j].size() != seed(w[j]).reduced_dim())
      throw Error(ErrorCode::InvalidArgument, "basis_tensor: factor has wrong length");
    Vec next(block.size() * factors[j].size());
    for (Eigen::Index a = 0; a < block.size(); ++a)
      next.segment(a * factors[j].size(), factors[j].size()) = block(a) * factors[j];
    block = std::move(next);
  }
  Vec v = Vec::Zero(static_cast<Eigen::Index>(total_dim_));
  v.segment(s.offset, s.dim) = block;
  return v;
}

Applied lambda_act(const FockSpace& fock, Label k, const Mat& t, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != fock.total_dim())
    throw Error(ErrorCode::InvalidArgument, "lambda_act: vector length does not match the space");
  const SeedSpace& seed = fock.seed(k);
  const Mat th = seed.to_adapted(t);
  const Eigen::Index r = seed.reduced_dim();
  const cplx t00 = th(0, 0);
  const Vec tcol = th.col(0).tail(r);
  const Eigen::RowVectorXcd trow = th.row(0).tail(r);
  const Mat tred = th.bottomRightCorner(r, r);

  const double scale = th.norm() * v.norm();
  const double tcol_norm = tcol.norm();

  Applied out{Vec::Zero(v.size()), true};
  for (const auto& s : fock.sectors()) {
    const auto b = v.segment(s.offset, s.dim);
    if (s.word.empty() || s.word.front() != k) {
      // prepend: t00 (xi) + (T Omega)° ⊗ (xi)
      out.vector.segment(s.offset, s.dim) += t00 * b;
      Word longer;
      longer.reserve(s.word.size() + 1);
      longer.push_back(k);
      longer.insert(longer.end(), s.word.begin(), s.word.end());
      if (static_cast<int>(longer.size()) <= fock.max_len()) {
        const Sector& target = fock.sector(longer);
        // target coordinate (i, J) sits at i * dim(s) + J
        Eigen::Map<Mat> tgt(out.vector.data() + target.offset, static_cast<Eigen::Index>(s.dim), r);
        tgt.noalias() += b * tcol.transpose();
      } else if (s.dim > 0 && tcol_norm * b.norm() > kDropTolerance * scale) {
        out.exact = false;
      }
    } else {
      // absorb: <Omega, T xi_1> (xi_2 ...) + (T xi_1)° ⊗ (xi_2 ...)
      const Eigen::Index rest = r == 0 ? 0 : static_cast<Eigen::Index>(s.dim) / r;
      if (rest == 0) continue;
      Eigen::Map<const Mat> bt(v.data() + s.offset, rest, r);
      Word shorter(s.word.begin() + 1, s.word.end());
      const Sector& tail = fock.sector(shorter);
      out.vector.segment(tail.offset, tail.dim) += bt * trow.transpose();
      Eigen::Map<Mat> same(out.vector.data() + s.offset, rest, r);
      same.noalias() += bt * tred.transpose();
    }
  }
  return out;
}

Vec z_involution(const FockSpace& fock, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != fock.total_dim())
    throw Error(ErrorCode::InvalidArgument, "z_involution: vector length does not match the space");
  Vec out = Vec::Zero(v.size());
  std::vector<int> digits;
  for (const auto& s : fock.sectors()) {
    if (s.word.size() <= 1) {
      out.segment(s.offset, s.dim) = v.segment(s.offset, s.dim);
      continue;
    }
    Word reversed(s.word.rbegin(), s.word.rend());
    const Sector& target = fock.sector(reversed);
    const auto rad = fock.radices(s.word);
    const std::size_t n = rad.size();
    digits.assign(n, 0);
    for (std::size_t flat = 0; flat < s.dim; ++flat) {
      std::size_t rem = flat;
      for (std::size_t j = n; j-- > 0;) {
        digits[j] = static_cast<int>(rem % rad[j]);
        rem /= rad[j];
      }
      std::size_t rflat = 0;
      for (std::size_t j = n; j-- > 0;) rflat = rflat * rad[j] + digits[j];
      out(static_cast<Eigen::Index>(target.offset + rflat)) =
          v(static_cast<Eigen::Index>(s.offset + flat));
    }
  }
  return out;
}

Applied rho_act(const FockSpace& fock, Label k, const Mat& t, const Vec& v) {
  Applied a = lambda_act(fock, k, t, z_involution(fock, v));
  a.vector = z_involution(fock, a.vector);
  return a;
}

Applied free_word_vector(const FockSpace& fock,
                         const std::vector<std::pair<Label, Mat>>& factors) {
  Applied acc{fock.vacuum(), true};
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    Applied next = lambda_act(fock, it->first, it->second, acc.vector);
    acc.vector = std::move(next.vector);
    acc.exact = acc.exact && next.exact;
  }
  return acc;
}

double commutation_residual(const FockSpace& fock, Label k, const Mat& t, Label k_prime,
                            const Mat& t_prime, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != fock.total_dim())
    throw Error(ErrorCode::InvalidArgument, "commutation_residual: vector length does not match the space");
  for (const auto& s : fock.sectors())
    if (static_cast<int>(s.word.size()) > fock.max_len() - 2 && v.segment(s.offset, s.dim).norm() > 0.0)
      throw Error(ErrorCode::Truncation, "commutation_residual: v reaches words longer than max_len - 2");
  const Vec lr = lambda_act(fock, k, t, rho_act(fock, k_prime, t_prime, v).vector).vector;
  const Vec rl = rho_act(fock, k_prime, t_prime, lambda_act(fock, k, t, v).vector).vector;
  Vec diff = lr - rl;
  if (k == k_prime) {
    const Vec c = lambda_act(fock, k, t * t_prime - t_prime * t, v).vector;
    diff -= fock.project(c, [k](const Word& w) { return w.empty() || (w.size() == 1 && w[0] == k); });
  }
  return diff.norm();
}

}  // namespace freeprod
