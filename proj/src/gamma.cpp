#include "freeprod/gamma.hpp"

#include <algorithm>
#include <cmath>

namespace freeprod {

namespace {

void validate(Label label, const GammaModel& m) {
  const auto n = m.gamma_reduced.rows();
  if (n == 0 || m.gamma_reduced.cols() != n)
    throw Error(ErrorCode::InvalidArgument,
                "gamma model " + std::to_string(label) + ": matrix must be square and nonempty");
  if (m.window_begin < 0 || m.window_end > n || m.window_begin >= m.window_end)
    throw Error(ErrorCode::InvalidArgument,
                "gamma model " + std::to_string(label) + ": interior window is empty or out of range");
}

bool interior_isometric(const Mat& power, const GammaModel& m) {
  for (int j = m.window_begin; j < m.window_end; ++j)
    if (std::abs(power.col(j).norm() - 1.0) > kIsometryTolerance) return false;
  return true;
}

void alternating_words(const std::vector<Label>& labels, int max_len, Word& prefix,
                       std::vector<Word>& out) {
  if (!prefix.empty()) out.push_back(prefix);
  if (static_cast<int>(prefix.size()) == max_len) return;
  for (Label l : labels) {
    if (!prefix.empty() && prefix.back() == l) continue;
    prefix.push_back(l);
    alternating_words(labels, max_len, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

GammaModel truncated_shift(int size, int window_begin, int window_end) {
  if (size < 1) throw Error(ErrorCode::InvalidArgument, "truncated_shift: size must be positive");
  GammaModel m;
  m.gamma_reduced = Mat::Zero(size, size);
  for (int j = 0; j + 1 < size; ++j) m.gamma_reduced(j + 1, j) = 1.0;
  m.window_begin = window_begin;
  m.window_end = window_end;
  validate(0, m);
  return m;
}

double interior_sup(const Mat& m, int window_begin, int window_end) {
  const int w = window_end - window_begin;
  return m.block(window_begin, window_begin, w, w).cwiseAbs().maxCoeff();
}

GammaDecayTable gamma_decay_probe(const std::map<Label, GammaModel>& models, int max_len, int n_max) {
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "gamma_decay_probe: no models");
  if (max_len < 1) throw Error(ErrorCode::InvalidArgument, "gamma_decay_probe: max_len must be >= 1");
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "gamma_decay_probe: n_max must be >= 0");
  for (const auto& [label, m] : models) validate(label, m);

  GammaDecayTable table;
  table.n_max = n_max;

  // per-label windowed sup of the n-th power, stopping at the horizon
  std::map<Label, std::vector<double>> sups;
  std::map<Label, Mat> powers;
  for (const auto& [label, m] : models) {
    const auto d = m.gamma_reduced.rows();
    powers[label] = Mat::Identity(d, d);
    sups[label].push_back(1.0);
  }
  int horizon = 0;
  for (int n = 1; n <= n_max; ++n) {
    bool ok = true;
    std::map<Label, Mat> next;
    for (const auto& [label, m] : models) {
      next[label] = m.gamma_reduced * powers[label];
      ok = ok && interior_isometric(next[label], m);
    }
    if (!ok) break;
    horizon = n;
    for (const auto& [label, m] : models) {
      powers[label] = next[label];
      sups[label].push_back(interior_sup(powers[label], m.window_begin, m.window_end));
    }
  }
  table.horizon = horizon;
  table.truncated = n_max > horizon;
  table.n_computed = std::min(n_max, horizon);

  std::vector<Label> labels;
  for (const auto& [label, m] : models) labels.push_back(label);
  std::vector<Word> words;
  Word prefix;
  alternating_words(labels, max_len, prefix, words);
  std::stable_sort(words.begin(), words.end(), [](const Word& a, const Word& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });

  std::vector<double> previous(words.size(), 0.0);
  for (int n = 0; n <= table.n_computed; ++n) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      double sup = 1.0;
      for (Label l : words[i]) sup *= sups[l][static_cast<std::size_t>(n)];
      if (n > 0 && sup > previous[i] + kIsometryTolerance) table.monotone = false;
      previous[i] = sup;
      table.rows.push_back({n, words[i], sup});
    }
  }

  for (Label l : labels) {
    const auto& s = sups[l];
    const double first = s.size() > 1 ? s[1] : s[0];
    if (s.back() >= first - kIsometryTolerance && first > 0.0) table.no_decay.push_back(l);
  }
  return table;
}

}  // namespace freeprod
