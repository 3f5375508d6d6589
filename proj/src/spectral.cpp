#include "freeprod/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace freeprod {

namespace {

std::vector<Level> merge_levels(std::vector<Level> levels) {
  std::sort(levels.begin(), levels.end(),
            [](const Level& a, const Level& b) { return a.energy < b.energy; });
  std::vector<Level> out;
  for (const auto& l : levels) {
    if (!out.empty() && l.energy - out.back().energy <= kLevelMergeTolerance)
      out.back().multiplicity += l.multiplicity;
    else
      out.push_back(l);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SpectrumModel::SpectrumModel(Label label, std::vector<Level> levels) : label_(label) {
  for (const auto& l : levels) {
    if (!(l.energy > 0.0) || !std::isfinite(l.energy))
      throw Error(ErrorCode::InvalidArgument, "spectrum: reduced levels must be finite and positive");
    if (l.multiplicity < 1)
      throw Error(ErrorCode::InvalidArgument, "spectrum: multiplicities must be >= 1");
  }
  levels_ = merge_levels(std::move(levels));
}

std::uint64_t SpectrumModel::reduced_dimension() const {
  std::uint64_t n = 0;
  for (const auto& l : levels_) n += l.multiplicity;
  return n;
}

SpectrumModel geometric_seed(Label label, int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "geometric_seed: count must be >= 1");
  std::vector<Level> levels;
  for (int n = 1; n <= count; ++n) levels.push_back({static_cast<double>(n), 1});
  return SpectrumModel(label, std::move(levels));
}

SpectrumModel parse_spectrum_csv(Label label, std::istream& in) {
  std::vector<Level> levels;
  int vacuum_rows = 0;
  std::string line;
  int line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto comma = t.find(',');
    const std::string where = "spectrum csv line " + std::to_string(line_no) + ": ";
    if (comma == std::string::npos) throw Error(ErrorCode::Parse, where + "expected 'eigenvalue,multiplicity'");
    const std::string a = trim(t.substr(0, comma));
    const std::string b = trim(t.substr(comma + 1));
    double energy = 0.0;
    long long mult = 0;
    try {
      std::size_t pa = 0, pb = 0;
      energy = std::stod(a, &pa);
      mult = std::stoll(b, &pb);
      if (pa != a.size() || pb != b.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      if (first_content) {
        first_content = false;
        continue;  // header row
      }
      throw Error(ErrorCode::Parse, where + "could not read numbers from '" + t + "'");
    }
    first_content = false;
    if (energy < 0.0 || !std::isfinite(energy)) throw Error(ErrorCode::Parse, where + "negative or non-finite eigenvalue");
    if (mult < 1) throw Error(ErrorCode::Parse, where + "multiplicity must be >= 1");
    if (energy == 0.0) {
      if (mult != 1) throw Error(ErrorCode::Parse, where + "vacuum must have multiplicity 1");
      ++vacuum_rows;
      continue;
    }
    levels.push_back({energy, static_cast<std::uint64_t>(mult)});
  }
  if (vacuum_rows != 1)
    throw Error(ErrorCode::Parse, "spectrum csv: expected exactly one vacuum row '0,1', found " +
                                      std::to_string(vacuum_rows));
  return SpectrumModel(label, std::move(levels));
}

SpectrumModel free_product_spectrum(const std::map<Label, SpectrumModel>& seeds, int max_len,
                                    double energy_cutoff) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "free_product_spectrum: empty seed family");
  if (!(energy_cutoff > 0.0)) throw Error(ErrorCode::InvalidArgument, "free_product_spectrum: cutoff must be positive");
  if (max_len < 0) throw Error(ErrorCode::InvalidArgument, "free_product_spectrum: max_len must be >= 0");

  std::map<Label, std::vector<Level>> reduced;
  for (const auto& [label, spec] : seeds)
    for (const auto& l : spec.levels())
      if (l.energy <= energy_cutoff) reduced[label].push_back(l);
  for (const auto& [label, spec] : seeds) reduced[label];

  // ending[k]: levels of words of the current length whose last letter is k
  std::map<Label, std::vector<Level>> ending;
  std::vector<Level> all;
  if (max_len >= 1) ending = reduced;
  for (int len = 1; len <= max_len; ++len) {
    for (const auto& [label, levels] : ending) all.insert(all.end(), levels.begin(), levels.end());
    if (len == max_len) break;
    std::map<Label, std::vector<Level>> next;
    for (const auto& [k, seed_levels] : reduced) {
      std::vector<Level> acc;
      for (const auto& [prev, prev_levels] : ending) {
        if (prev == k) continue;
        for (const auto& a : prev_levels)
          for (const auto& b : seed_levels) {
            const double e = a.energy + b.energy;
            if (e <= energy_cutoff) acc.push_back({e, a.multiplicity * b.multiplicity});
          }
      }
      next[k] = merge_levels(std::move(acc));
    }
    ending = std::move(next);
  }
  return SpectrumModel(0, merge_levels(std::move(all)));
}

double reduced_trace(const SpectrumModel& spec, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "trace: s must be positive");
  double sum = 0.0;
  for (const auto& l : spec.levels()) sum += static_cast<double>(l.multiplicity) * std::exp(-s * l.energy);
  return sum;
}

double truncated_trace(const SpectrumModel& spec, double s) { return 1.0 + reduced_trace(spec, s); }

std::optional<double> distal_bound(const std::map<Label, double>& epsilons, int k_size) {
  if (k_size < 1) throw Error(ErrorCode::InvalidArgument, "distal_bound: K must be >= 1");
  double eps = 0.0;
  for (const auto& [label, e] : epsilons) {
    if (e < 0.0) throw Error(ErrorCode::InvalidArgument, "distal_bound: epsilon must be >= 0");
    eps = std::max(eps, e);
  }
  if (eps * (k_size - 1) >= 1.0) return std::nullopt;
  return 1.0 + k_size * eps / (1.0 - eps * (k_size - 1));
}

std::optional<double> refined_free_trace(const std::map<Label, double>& epsilons) {
  const auto k = static_cast<Eigen::Index>(epsilons.size());
  if (k == 0) return 1.0;
  Eigen::VectorXd e(k);
  Eigen::Index i = 0;
  for (const auto& [label, eps] : epsilons) {
    if (eps < 0.0) throw Error(ErrorCode::InvalidArgument, "refined_free_trace: epsilon must be >= 0");
    e(i++) = eps;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c)
      if (r != c) a(r, c) = e(c);
  const double radius = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues().cwiseAbs().maxCoeff();
  if (radius >= 1.0) return std::nullopt;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(k);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  return 1.0 + e.dot((id - a).partialPivLu().solve(ones));
}

NuclearitySeries l2_nuclearity_series(const std::vector<double>& deficits) {
  NuclearitySeries out;
  long double sum = 0.0L;
  for (double d : deficits) {
    if (d < 0.0 || !std::isfinite(d))
      throw Error(ErrorCode::InvalidArgument, "l2_nuclearity_series: deficits must be finite and >= 0");
    sum += d;
  }
  out.epsilon = static_cast<double>(sum);
  if (sum < 1.0L) out.bound = static_cast<double>(1.0L / (1.0L - sum));
  return out;
}

double split_distance(const SpectrumModel& seed, int k_size, double tol) {
  if (k_size < 2) throw Error(ErrorCode::InvalidArgument, "split_distance: K must be >= 2");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "split_distance: tol must be positive");
  const double threshold = 1.0 / (k_size - 1);
  double lo = kSplitSearchLow, hi = kSplitSearchHigh;
  if (reduced_trace(seed, lo) < threshold) return lo;
  if (!(reduced_trace(seed, hi) < threshold))
    throw Error(ErrorCode::Divergent, "split_distance: reduced trace stays above 1/(K-1) on [1e-6, 1e3]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (reduced_trace(seed, mid) < threshold ? hi : lo) = mid;
  }
  return hi;
}

bool TraceReport::bound_holds() const {
  if (!closed_form_bound) return true;
  for (const auto& row : series)
    if (row.truncated_trace > *closed_form_bound + 1e-9) return false;
  return truncated_trace <= *closed_form_bound + 1e-9;
}

TraceReport verify_trace_bound(const std::map<Label, SpectrumModel>& seeds, double s, int max_len,
                               double cutoff) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "verify_trace_bound: empty seed family");
  TraceReport r;
  r.s = s;
  r.max_len = max_len;
  r.cutoff = cutoff;
  for (const auto& [label, spec] : seeds) {
    r.epsilon_per_seed[label] = reduced_trace(spec, s);
    r.epsilon = std::max(r.epsilon, r.epsilon_per_seed[label]);
  }
  const int k = static_cast<int>(seeds.size());
  r.closed_form_bound = distal_bound(r.epsilon_per_seed, k);
  r.refined_bound = refined_free_trace(r.epsilon_per_seed);

  for (int len = 0; len <= max_len; ++len) {
    const double t = truncated_trace(free_product_spectrum(seeds, len, cutoff), s);
    r.series.push_back({len, t, r.closed_form_bound});
  }
  r.truncated_trace = r.series.back().truncated_trace;

  if (r.closed_form_bound) {
    double partial = 1.0, term = k * r.epsilon;
    for (int n = 1; n <= max_len; ++n) {
      partial += term;
      term *= r.epsilon * (k - 1);
    }
    r.tail_estimate = *r.closed_form_bound - partial;
  }
  return r;
}

}  // namespace freeprod
