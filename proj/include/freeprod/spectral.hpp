#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "freeprod/common.hpp"

namespace freeprod {

// Sums of levels closer than this are merged.
inline constexpr double kLevelMergeTolerance = 1e-9;

struct Level {
  double energy = 0.0;
  std::uint64_t multiplicity = 1;
};

/// Spectrum of a conformal Hamiltonian: the vacuum at 0 (multiplicity 1,
/// implicit) and the reduced part, strictly positive levels sorted ascending.
class SpectrumModel {
 public:
  SpectrumModel() = default;
  SpectrumModel(Label label, std::vector<Level> levels);

  Label label() const { return label_; }
  const std::vector<Level>& levels() const { return levels_; }
  std::uint64_t reduced_dimension() const;

 private:
  Label label_ = 0;
  std::vector<Level> levels_;
};

// Levels 1, 2, ..., count with multiplicity 1.
SpectrumModel geometric_seed(Label label, int count = 200);

// CSV rows "eigenvalue,multiplicity" with an optional header; the row "0,1"
// for the vacuum must be present exactly once.
SpectrumModel parse_spectrum_csv(Label label, std::istream& in);

SpectrumModel free_product_spectrum(const std::map<Label, SpectrumModel>& seeds, int max_len,
                                    double energy_cutoff);

// 1 + sum mult e^{-s E}
double truncated_trace(const SpectrumModel& spec, double s);
// sum mult e^{-s E} over the reduced part
double reduced_trace(const SpectrumModel& spec, double s);

/// 1 + K eps / (1 - eps (K-1)) with eps the largest entry; nullopt when
/// eps (K-1) >= 1.
std::optional<double> distal_bound(const std::map<Label, double>& epsilons, int k_size);

/// Exact sum over alternating words of prod eps_{k_j}: 1 + e (1 - A)^{-1} 1
/// with A_{k k'} = eps_{k'} for k != k'. Tighter than distal_bound when the
/// seeds differ; nullopt when the spectral radius of A is >= 1.
std::optional<double> refined_free_trace(const std::map<Label, double>& epsilons);

struct NuclearitySeries {
  double epsilon = 0.0;
  std::optional<double> bound;  // 1 / (1 - epsilon)
};

NuclearitySeries l2_nuclearity_series(const std::vector<double>& deficits);

// Smallest s in [1e-6, 1e3] with reduced trace below 1 / (K-1), to `tol`.
double split_distance(const SpectrumModel& seed, int k_size, double tol);

inline constexpr double kSplitSearchLow = 1e-6;
inline constexpr double kSplitSearchHigh = 1e3;

struct TraceSeriesRow {
  int max_len = 0;
  double truncated_trace = 0.0;
  std::optional<double> bound;
};

struct TraceReport {
  double s = 0.0;
  int max_len = 0;
  double cutoff = 0.0;
  std::map<Label, double> epsilon_per_seed;
  double epsilon = 0.0;
  double truncated_trace = 0.0;
  std::optional<double> closed_form_bound;
  std::optional<double> refined_bound;
  double tail_estimate = 0.0;  // bound - partial closed form at max_len; 0 when divergent
  std::vector<TraceSeriesRow> series;  // max_len = 0..max_len
  bool conclusive() const { return closed_form_bound.has_value(); }
  bool bound_holds() const;
};

TraceReport verify_trace_bound(const std::map<Label, SpectrumModel>& seeds, double s, int max_len,
                               double cutoff);

}  // namespace freeprod
