#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "freeprod/spectral.hpp"
#include "support.hpp"

using namespace freeprod;
using namespace freeprod::testing;

namespace {

SpectrumModel seed_of(Label label, std::vector<std::pair<double, std::uint64_t>> levels) {
  std::vector<Level> out;
  for (auto [e, m] : levels) out.push_back({e, m});
  return SpectrumModel(label, out);
}

// Enumerates every alternating word and every choice of reduced level per letter.
std::map<double, std::uint64_t> brute_force(const std::map<Label, SpectrumModel>& seeds, int max_len, double cutoff) {
  std::map<double, std::uint64_t> out;
  std::function<void(Label, int, double, std::uint64_t)> walk = [&](Label last, int len, double e, std::uint64_t m) {
    if (len > 0 && e <= cutoff) out[std::round(e * 1e6) / 1e6] += m;
    if (len == max_len) return;
    for (const auto& [label, spec] : seeds) {
      if (label == last) continue;
      for (const auto& l : spec.levels()) walk(label, len + 1, e + l.energy, m * l.multiplicity);
    }
  };
  walk(-1, 0, 0.0, 1);
  return out;
}

}  // namespace

TEST(Spectrum, SingleSeedIsItself) {
  const auto seed = seed_of(1, {{1.0, 2}, {2.5, 1}});
  const auto fp = free_product_spectrum({{1, seed}}, 4, 100.0);
  ASSERT_EQ(fp.levels().size(), 2u);
  EXPECT_EQ(fp.levels()[0].multiplicity, 2u);
  EXPECT_DOUBLE_EQ(fp.levels()[1].energy, 2.5);
}

TEST(Spectrum, TwoUnitSeedsLengthTwo) {
  const auto fp = free_product_spectrum({{1, seed_of(1, {{1.0, 1}})}, {2, seed_of(2, {{1.0, 1}})}}, 2, 10.0);
  ASSERT_EQ(fp.levels().size(), 2u);
  EXPECT_DOUBLE_EQ(fp.levels()[0].energy, 1.0);
  EXPECT_EQ(fp.levels()[0].multiplicity, 2u);
  EXPECT_DOUBLE_EQ(fp.levels()[1].energy, 2.0);
  EXPECT_EQ(fp.levels()[1].multiplicity, 2u);
}

TEST(Spectrum, CutoffBelowLowestLevelLeavesVacuum) {
  const auto fp = free_product_spectrum({{1, geometric_seed(1)}, {2, geometric_seed(2)}}, 3, 0.5);
  EXPECT_TRUE(fp.levels().empty());
  EXPECT_DOUBLE_EQ(truncated_trace(fp, 1.0), 1.0);
  EXPECT_TRUE(free_product_spectrum({{1, geometric_seed(1)}}, 0, 10.0).levels().empty());
}

TEST(Spectrum, MatchesBruteForceEnumeration) {
  std::mt19937_64 rng(401);
  for (int trial = 0; trial < 30; ++trial) {
    std::map<Label, SpectrumModel> seeds;
    const int k = uniform_int(rng, 1, 3);
    for (int l = 1; l <= k; ++l) {
      std::vector<std::pair<double, std::uint64_t>> levels;
      const int n = uniform_int(rng, 1, 3);
      for (int i = 0; i < n; ++i)
        levels.emplace_back(0.5 * uniform_int(rng, 1, 6), static_cast<std::uint64_t>(uniform_int(rng, 1, 3)));
      seeds.emplace(l, seed_of(l, levels));
    }
    const int max_len = uniform_int(rng, 0, 4);
    const double cutoff = 0.5 * uniform_int(rng, 1, 14);
    const auto fp = free_product_spectrum(seeds, max_len, cutoff);
    const auto want = brute_force(seeds, max_len, cutoff);
    ASSERT_EQ(fp.levels().size(), want.size());
    std::size_t i = 0;
    for (const auto& [e, m] : want) {
      EXPECT_NEAR(fp.levels()[i].energy, e, 1e-9);
      EXPECT_EQ(fp.levels()[i].multiplicity, m);
      ++i;
    }
  }
}

TEST(Spectrum, LevelsMergeWithinTolerance) {
  const auto s = seed_of(1, {{0.1 + 0.2, 1}, {0.3, 2}, {0.3 + 5e-10, 1}, {0.3 + 5e-9, 1}});
  ASSERT_EQ(s.levels().size(), 2u);
  EXPECT_EQ(s.levels()[0].multiplicity, 4u);
  EXPECT_EQ(s.reduced_dimension(), 5u);
}

TEST(Spectrum, RejectsBadInput) {
  EXPECT_THROW(seed_of(1, {{0.0, 1}}), Error);
  EXPECT_THROW(seed_of(1, {{-1.0, 1}}), Error);
  EXPECT_THROW(seed_of(1, {{1.0, 0}}), Error);
  EXPECT_THROW(free_product_spectrum({}, 2, 1.0), Error);
  EXPECT_THROW(free_product_spectrum({{1, geometric_seed(1)}}, 2, 0.0), Error);
  EXPECT_THROW(free_product_spectrum({{1, geometric_seed(1)}}, -1, 1.0), Error);
  EXPECT_THROW(truncated_trace(geometric_seed(1), 0.0), Error);
  EXPECT_THROW(geometric_seed(1, 0), Error);
}

TEST(Trace, GeometricPartialSums) {
  for (int n : {1, 5, 20}) {
    const auto s = geometric_seed(1, n);
    for (double beta : {0.3, 1.0, 2.0}) {
      double want = 1.0;
      for (int j = 1; j <= n; ++j) want += std::exp(-beta * j);
      EXPECT_NEAR(truncated_trace(s, beta), want, 1e-13);
    }
  }
  const double e = std::exp(-1.0);
  EXPECT_NEAR(truncated_trace(geometric_seed(1), 1.0), 1.0 + e / (1.0 - e), 1e-13);
  EXPECT_LT(truncated_trace(geometric_seed(1), 40.0) - 1.0, 1e-17);
}

TEST(Trace, MonotoneInLengthCutoffAndS) {
  const std::map<Label, SpectrumModel> seeds{{1, geometric_seed(1, 30)}, {2, seed_of(2, {{0.5, 2}, {1.5, 1}})}};
  double prev = 0.0;
  for (int len = 0; len <= 5; ++len) {
    const double t = truncated_trace(free_product_spectrum(seeds, len, 12.0), 1.0);
    EXPECT_GE(t, prev);
    prev = t;
  }
  prev = 0.0;
  for (double cutoff : {1.0, 2.0, 5.0, 10.0}) {
    const double t = truncated_trace(free_product_spectrum(seeds, 4, cutoff), 1.0);
    EXPECT_GE(t, prev);
    prev = t;
  }
  const auto fp = free_product_spectrum(seeds, 4, 12.0);
  prev = INFINITY;
  for (double s : {0.5, 1.0, 1.5, 3.0}) {
    const double t = truncated_trace(fp, s);
    EXPECT_LT(t, prev);
    prev = t;
  }
}

TEST(DistalBound, Examples) {
  EXPECT_NEAR(*distal_bound({{1, 1.0 / 3}, {2, 1.0 / 3}}, 2), 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(*distal_bound({{1, 0.0}}, 1), 1.0);
  EXPECT_FALSE(distal_bound({{1, 0.5}, {2, 0.5}, {3, 0.5}}, 3).has_value());
  EXPECT_THROW(distal_bound({{1, 0.1}}, 0), Error);
  EXPECT_THROW(distal_bound({{1, -0.1}}, 1), Error);
}

TEST(DistalBound, ClosedFormTailIsExact) {
  // For positive ratio the partial sums fall short by first_omitted / (1 - ratio);
  // the error is not bounded by the first omitted term alone.
  for (int k : {2, 3, 4})
    for (double eps : {0.05, 0.2, 0.3}) {
      const double ratio = eps * (k - 1);
      if (ratio >= 1.0) continue;
      const double closed = *distal_bound({{1, eps}}, k);
      double partial = 1.0, term = k * eps;
      for (int n = 1; n <= 12; ++n) {
        partial += term;
        term *= ratio;
        EXPECT_NEAR(closed - partial, term / (1.0 - ratio), 1e-13);
        EXPECT_GE(closed - partial, 0.0);
      }
    }
}

TEST(RefinedTrace, MatchesWordSumAndDominatedByDistal) {
  std::mt19937_64 rng(409);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = uniform_int(rng, 1, 4);
    std::map<Label, double> eps;
    for (int l = 1; l <= k; ++l) eps[l] = u(rng);
    const auto refined = refined_free_trace(eps);
    const auto distal = distal_bound(eps, k);
    if (!distal) continue;
    ASSERT_TRUE(refined.has_value());
    EXPECT_LE(*refined, *distal + 1e-12);
    // sum over alternating words up to length 80, ending label tracked
    std::map<Label, double> ending = eps;
    double total = 1.0;
    for (int n = 1; n <= 80; ++n) {
      for (const auto& [l, v] : ending) total += v;
      std::map<Label, double> next;
      for (const auto& [l, e] : eps)
        for (const auto& [prev, v] : ending)
          if (prev != l) next[l] += v * e;
      ending = next;
    }
    EXPECT_NEAR(*refined, total, 1e-9);
  }
  const std::map<Label, double> equal{{1, 0.2}, {2, 0.2}, {3, 0.2}};
  EXPECT_NEAR(*refined_free_trace(equal), *distal_bound(equal, 3), 1e-13);
  EXPECT_FALSE(refined_free_trace({{1, 0.6}, {2, 0.6}, {3, 0.6}}).has_value());
  EXPECT_DOUBLE_EQ(*refined_free_trace({}), 1.0);
}

TEST(L2Series, Examples) {
  const auto half = l2_nuclearity_series({0.2, 0.3});
  EXPECT_NEAR(half.epsilon, 0.5, 1e-15);
  ASSERT_TRUE(half.bound.has_value());
  EXPECT_NEAR(*half.bound, 2.0, 1e-15);
  const auto empty = l2_nuclearity_series({});
  EXPECT_EQ(empty.epsilon, 0.0);
  EXPECT_EQ(*empty.bound, 1.0);
  EXPECT_FALSE(l2_nuclearity_series({0.5, 0.5}).bound.has_value());
  EXPECT_FALSE(l2_nuclearity_series({0.7, 0.6}).bound.has_value());
  EXPECT_THROW(l2_nuclearity_series({0.1, -0.01}), Error);
}

TEST(L2Series, ClosedFormTailIsExact) {
  for (double eps : {0.1, 0.5, 0.9}) {
    const double closed = *l2_nuclearity_series({eps}).bound;
    double partial = 0.0, term = 1.0;
    for (int n = 0; n <= 20; ++n) {
      partial += term;
      term *= eps;
      EXPECT_NEAR(closed - partial, term / (1.0 - eps), 1e-12);
    }
  }
}

TEST(SplitDistance, Examples) {
  EXPECT_NEAR(split_distance(geometric_seed(1), 2, 1e-9), std::log(2.0), 1e-6);
  EXPECT_NEAR(split_distance(geometric_seed(1), 11, 1e-9), std::log(11.0), 1e-6);
  EXPECT_DOUBLE_EQ(split_distance(seed_of(1, {{1.0, 1}}), 2, 1e-9), kSplitSearchLow);
  EXPECT_THROW(split_distance(geometric_seed(1), 1, 1e-9), Error);
  EXPECT_THROW(split_distance(geometric_seed(1), 2, 0.0), Error);
  // threshold 1/(K-1) is never reached for a huge flat multiplicity at tiny energy
  try {
    split_distance(seed_of(1, {{1e-4, 1000000}}), 2, 1e-9);
    ADD_FAILURE() << "expected Divergent";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Divergent);
  }
}

TEST(SplitDistance, ThresholdIsCrossed) {
  for (int k : {2, 3, 5}) {
    const auto seed = geometric_seed(1);
    const double s = split_distance(seed, k, 1e-10);
    EXPECT_LT(reduced_trace(seed, s), 1.0 / (k - 1));
    EXPECT_GE(reduced_trace(seed, s - 1e-8), 1.0 / (k - 1));
  }
}

TEST(TraceReport, GeometricPairAtUnitS) {
  const auto r = verify_trace_bound({{1, geometric_seed(1)}, {2, geometric_seed(2)}}, 1.0, 6, 60.0);
  const double e = std::exp(-1.0);
  const double eps = e / (1.0 - e);
  EXPECT_NEAR(r.epsilon, eps, 1e-12);
  EXPECT_NEAR(r.epsilon, 0.5820, 5e-5);
  ASSERT_TRUE(r.conclusive());
  EXPECT_NEAR(*r.closed_form_bound, 1.0 + 2.0 * eps / (1.0 - eps), 1e-12);
  EXPECT_NEAR(*r.closed_form_bound, 3.784, 5e-4);
  EXPECT_TRUE(r.bound_holds());
  ASSERT_EQ(r.series.size(), 7u);
  EXPECT_DOUBLE_EQ(r.series.front().truncated_trace, 1.0);
  for (std::size_t i = 1; i < r.series.size(); ++i) {
    EXPECT_GT(r.series[i].truncated_trace, r.series[i - 1].truncated_trace);
    EXPECT_LT(r.series[i].truncated_trace, *r.closed_form_bound);
  }
  EXPECT_GT(r.tail_estimate, 0.0);
  EXPECT_NEAR(*r.refined_bound, *r.closed_form_bound, 1e-12);
}

TEST(TraceReport, BelowSplitDistanceIsNotConclusive) {
  const auto r = verify_trace_bound({{1, geometric_seed(1)}, {2, geometric_seed(2)}}, 0.5, 3, 30.0);
  EXPECT_FALSE(r.conclusive());
  EXPECT_TRUE(std::isfinite(r.truncated_trace));
  EXPECT_TRUE(r.bound_holds());
  EXPECT_EQ(r.tail_estimate, 0.0);
}

TEST(TraceReport, BoundDominatesAboveSplitDistance) {
  const std::map<Label, SpectrumModel> seeds{{1, geometric_seed(1)}, {2, geometric_seed(2)}, {3, geometric_seed(3)}};
  const double s0 = split_distance(geometric_seed(1), 3, 1e-10);
  for (double s = s0 + 0.05; s < s0 + 3.0; s += 0.25) {
    const auto r = verify_trace_bound(seeds, s, 4, 40.0);
    ASSERT_TRUE(r.conclusive()) << s;
    EXPECT_TRUE(r.bound_holds()) << s;
  }
}

TEST(SpectrumCsv, ParsesHeaderCommentsAndLevels) {
  std::istringstream in("eigenvalue,multiplicity\n# comment\n0,1\n1,1\n2, 2\n\n2.0000000001,1\n");
  const auto s = parse_spectrum_csv(7, in);
  EXPECT_EQ(s.label(), 7);
  ASSERT_EQ(s.levels().size(), 2u);
  EXPECT_EQ(s.levels()[1].multiplicity, 3u);
}

TEST(SpectrumCsv, RejectsMalformedInput) {
  const std::vector<std::string> bad = {
      "1,1\n",             // no vacuum
      "0,1\n0,1\n1,1\n",   // two vacua
      "0,2\n1,1\n",        // vacuum multiplicity
      "0,1\n-1,1\n",       // negative level
      "0,1\n1,0\n",        // zero multiplicity
      "0,1\n1;1\n",        // no comma
      "0,1\n1,x\n",        // not a number after the header position
  };
  for (const auto& text : bad) {
    std::istringstream in(text);
    try {
      parse_spectrum_csv(1, in);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Parse) << text;
    }
  }
}
