#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "qplas/correlator/coherence.hpp"
#include "qplas/correlator/waveform.hpp"
#include "qplas/optics/experiment.hpp"

using namespace qplas;

namespace {

// Clustered stream: tags bunch in bursts so that many pairs fall inside
// short windows and the oracle exercises every branch.
TimeTagStream random_stream(std::uint64_t seed, std::size_t n, int channels, TimePs duration) {
  RngStream rng({seed, 99});
  std::vector<TimeTag> tags;
  TimePs burst = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % 7 == 0) burst = static_cast<TimePs>(rng.uniform() * static_cast<double>(duration - 200'000));
    const auto t = burst + static_cast<TimePs>(rng.uniform() * 200'000.0);
    tags.push_back({t, static_cast<Channel>(rng.next_u64() % static_cast<std::uint64_t>(channels))});
  }
  return TimeTagStream::from_unsorted(std::move(tags), duration);
}

TimeTagStream poisson_stream(std::uint64_t seed, const std::vector<double>& rates, TimePs duration) {
  std::vector<TimeTag> tags;
  for (std::size_t ch = 0; ch < rates.size(); ++ch) {
    RngStream rng({seed, ch});
    double t = 0.0;
    for (;;) {
      t += rng.exponential(1e12 / rates[ch]);
      if (t > static_cast<double>(duration)) break;
      tags.push_back({static_cast<TimePs>(t), static_cast<Channel>(ch)});
    }
  }
  return TimeTagStream::from_unsorted(std::move(tags), duration);
}

std::vector<std::uint64_t> oracle_histogram(const TimeTagStream& s, const ChannelSet& a, const ChannelSet& b,
                                            TimePs bin, TimePs lo, TimePs hi) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>((hi - lo) / bin), 0);
  const auto& t = s.tags();
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (i == j || !a.contains(t[i].channel) || !b.contains(t[j].channel)) continue;
      const TimePs d = t[j].time - t[i].time;
      if (d >= lo && d < hi) ++counts[static_cast<std::size_t>((d - lo) / bin)];
    }
  return counts;
}

HeraldedCounts oracle_heralded(const TimeTagStream& s, Channel h, Channel a, Channel b, TimePs lo, TimePs hi) {
  HeraldedCounts n;
  const auto& t = s.tags();
  for (const auto& x : t) {
    if (x.channel != h) continue;
    ++n.heralds;
    for (const auto& y : t) {
      const TimePs dy = y.time - x.time;
      if (dy < lo || dy >= hi) continue;
      if (y.channel == a) ++n.doubles_a;
      if (y.channel == b) ++n.doubles_b;
      if (y.channel != a) continue;
      for (const auto& z : t)
        if (z.channel == b && z.time - x.time >= lo && z.time - x.time < hi) ++n.triples;
    }
  }
  return n;
}

double singles(const TimeTagStream& s, const ChannelSet& c) {
  double n = 0;
  for (const auto& t : s.tags()) n += c.contains(t.channel);
  return n;
}

}  // namespace

TEST(Histogram, MatchesAllPairsOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto s = random_stream(seed, 1000, 4, 20'000'000);
    for (TimePs bin : {1000, 3000, 8000}) {
      const TimePs lo = -bin * 30, hi = bin * 25;
      const auto h = coincidence_histogram(s, ChannelSet{0}, ChannelSet{1, 2}, bin, lo, hi);
      EXPECT_EQ(h.counts, oracle_histogram(s, {0}, {1, 2}, bin, lo, hi));
      EXPECT_EQ(h.singles_a, s.count(0));
      EXPECT_EQ(h.singles_b, s.count(1) + s.count(2));
    }
  }
}

TEST(Histogram, OverlappingSetsExcludeSelfPairs) {
  const auto s = random_stream(7, 800, 3, 10'000'000);
  const auto h = coincidence_histogram(s, ChannelSet{0, 1}, ChannelSet{1, 2}, 2000, -100'000, 100'000);
  EXPECT_EQ(h.counts, oracle_histogram(s, {0, 1}, {1, 2}, 2000, -100'000, 100'000));
}

TEST(Histogram, EqualTimesAndWindowEdges) {
  const TimeTagStream s({{1000, 0}, {1000, 1}, {2000, 1}, {3000, 1}}, 5000);
  const auto h = coincidence_histogram(s, Channel{0}, Channel{1}, 1000, 0, 2000);
  EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{1, 1}));  // d = 2000 lies at the open upper edge
}

TEST(Histogram, RejectsBadWindows) {
  const TimeTagStream s({{1, 0}}, 10);
  EXPECT_THROW(coincidence_histogram(s, Channel{0}, Channel{0}, 0, 0, 10), InvalidArgument);
  EXPECT_THROW(coincidence_histogram(s, Channel{0}, Channel{0}, 3, 0, 10), InvalidArgument);
  EXPECT_THROW(coincidence_histogram(s, Channel{0}, Channel{0}, 1, 10, 10), InvalidArgument);
}

TEST(Histogram, MergeIsExactAndAssociative) {
  const auto s = random_stream(11, 1000, 3, 20'000'000);
  const ChannelSet a{0}, b{1};
  const auto full = coincidence_histogram(s, a, b, 1000, -50'000, 50'000);
  const TagRange r1{0, 300}, r2{300, 650}, r3{650, s.size()};
  const auto x = coincidence_histogram(s, a, b, 1000, -50'000, 50'000, r1);
  const auto y = coincidence_histogram(s, a, b, 1000, -50'000, 50'000, r2);
  const auto z = coincidence_histogram(s, a, b, 1000, -50'000, 50'000, r3);
  EXPECT_EQ(merge(merge(x, y), z), merge(x, merge(y, z)));
  EXPECT_EQ(merge(merge(x, y), z), full);
  EXPECT_EQ(merge(y, x), merge(x, y));
  for (std::size_t parts : {1u, 2u, 5u, 17u})
    EXPECT_EQ(coincidence_histogram_partitioned(s, a, b, 1000, -50'000, 50'000, parts), full);
  const auto other = coincidence_histogram(s, a, b, 2000, -50'000, 50'000);
  try {
    merge(full, other);
    FAIL();
  } catch (const AnalysisError& e) {
    EXPECT_EQ(e.kind(), AnalysisError::Kind::GridMismatch);
  }
}

TEST(Normalize, MatchesOracleAndFailsOnEmptyChannel) {
  const auto s = random_stream(12, 1000, 3, 20'000'000);
  const auto h = coincidence_histogram(s, Channel{0}, Channel{2}, 4000, -80'000, 80'000);
  const auto g = normalize(h);
  const double level = singles(s, {0}) * singles(s, {2}) * 4000.0 / 20'000'000.0;
  const auto oracle = oracle_histogram(s, {0}, {2}, 4000, -80'000, 80'000);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_DOUBLE_EQ(g.values[k], static_cast<double>(oracle[k]) / level);
    EXPECT_DOUBLE_EQ(g.errors[k], std::sqrt(std::max<double>(static_cast<double>(oracle[k]), 1.0)) / level);
    EXPECT_DOUBLE_EQ(g.tau[k], -80.0 + 4.0 * (static_cast<double>(k) + 0.5));
  }
  const TimeTagStream lonely({{5, 0}}, 100);
  try {
    normalize(coincidence_histogram(lonely, Channel{0}, Channel{1}, 1, -5, 5));
    FAIL();
  } catch (const AnalysisError& e) {
    EXPECT_EQ(e.kind(), AnalysisError::Kind::UndefinedNormalization);
  }
}

TEST(Normalize, IndependentStreamsGiveUnity) {
  const auto s = poisson_stream(3, {20000.0, 20000.0}, 10 * kPsPerSecond);
  const auto g = normalize(coincidence_histogram(s, Channel{0}, Channel{1}, 100'000, -5'000'000, 5'000'000));
  int outliers = 0;
  for (std::size_t k = 0; k < g.size(); ++k) outliers += std::abs(g.values[k] - 1.0) > 5.0 * g.errors[k];
  EXPECT_EQ(outliers, 0);
  ASSERT_TRUE(g.long_delay_baseline);
  EXPECT_NEAR(g.long_delay_baseline->value, 1.0, 5.0 * g.long_delay_baseline->error);
}

TEST(Normalize, PeakPositionUnchangedByLongerObservation) {
  auto ev = run_experiment(ideal_setup(), kPsPerSecond / 2, 5).merged();
  const TimeTagStream longer(ev.tags(), ev.duration() * 3);
  const auto g1 = normalize(coincidence_histogram(ev, Channel{0}, Channel{1}, 4000, -200'000, 200'000));
  const auto g2 = normalize(coincidence_histogram(longer, Channel{0}, Channel{1}, 4000, -200'000, 200'000));
  auto argmax = [](const std::vector<double>& v) { return std::max_element(v.begin(), v.end()) - v.begin(); };
  const auto peak = static_cast<std::size_t>(argmax(g1.values));
  EXPECT_EQ(argmax(g2.values), argmax(g1.values));
  EXPECT_NEAR(g2.values[peak] / g1.values[peak], 3.0, 1e-12);
}

TEST(AutoG2, MatchesOracleAndPoissonUnity) {
  const auto s = random_stream(13, 1000, 2, 20'000'000);
  const auto e = auto_g2_zero(s, Channel{0}, Channel{1}, 20'000);
  const auto c = oracle_histogram(s, {0}, {1}, 40'000, -20'000, 20'000)[0];
  const double acc = singles(s, {0}) * singles(s, {1}) * 40'000.0 / 20'000'000.0;
  EXPECT_DOUBLE_EQ(e.value, static_cast<double>(c) / acc);

  const auto p = poisson_stream(4, {50000.0, 50000.0}, 10 * kPsPerSecond);
  const auto g = auto_g2_zero(p, Channel{0}, Channel{1}, 1'000'000);
  EXPECT_NEAR(g.value, 1.0, 5.0 * g.error);
}

TEST(Heralded, CountsMatchTripleLoopOracle) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto s = random_stream(20 + seed, 1000, 3, 5'000'000);
    const auto n = heralded_counts(s, {0}, {1}, {2}, -30'000, 40'000);
    const auto o = oracle_heralded(s, 0, 1, 2, -30'000, 40'000);
    EXPECT_EQ(n.heralds, o.heralds);
    EXPECT_EQ(n.doubles_a, o.doubles_a);
    EXPECT_EQ(n.doubles_b, o.doubles_b);
    EXPECT_EQ(n.triples, o.triples);
    ASSERT_GT(o.triples, 0u);
  }
  EXPECT_THROW(heralded_counts(TimeTagStream{}, {0}, {0}, {1}, -1, 1), InvalidArgument);
}

TEST(Heralded, FormulaAndErrors) {
  const HeraldedCounts n{1000, 100, 50, 2};
  const auto g = heralded_g2_from_counts(n);
  EXPECT_DOUBLE_EQ(g.value, 2.0 * 1000.0 / (100.0 * 50.0));
  EXPECT_DOUBLE_EQ(heralded_g2_from_counts({1000, 100, 50, 0}).error, 1000.0 / 5000.0);
  try {
    heralded_g2_from_counts({1000, 0, 50, 0});
    FAIL();
  } catch (const AnalysisError& e) {
    EXPECT_EQ(e.kind(), AnalysisError::Kind::UndefinedStatistics);
  }
}

TEST(Heralded, PoissonHeraldGivesUnity) {
  // Uncorrelated light on all three channels: conditioning changes nothing.
  const auto s = poisson_stream(5, {1000.0, 200000.0, 200000.0}, 20 * kPsPerSecond);
  const auto g = heralded_g2_zero(s, 0, 1, 2, 500'000);
  EXPECT_NEAR(g.value, 1.0, 5.0 * g.error);
}

TEST(CauchySchwarz, MatchesOracleComposition) {
  const auto s = random_stream(30, 1000, 4, 5'000'000);
  CauchySchwarzOptions opt;
  opt.bin_width = 5000;
  opt.tau_min = -100'000;
  opt.tau_max = 100'000;
  opt.auto_half_window = 50'000;
  const auto r = cauchy_schwarz(s, opt);
  const double T = 5'000'000.0;
  auto auto_oracle = [&](Channel a, Channel b) {
    const auto c = oracle_histogram(s, {a}, {b}, 100'000, -50'000, 50'000)[0];
    return static_cast<double>(c) / (singles(s, {a}) * singles(s, {b}) * 100'000.0 / T);
  };
  const double d = auto_oracle(0, 3) * auto_oracle(1, 2);
  const auto cross = oracle_histogram(s, {0, 3}, {1, 2}, 5000, -100'000, 100'000);
  const double level = singles(s, {0, 3}) * singles(s, {1, 2}) * 5000.0 / T;
  ASSERT_EQ(r.size(), cross.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double g = static_cast<double>(cross[k]) / level;
    EXPECT_NEAR(r.values[k], g * g / d, 1e-12 * std::max(1.0, g * g / d));
  }
}

TEST(CauchySchwarz, ClassicalStreamsNoViolation) {
  const auto s = poisson_stream(6, {30000.0, 20000.0, 20000.0, 30000.0}, 5 * kPsPerSecond);
  const auto r = cauchy_schwarz(s, {});
  for (std::size_t k = 0; k < r.size(); ++k) EXPECT_LT(r.values[k] - 1.0, 5.0 * r.errors[k]) << r.tau[k];
}

TEST(CauchySchwarz, UndefinedWhenAutocorrelationVanishes) {
  // Channels 0/3 never coincide within the window: g_ii(0) = 0.
  const TimeTagStream s({{0, 0}, {10'000'000, 3}, {10'000'100, 1}, {10'000'200, 2}}, 20'000'000);
  CauchySchwarzOptions opt;
  opt.auto_half_window = 1'000'000;
  const auto r = cauchy_schwarz(s, opt);
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_FALSE(r.defined[k]);
    EXPECT_TRUE(std::isnan(r.values[k]));
  }
}

TEST(Waveform, MatchesDelayHistogramOracle) {
  const auto s = random_stream(40, 1000, 2, 5'000'000);
  const auto w = reconstruct_waveform(s, {0}, {1}, 2000, -60'000, 60'000);
  const auto o = oracle_histogram(s, {0}, {1}, 2000, -60'000, 60'000);
  ASSERT_EQ(w.size(), o.size());
  for (std::size_t k = 0; k < o.size(); ++k) {
    EXPECT_EQ(w.counts[k], static_cast<double>(o[k]));
    EXPECT_EQ(w.errors[k], std::sqrt(static_cast<double>(o[k])));
  }
  EXPECT_DOUBLE_EQ(w.start, -60.0);
  EXPECT_DOUBLE_EQ(w.bin_width, 2.0);
}

TEST(Waveform, CosineSimilarityProperties) {
  TemporalWaveform a{1.0, 0.0, {1, 2, 3, 0, 0}, {}}, b{1.0, 0.0, {0, 0, 0, 4, 5}, {}};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  TemporalWaveform z{1.0, 0.0, {0, 0, 0, 0, 0}, {}};
  EXPECT_THROW(cosine_similarity(a, z), AnalysisError);
  TemporalWaveform shifted{1.0, 0.5, {1, 2, 3, 0, 0}, {}};
  EXPECT_THROW(cosine_similarity(a, shifted), AnalysisError);
}

TEST(Waveform, ResampleConservesCounts) {
  TemporalWaveform w{1.0, -10.0, std::vector<double>(20, 3.0), std::vector<double>(20, std::sqrt(3.0))};
  const auto r = resample(w, -10.0, 4.0, 5);
  for (double c : r.counts) EXPECT_DOUBLE_EQ(c, 12.0);
  const auto half = resample(w, -9.5, 2.0, 9);
  EXPECT_DOUBLE_EQ(half.total(), 3.0 * 18.0);
}

TEST(Waveform, FitRecoversUnshapedFwhm) {
  ExperimentSetup setup = ideal_setup();
  setup.source.pair_rate = 20000.0;
  const auto s = run_experiment(setup, 10 * kPsPerSecond, 3).merged();
  const auto w = reconstruct_waveform(s, {0}, {1, 2}, 2000, -400'000, 400'000);
  const auto fit = fit_waveform(w, WavepacketShape::DoubleExponential);
  EXPECT_NEAR(fit.amplitude.fwhm, 50.0, 3.0);
  EXPECT_NEAR(fit.amplitude.offset, 0.0, 2.0);
}
