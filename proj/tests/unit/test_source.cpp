#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "qplas/source/pair_source.hpp"

using namespace qplas;

namespace {
std::size_t count_kind(const std::vector<PairEvent>& ev, PairKind k) {
  return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [k](const auto& e) { return e.kind == k; }));
}
}  // namespace

TEST(PairSource, RateWithinPoissonBounds) {
  SourceConfig cfg;
  cfg.multipair_prob = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ev = generate_pairs(cfg, kPsPerSecond, {seed, 0});
    const double n = static_cast<double>(count_kind(ev, PairKind::TruePair));
    EXPECT_NEAR(n, 2000.0, 5.0 * std::sqrt(2000.0));
  }
}

TEST(PairSource, ZeroDurationIsEmpty) {
  EXPECT_TRUE(generate_pairs(SourceConfig{}, 0, {1, 0}).empty());
  EXPECT_THROW(generate_pairs(SourceConfig{}, -1, {1, 0}), InvalidArgument);
}

TEST(PairSource, Deterministic) {
  SourceConfig cfg;
  cfg.background_rate_signal = 500.0;
  cfg.background_rate_idler = 300.0;
  EXPECT_EQ(generate_pairs(cfg, kPsPerSecond, {9, 1}), generate_pairs(cfg, kPsPerSecond, {9, 1}));
  EXPECT_NE(generate_pairs(cfg, kPsPerSecond, {9, 1}), generate_pairs(cfg, kPsPerSecond, {10, 1}));
}

TEST(PairSource, SortedByIdlerTimeWithUniqueIds) {
  SourceConfig cfg;
  cfg.multipair_prob = 0.01;
  cfg.background_rate_signal = 1000.0;
  cfg.background_rate_idler = 1000.0;
  const auto ev = generate_pairs(cfg, kPsPerSecond, {2, 0});
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.idler_time < b.idler_time; }));
  std::vector<std::uint64_t> ids;
  for (const auto& e : ev) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
  EXPECT_NEAR(static_cast<double>(count_kind(ev, PairKind::BackgroundSignal)), 1000.0, 5.0 * std::sqrt(1000.0));
  EXPECT_NEAR(static_cast<double>(count_kind(ev, PairKind::BackgroundIdler)), 1000.0, 5.0 * std::sqrt(1000.0));
  EXPECT_NEAR(static_cast<double>(count_kind(ev, PairKind::MultipairExtra)), 20.0, 5.0 * std::sqrt(20.0));
}

TEST(PairSource, BackgroundKindsCarryOnePhoton) {
  SourceConfig cfg;
  cfg.background_rate_signal = 1000.0;
  cfg.background_rate_idler = 1000.0;
  for (const auto& e : generate_pairs(cfg, kPsPerSecond / 10, {3, 0})) {
    if (e.kind == PairKind::BackgroundIdler) {
      EXPECT_FALSE(e.has_signal_photon());
    }
    if (e.kind == PairKind::BackgroundSignal) {
      EXPECT_FALSE(e.has_idler_photon());
      EXPECT_LE(e.idler_time, e.signal_time);
    }
  }
}

TEST(PairSource, DelayHistogramMatchesDensityKs) {
  SourceConfig cfg;
  cfg.pair_rate = 1e6;
  cfg.multipair_prob = 0.0;
  const auto ev = generate_pairs(cfg, kPsPerSecond, {4, 0});
  std::vector<double> d;
  for (const auto& e : ev) d.push_back(ps_to_ns(e.relative_delay()));
  ASSERT_GT(d.size(), 990000u);
  std::sort(d.begin(), d.end());
  const double n = static_cast<double>(d.size());
  const double tau = 50.0 / (2.0 * std::log(2.0));
  double dmax = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double f = d[i] < 0 ? 0.5 * std::exp(d[i] / tau) : 1.0 - 0.5 * std::exp(-d[i] / tau);
    dmax = std::max({dmax, f - i / n, (i + 1) / n - f});
  }
  // Delays are rounded to 1 ps, an O(1e-5) CDF shift far below the critical value.
  EXPECT_LT(dmax, 1.63 / std::sqrt(n));
}

TEST(PairSource, Validation) {
  SourceConfig cfg;
  cfg.pair_rate = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.multipair_prob = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}
