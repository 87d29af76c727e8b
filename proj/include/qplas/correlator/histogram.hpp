#pragma once

// Start-multi-stop coincidence histograms over a merged tag stream, and their
// normalization against the accidental-coincidence level.
//
// Bins are closed-open: bin k collects delays b - a in
// [tau_min + k bin_width, tau_min + (k+1) bin_width).

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qplas/core/types.hpp"

namespace qplas {

class ChannelSet {
public:
  ChannelSet() = default;
  ChannelSet(std::initializer_list<Channel> chs) {
    for (Channel c : chs) add(c);
  }
  explicit ChannelSet(const std::vector<Channel>& chs) {
    for (Channel c : chs) add(c);
  }

  void add(Channel c) {
    if (!member_[c]) channels_.push_back(c);
    member_[c] = true;
  }
  bool contains(Channel c) const noexcept { return member_[c]; }
  bool empty() const noexcept { return channels_.empty(); }
  const std::vector<Channel>& channels() const noexcept { return channels_; }

  bool intersects(const ChannelSet& other) const {
    for (Channel c : channels_)
      if (other.contains(c)) return true;
    return false;
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < channels_.size(); ++i) s += (i ? "," : "") + std::to_string(channels_[i]);
    return s + "}";
  }

private:
  std::array<bool, 256> member_{};
  std::vector<Channel> channels_;
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Half-open index range into a stream's tag vector.
struct TagRange {
  std::size_t begin = 0;
  std::size_t end = static_cast<std::size_t>(-1);
};

struct CorrelationHistogram {
  TimePs bin_width = 0;
  TimePs tau_min = 0;
  TimePs tau_max = 0;
  std::vector<std::uint64_t> counts;
  /// Start (A) tags that were histogrammed; stop (B) tags in the whole stream.
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  TimePs total_time = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double rate_a() const { return total_time > 0 ? static_cast<double>(singles_a) / ps_to_seconds(total_time) : 0.0; }
  double rate_b() const { return total_time > 0 ? static_cast<double>(singles_b) / ps_to_seconds(total_time) : 0.0; }
  /// An empty channel gives a zero histogram with zero rates; normalizing it fails.
  bool empty_channel() const noexcept { return singles_a == 0 || singles_b == 0; }
  TimePs bin_left(std::size_t k) const { return tau_min + static_cast<TimePs>(k) * bin_width; }
  double tau_center_ns(std::size_t k) const { return ps_to_ns(bin_left(k)) + 0.5 * ps_to_ns(bin_width); }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }

  friend bool operator==(const CorrelationHistogram&, const CorrelationHistogram&) = default;
};

namespace detail {

inline void check_window(TimePs bin_width, TimePs tau_min, TimePs tau_max) {
  if (bin_width <= 0) throw InvalidArgument("bin width must be > 0");
  if (tau_max <= tau_min) throw InvalidArgument("correlation window must have tau_max > tau_min");
  if (tau_min % bin_width != 0 || tau_max % bin_width != 0)
    throw InvalidArgument("correlation window bounds must be multiples of the bin width");
}

struct IndexedTime {
  TimePs time;
  std::size_t index;
};

inline std::vector<IndexedTime> select(const TimeTagStream& s, const ChannelSet& chs) {
  std::vector<IndexedTime> out;
  const auto& tags = s.tags();
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (chs.contains(tags[i].channel)) out.push_back({tags[i].time, i});
  return out;
}

}  // namespace detail

/// Histogram of b - a over all pairs (a in A, b in B) with a taken from
/// `range`. The same tag is never paired with itself, so A and B may share
/// channels. One forward pass: the stop pointer only ever advances.
inline CorrelationHistogram coincidence_histogram(const TimeTagStream& stream, const ChannelSet& a,
                                                  const ChannelSet& b, TimePs bin_width, TimePs tau_min,
                                                  TimePs tau_max, TagRange range = {}) {
  detail::check_window(bin_width, tau_min, tau_max);
  if (a.empty() || b.empty()) throw InvalidArgument("channel sets must not be empty");

  CorrelationHistogram h;
  h.bin_width = bin_width;
  h.tau_min = tau_min;
  h.tau_max = tau_max;
  h.counts.assign(static_cast<std::size_t>((tau_max - tau_min) / bin_width), 0);
  h.total_time = stream.duration();

  const auto stops = detail::select(stream, b);
  h.singles_b = stops.size();
  const auto& tags = stream.tags();
  const std::size_t end = std::min(range.end, tags.size());
  std::size_t lower = 0;
  for (std::size_t i = std::min(range.begin, end); i < end; ++i) {
    if (!a.contains(tags[i].channel)) continue;
    ++h.singles_a;
    const TimePs t = tags[i].time;
    while (lower < stops.size() && stops[lower].time - t < tau_min) ++lower;
    for (std::size_t j = lower; j < stops.size(); ++j) {
      const TimePs d = stops[j].time - t;
      if (d >= tau_max) break;
      if (stops[j].index == i) continue;
      ++h.counts[static_cast<std::size_t>((d - tau_min) / bin_width)];
    }
  }
  return h;
}

inline CorrelationHistogram coincidence_histogram(const TimeTagStream& stream, Channel a, Channel b,
                                                  TimePs bin_width, TimePs tau_min, TimePs tau_max) {
  return coincidence_histogram(stream, ChannelSet{a}, ChannelSet{b}, bin_width, tau_min, tau_max);
}

/// Sums partial histograms taken over disjoint start-tag ranges of one stream.
inline CorrelationHistogram merge(const CorrelationHistogram& x, const CorrelationHistogram& y) {
  if (x.bin_width != y.bin_width || x.tau_min != y.tau_min || x.tau_max != y.tau_max)
    throw AnalysisError(AnalysisError::Kind::GridMismatch, "cannot merge histograms with different bin grids");
  if (x.total_time != y.total_time || x.singles_b != y.singles_b)
    throw InvalidArgument("cannot merge histograms of different streams");
  CorrelationHistogram out = x;
  for (std::size_t k = 0; k < out.counts.size(); ++k) out.counts[k] += y.counts[k];
  out.singles_a += y.singles_a;
  return out;
}

/// Splits the start tags into `parts` contiguous ranges, histograms each and
/// merges; identical to the single-pass result.
inline CorrelationHistogram coincidence_histogram_partitioned(const TimeTagStream& stream, const ChannelSet& a,
                                                              const ChannelSet& b, TimePs bin_width,
                                                              TimePs tau_min, TimePs tau_max, std::size_t parts) {
  if (parts == 0) throw InvalidArgument("partition count must be > 0");
  const std::size_t n = stream.size();
  std::optional<CorrelationHistogram> acc;
  for (std::size_t p = 0; p < parts; ++p) {
    const TagRange r{n * p / parts, n * (p + 1) / parts};
    auto h = coincidence_histogram(stream, a, b, bin_width, tau_min, tau_max, r);
    acc = acc ? merge(*acc, h) : std::move(h);
  }
  return *acc;
}

/// Normalized correlation g(tau) with first-order Poisson errors.
struct CorrelationCurve {
  double bin_width = 0.0;  // ns
  std::vector<double> tau;  // bin centres, ns
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<std::uint64_t> counts;
  /// Bins with fewer than kLowStatisticsCounts raw counts.
  std::vector<bool> low_statistics;
  /// Mean g over the outer quarter of the window on each side; a cross-check
  /// of the accidental-rate normalization, which should give about 1 there.
  std::optional<Estimate> long_delay_baseline;

  std::size_t size() const noexcept { return values.size(); }
};

inline constexpr std::uint64_t kLowStatisticsCounts = 10;

/// Expected accidental coincidences per bin: N_A N_B bin / T.
inline double accidental_level(const CorrelationHistogram& h) {
  if (h.empty_channel() || h.total_time <= 0)
    throw AnalysisError(AnalysisError::Kind::UndefinedNormalization,
                        "undefined normalization: a channel has zero singles rate");
  return static_cast<double>(h.singles_a) * static_cast<double>(h.singles_b) * static_cast<double>(h.bin_width) /
         static_cast<double>(h.total_time);
}

/// g[k] = counts[k] / (rate_A rate_B bin T). Empty bins carry a one-count error.
inline CorrelationCurve normalize(const CorrelationHistogram& h) {
  const double norm = accidental_level(h);
  CorrelationCurve g;
  g.bin_width = ps_to_ns(h.bin_width);
  g.counts = h.counts;
  double far_sum = 0.0;
  std::uint64_t far_counts = 0, far_bins = 0;
  const double reach = std::max(std::abs(ps_to_ns(h.tau_min)), std::abs(ps_to_ns(h.tau_max)));
  for (std::size_t k = 0; k < h.bins(); ++k) {
    const auto c = static_cast<double>(h.counts[k]);
    g.tau.push_back(h.tau_center_ns(k));
    g.values.push_back(c / norm);
    g.errors.push_back(std::sqrt(std::max(c, 1.0)) / norm);
    g.low_statistics.push_back(h.counts[k] < kLowStatisticsCounts);
    if (std::abs(g.tau.back()) >= 0.75 * reach) {
      far_sum += c;
      far_counts += h.counts[k];
      ++far_bins;
    }
  }
  if (far_bins > 0) {
    const double denom = norm * static_cast<double>(far_bins);
    g.long_delay_baseline =
        Estimate{far_sum / denom, std::sqrt(std::max(static_cast<double>(far_counts), 1.0)) / denom};
  }
  return g;
}

}  // namespace qplas
