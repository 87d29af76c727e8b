#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qplas/core/error.hpp"

namespace qplas {

/// Integer picoseconds since stream origin.
using TimePs = std::int64_t;
using Channel = std::uint8_t;

inline constexpr TimePs kPsPerNs = 1000;
inline constexpr TimePs kPsPerSecond = 1'000'000'000'000;

inline constexpr double ps_to_ns(TimePs t) { return static_cast<double>(t) / kPsPerNs; }
inline TimePs ns_to_ps(double ns) { return static_cast<TimePs>(std::llround(ns * kPsPerNs)); }
inline constexpr double ps_to_seconds(TimePs t) {
  return static_cast<double>(t) / static_cast<double>(kPsPerSecond);
}

/// Conventional channel assignment of the simulated setup.
namespace channels {
inline constexpr Channel kHerald = 0;       // idler detector D1
inline constexpr Channel kReemitA = 1;      // D2, first beam-splitter output
inline constexpr Channel kReemitB = 2;      // D3, second beam-splitter output
inline constexpr Channel kHeraldSplit = 3;  // second idler detector when the idler is split
}  // namespace channels

struct TimeTag {
  TimePs time = 0;
  Channel channel = 0;

  friend constexpr bool operator==(const TimeTag&, const TimeTag&) = default;
};

inline constexpr bool tag_order(const TimeTag& a, const TimeTag& b) {
  return a.time != b.time ? a.time < b.time : a.channel < b.channel;
}

/// Sorted, channel-stamped detection events over [0, duration].
class TimeTagStream {
public:
  TimeTagStream() = default;

  /// Validates ordering and bounds; throws InvalidArgument otherwise.
  TimeTagStream(std::vector<TimeTag> tags, TimePs duration)
      : tags_(std::move(tags)), duration_(duration) {
    if (duration_ < 0) throw InvalidArgument("stream duration must be >= 0");
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      if (tags_[i].time < 0 || tags_[i].time > duration_)
        throw InvalidArgument("tag " + std::to_string(i) + " lies outside [0, duration]");
      if (i > 0 && tags_[i].time < tags_[i - 1].time)
        throw InvalidArgument("tags not sorted at index " + std::to_string(i));
    }
  }

  /// Sorts the tags first.
  static TimeTagStream from_unsorted(std::vector<TimeTag> tags, TimePs duration) {
    std::sort(tags.begin(), tags.end(), tag_order);
    return TimeTagStream(std::move(tags), duration);
  }

  const std::vector<TimeTag>& tags() const noexcept { return tags_; }
  TimePs duration() const noexcept { return duration_; }
  std::size_t size() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return tags_.empty(); }

  std::size_t count(Channel ch) const {
    return static_cast<std::size_t>(
        std::count_if(tags_.begin(), tags_.end(), [ch](const TimeTag& t) { return t.channel == ch; }));
  }

  /// Largest channel number present plus one (0 for an empty stream).
  std::size_t channel_count() const {
    int highest = -1;
    for (const auto& t : tags_) highest = std::max<int>(highest, t.channel);
    return static_cast<std::size_t>(highest + 1);
  }

  friend bool operator==(const TimeTagStream&, const TimeTagStream&) = default;

private:
  std::vector<TimeTag> tags_;
  TimePs duration_ = 0;
};

/// Merges per-channel streams into one stream ordered by (time, channel).
inline TimeTagStream merge_streams(std::span<const TimeTagStream> parts) {
  std::vector<TimeTag> all;
  TimePs duration = 0;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (const auto& p : parts) {
    all.insert(all.end(), p.tags().begin(), p.tags().end());
    duration = std::max(duration, p.duration());
  }
  std::sort(all.begin(), all.end(), tag_order);
  return TimeTagStream(std::move(all), duration);
}

enum class WavepacketShape { DoubleExponential, ExponentialDecay, Gaussian };

inline std::string to_string(WavepacketShape s) {
  switch (s) {
    case WavepacketShape::DoubleExponential: return "double_exponential";
    case WavepacketShape::ExponentialDecay: return "exponential_decay";
    case WavepacketShape::Gaussian: return "gaussian";
  }
  return "unknown";
}

/// Signal-idler temporal correlation |psi(tau)|^2, parametrized by its FWHM.
struct BiphotonAmplitude {
  WavepacketShape shape = WavepacketShape::DoubleExponential;
  double fwhm = 50.0;   // ns
  double offset = 0.0;  // ns; peak (or leading edge) relative to the herald

  void validate() const {
    if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw InvalidArgument("wavepacket fwhm must be > 0");
    if (!std::isfinite(offset)) throw InvalidArgument("wavepacket offset must be finite");
  }

  friend bool operator==(const BiphotonAmplitude&, const BiphotonAmplitude&) = default;
};

/// Binned herald-conditioned delay histogram with Poisson error bars.
struct TemporalWaveform {
  double bin_width = 1.0;  // ns
  double start = 0.0;      // ns, left edge of bin 0
  std::vector<double> counts;
  std::vector<double> errors;

  std::size_t size() const noexcept { return counts.size(); }
  double bin_center(std::size_t k) const { return start + (static_cast<double>(k) + 0.5) * bin_width; }
  double total() const {
    double s = 0.0;
    for (double c : counts) s += c;
    return s;
  }
  bool empty() const { return total() == 0.0; }
};

}  // namespace qplas
