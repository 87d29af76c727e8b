#pragma once

// Photon-level transforms after the modulator: plasmonic sample, beam
// splitter and single-photon detectors. Every loss is a Bernoulli thinning
// keyed on the photon id, so the same photon meets the same fate in any run
// sharing the seed, regardless of what else is in the stream.

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "qplas/core/rng.hpp"
#include "qplas/core/types.hpp"
#include "qplas/source/pair_source.hpp"
#include "qplas/spectrum/fano.hpp"

namespace qplas {

struct Photon {
  TimePs time = 0;
  std::uint64_t id = 0;

  friend constexpr bool operator==(const Photon&, const Photon&) = default;
};

inline std::vector<Photon> idler_photons(const std::vector<PairEvent>& events) {
  std::vector<Photon> out;
  out.reserve(events.size());
  for (const auto& e : events)
    if (e.has_idler_photon()) out.push_back({e.idler_time, e.id});
  return out;
}

inline std::vector<Photon> signal_photons(const std::vector<PairEvent>& events) {
  std::vector<Photon> out;
  out.reserve(events.size());
  for (const auto& e : events)
    if (e.has_signal_photon()) out.push_back({e.signal_time, e.id});
  return out;
}

struct SampleConfig {
  std::shared_ptr<const spectrum::TransmissionSpectrum> spectrum;
  double photon_wavelength = 795.0;  // nm
  double overall_conversion = 0.44;
  double background_suppression = 1.0;

  void validate() const {
    if (!(photon_wavelength > 0.0)) throw InvalidArgument("sample.photon_wavelength must be > 0");
    if (!(overall_conversion >= 0.0 && overall_conversion <= 1.0))
      throw InvalidArgument("sample.overall_conversion must lie in [0, 1]");
    if (!(background_suppression >= 0.0 && background_suppression <= 1.0))
      throw InvalidArgument("sample.background_suppression must lie in [0, 1]");
  }
};

/// Transmission through the nanohole array. The photon bandwidth is many
/// orders of magnitude below the plasmon linewidth, so the sample acts as a
/// scalar survival probability; broadband fluorescence is further attenuated.
inline std::vector<PairEvent> apply_sample(std::vector<PairEvent> events, const SampleConfig& s, const RngSpec& rng) {
  s.validate();
  if (!s.spectrum) throw DomainError("sample has no transmission spectrum");
  if (!s.spectrum->contains(s.photon_wavelength))
    throw DomainError("photon wavelength " + std::to_string(s.photon_wavelength) + " nm outside spectrum domain " +
                      s.spectrum->domain());
  const double background_survival = s.overall_conversion * s.background_suppression;
  for (auto& e : events) {
    if (!e.has_signal_photon()) continue;
    const double p = e.kind == PairKind::BackgroundSignal ? background_survival : s.overall_conversion;
    if (uniform_at(rng, e.id) >= p) e.signal_alive = false;
  }
  return events;
}

struct BeamsplitOutputs {
  std::vector<Photon> a;
  std::vector<Photon> b;
};

/// Routes each photon to output A with probability `ratio`, else to B.
inline BeamsplitOutputs beamsplit(const std::vector<Photon>& photons, double ratio, const RngSpec& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument("beam splitter ratio must lie in [0, 1]");
  BeamsplitOutputs out;
  out.a.reserve(static_cast<std::size_t>(static_cast<double>(photons.size()) * ratio) + 1);
  out.b.reserve(photons.size() - out.a.capacity() + 1);
  for (const auto& p : photons) (uniform_at(rng, p.id) < ratio ? out.a : out.b).push_back(p);
  return out;
}

struct DetectorConfig {
  double efficiency = 0.5;
  double dark_rate = 100.0;      // s^-1
  double jitter_sigma = 350.0;   // ps
  TimePs dead_time = 50'000;     // ps

  void validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw InvalidArgument("detector efficiency must lie in [0, 1]");
    if (!(dark_rate >= 0.0)) throw InvalidArgument("detector dark_rate must be >= 0");
    if (!(jitter_sigma >= 0.0)) throw InvalidArgument("detector jitter_sigma must be >= 0");
    if (dead_time < 0) throw InvalidArgument("detector dead_time must be >= 0");
  }

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

namespace detail {
enum DetectStream : std::uint64_t { kAccept = 101, kJitter, kDark };
}

/// Efficiency and jitter only; appends surviving tags that land in [0, duration].
inline void register_photons(const std::vector<Photon>& photons, const DetectorConfig& d, Channel channel,
                             TimePs duration, const RngSpec& rng, std::vector<TimeTag>& out) {
  const RngSpec accept = rng.derive(detail::kAccept);
  const RngSpec jitter = rng.derive(detail::kJitter);
  for (const auto& p : photons) {
    if (uniform_at(accept, p.id) >= d.efficiency) continue;
    TimePs t = p.time;
    if (d.jitter_sigma > 0.0) t += static_cast<TimePs>(std::llround(d.jitter_sigma * normal_at(jitter, p.id)));
    if (t >= 0 && t <= duration) out.push_back({t, channel});
  }
}

inline void add_dark_counts(const DetectorConfig& d, Channel channel, TimePs duration, const RngSpec& rng,
                            std::vector<TimeTag>& out) {
  if (d.dark_rate <= 0.0 || duration <= 0) return;
  RngStream stream(rng.derive(detail::kDark));
  const double mean_ps = static_cast<double>(kPsPerSecond) / d.dark_rate;
  double t = 0.0;
  for (;;) {
    t += stream.exponential(mean_ps);
    if (t > static_cast<double>(duration)) break;
    out.push_back({static_cast<TimePs>(std::floor(t)), channel});
  }
}

/// Non-paralyzable dead time on a sorted single-channel tag list.
inline void apply_dead_time(std::vector<TimeTag>& tags, TimePs dead_time) {
  if (dead_time <= 0 || tags.empty()) return;
  std::size_t kept = 1;
  TimePs last = tags.front().time;
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (tags[i].time - last < dead_time) continue;
    last = tags[i].time;
    tags[kept++] = tags[i];
  }
  tags.resize(kept);
}

/// Efficiency, Gaussian jitter, Poisson dark counts, then dead time.
inline TimeTagStream detect(const std::vector<Photon>& photons, const DetectorConfig& d, Channel channel,
                            TimePs duration, const RngSpec& rng) {
  d.validate();
  std::vector<TimeTag> tags;
  tags.reserve(photons.size());
  register_photons(photons, d, channel, duration, rng, tags);
  add_dark_counts(d, channel, duration, rng, tags);
  std::sort(tags.begin(), tags.end(), tag_order);
  apply_dead_time(tags, d.dead_time);
  return TimeTagStream(std::move(tags), duration);
}

}  // namespace qplas
