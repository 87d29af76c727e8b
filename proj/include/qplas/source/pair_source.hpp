#pragma once

// Monte Carlo emission of time-energy entangled signal/idler pairs from a
// cavity-enhanced down-conversion source, plus the two contaminations that
// spoil single-photon statistics: occasional second pairs inside one
// coherence window, and uncorrelated broadband fluorescence on either arm.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "qplas/core/rng.hpp"
#include "qplas/core/types.hpp"
#include "qplas/core/wavepacket.hpp"

namespace qplas {

struct SourceConfig {
  double pair_rate = 2000.0;  // s^-1
  BiphotonAmplitude amplitude{};
  double multipair_prob = 1.0e-4;
  double background_rate_signal = 0.0;  // s^-1
  double background_rate_idler = 0.0;   // s^-1

  void validate() const {
    if (!(pair_rate > 0.0)) throw InvalidArgument("source.pair_rate must be > 0");
    amplitude.validate();
    if (!(multipair_prob >= 0.0 && multipair_prob < 1.0))
      throw InvalidArgument("source.multipair_prob must lie in [0, 1)");
    if (!(background_rate_signal >= 0.0)) throw InvalidArgument("source.background_rate_signal must be >= 0");
    if (!(background_rate_idler >= 0.0)) throw InvalidArgument("source.background_rate_idler must be >= 0");
  }

  friend bool operator==(const SourceConfig&, const SourceConfig&) = default;
};

enum class PairKind : std::uint8_t { TruePair, MultipairExtra, BackgroundSignal, BackgroundIdler };

inline std::string to_string(PairKind k) {
  switch (k) {
    case PairKind::TruePair: return "true_pair";
    case PairKind::MultipairExtra: return "multipair_extra";
    case PairKind::BackgroundSignal: return "background_signal";
    case PairKind::BackgroundIdler: return "background_idler";
  }
  return "unknown";
}

/// One emission. For BackgroundSignal, idler_time is not a photon but the
/// modulator trigger reference: the latest idler-arm emission at or before
/// the signal photon.
struct PairEvent {
  TimePs idler_time = 0;
  TimePs signal_time = 0;
  PairKind kind = PairKind::TruePair;
  std::uint64_t id = 0;
  bool signal_alive = true;

  bool has_idler_photon() const noexcept { return kind != PairKind::BackgroundSignal; }
  bool has_signal_photon() const noexcept { return kind != PairKind::BackgroundIdler && signal_alive; }
  TimePs relative_delay() const noexcept { return signal_time - idler_time; }

  friend bool operator==(const PairEvent&, const PairEvent&) = default;
};

namespace detail {
enum SourceStream : std::uint64_t {
  kArrivals = 1,
  kDelay,
  kMultipairDraw,
  kMultipairWindow,
  kMultipairDelay,
  kBackgroundIdler,
  kBackgroundSignal,
};

inline void poisson_arrivals(double rate, TimePs begin, TimePs end, RngStream& rng, std::vector<TimePs>& out) {
  if (rate <= 0.0) return;
  const double mean_ps = static_cast<double>(kPsPerSecond) / rate;
  double t = static_cast<double>(begin);
  for (;;) {
    t += rng.exponential(mean_ps);
    if (t >= static_cast<double>(end)) break;
    out.push_back(static_cast<TimePs>(std::floor(t)));
  }
}
}  // namespace detail

/// Emissions with idler times in [begin, end). Event ids are id_base + k in
/// creation order; downstream per-event decisions are keyed on these ids.
inline std::vector<PairEvent> generate_pairs_segment(const SourceConfig& cfg, TimePs begin, TimePs end,
                                                     const RngSpec& rng, std::uint64_t id_base) {
  cfg.validate();
  std::vector<PairEvent> events;
  if (end <= begin) return events;

  std::uint64_t next_id = id_base;
  std::vector<TimePs> times;

  RngStream arrivals(rng.derive(detail::kArrivals));
  detail::poisson_arrivals(cfg.pair_rate, begin, end, arrivals, times);
  events.reserve(times.size() + times.size() / 64 + 16);

  const RngSpec delay_rng = rng.derive(detail::kDelay);
  const RngSpec multi_rng = rng.derive(detail::kMultipairDraw);
  const RngSpec window_rng = rng.derive(detail::kMultipairWindow);
  const RngSpec multi_delay_rng = rng.derive(detail::kMultipairDelay);
  const TimePs window_ps = ns_to_ps(cfg.amplitude.fwhm);

  for (TimePs idler : times) {
    const std::uint64_t id = next_id++;
    const TimePs signal = idler + ns_to_ps(sample_delay_at(cfg.amplitude, delay_rng, id));
    if (signal >= 0) events.push_back({idler, signal, PairKind::TruePair, id, true});

    if (cfg.multipair_prob > 0.0 && uniform_at(multi_rng, id) < cfg.multipair_prob) {
      const std::uint64_t extra = next_id++;
      const TimePs extra_idler =
          idler + static_cast<TimePs>(std::floor(uniform_at(window_rng, extra) * static_cast<double>(window_ps)));
      const TimePs extra_signal = extra_idler + ns_to_ps(sample_delay_at(cfg.amplitude, multi_delay_rng, extra));
      if (extra_signal >= 0) events.push_back({extra_idler, extra_signal, PairKind::MultipairExtra, extra, true});
    }
  }

  times.clear();
  RngStream bg_idler(rng.derive(detail::kBackgroundIdler));
  detail::poisson_arrivals(cfg.background_rate_idler, begin, end, bg_idler, times);
  for (TimePs t : times) events.push_back({t, t, PairKind::BackgroundIdler, next_id++, false});

  std::vector<TimePs> triggers;
  triggers.reserve(events.size());
  for (const auto& e : events) triggers.push_back(e.idler_time);
  std::sort(triggers.begin(), triggers.end());

  times.clear();
  RngStream bg_signal(rng.derive(detail::kBackgroundSignal));
  detail::poisson_arrivals(cfg.background_rate_signal, begin, end, bg_signal, times);
  for (TimePs t : times) {
    auto it = std::upper_bound(triggers.begin(), triggers.end(), t);
    const TimePs reference = it == triggers.begin() ? begin : *std::prev(it);
    events.push_back({reference, t, PairKind::BackgroundSignal, next_id++, true});
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const PairEvent& a, const PairEvent& b) { return a.idler_time < b.idler_time; });
  return events;
}

/// Emissions over [0, duration). A zero duration yields no events.
inline std::vector<PairEvent> generate_pairs(const SourceConfig& cfg, TimePs duration, const RngSpec& rng) {
  if (duration < 0) throw InvalidArgument("duration must be >= 0");
  return generate_pairs_segment(cfg, 0, duration, rng, 0);
}

}  // namespace qplas
