#pragma once

// End-to-end simulation of the setup: pair source -> (idler arm) detector D1;
// (signal arm) modulator -> nanohole sample -> 50:50 beam splitter -> D2, D3.
//
// The run is generated in fixed time segments, each with its own source
// stream, so memory stays bounded for long acquisitions. All downstream
// decisions are keyed on event ids and therefore independent of the
// segmentation. Dark counts and dead time are applied once per channel over
// the merged run.

#include <array>
#include <map>
#include <memory>
#include <vector>

#include "qplas/optics/chain.hpp"
#include "qplas/optics/modulation.hpp"
#include "qplas/source/pair_source.hpp"

namespace qplas {

inline std::shared_ptr<const spectrum::TransmissionSpectrum> default_sample_spectrum() {
  static const auto spectrum = std::make_shared<const spectrum::TransmissionSpectrum>(spectrum::fano_spectrum(
      spectrum::ArrayGeometry{}, spectrum::measured_sample_resonance(), spectrum::wavelength_grid(600.0, 1000.0, 1.0)));
  return spectrum;
}

struct ExperimentSetup {
  SourceConfig source{};
  ModulationFunction modulation{};
  SampleConfig sample{default_sample_spectrum()};
  /// False measures the incident photons: the sample is taken out of the path.
  bool sample_in_path = true;
  /// Splits the idler arm 50:50 onto channels 0 and 3 (needed for g_ii(0)).
  bool idler_split = false;
  double beamsplitter_ratio = 0.5;
  std::array<DetectorConfig, 4> detectors{};
  TimePs segment = kPsPerSecond;

  void validate() const {
    source.validate();
    sample.validate();
    for (const auto& d : detectors) d.validate();
    if (!(beamsplitter_ratio >= 0.0 && beamsplitter_ratio <= 1.0))
      throw InvalidArgument("beam splitter ratio must lie in [0, 1]");
    if (segment <= 0) throw InvalidArgument("simulation segment must be > 0");
  }
};

/// Setup with no multipair emission, no fluorescence and no dark counts.
inline ExperimentSetup ideal_setup() {
  ExperimentSetup s;
  s.source.multipair_prob = 0.0;
  s.source.background_rate_signal = 0.0;
  s.source.background_rate_idler = 0.0;
  for (auto& d : s.detectors) d.dark_rate = 0.0;
  return s;
}

struct ExperimentStats {
  std::size_t true_pairs = 0;
  std::size_t multipair_extras = 0;
  std::size_t background_signal = 0;
  std::size_t background_idler = 0;
  std::size_t modulation_out_of_grid = 0;
};

struct ExperimentRun {
  std::map<Channel, TimeTagStream> channels;
  ExperimentStats stats;
  TimePs duration = 0;

  TimeTagStream merged() const {
    std::vector<TimeTagStream> parts;
    for (const auto& [ch, s] : channels) parts.push_back(s);
    if (parts.empty()) return TimeTagStream({}, duration);
    return merge_streams(parts);
  }
};

namespace detail {
enum ExperimentStream : std::uint64_t {
  kSource = 201,
  kModulation,
  kSample,
  kBeamsplit,
  kIdlerSplit,
  kDetect,
};
inline constexpr int kSegmentIdShift = 40;
}  // namespace detail

/// Deterministic in (setup, duration, seed).
inline ExperimentRun run_experiment(const ExperimentSetup& setup, TimePs duration, std::uint64_t seed) {
  setup.validate();
  if (duration < 0) throw InvalidArgument("duration must be >= 0");

  const RngSpec root{seed, 0};
  const RngSpec source_rng = root.derive(detail::kSource);
  const RngSpec modulation_rng = root.derive(detail::kModulation);
  const RngSpec sample_rng = root.derive(detail::kSample);
  const RngSpec split_rng = root.derive(detail::kBeamsplit);
  const RngSpec idler_split_rng = root.derive(detail::kIdlerSplit);
  const RngSpec detect_rng = root.derive(detail::kDetect);
  auto channel_rng = [&](Channel ch) { return detect_rng.derive(ch); };

  std::vector<Channel> used{channels::kHerald, channels::kReemitA, channels::kReemitB};
  if (setup.idler_split) used.push_back(channels::kHeraldSplit);
  std::map<Channel, std::vector<TimeTag>> raw;
  for (Channel ch : used) raw[ch];

  ExperimentRun run;
  run.duration = duration;
  std::uint64_t segment_index = 0;
  for (TimePs begin = 0; begin < duration; begin += setup.segment, ++segment_index) {
    const TimePs end = std::min(duration, begin + setup.segment);
    auto events = generate_pairs_segment(setup.source, begin, end, source_rng.derive(segment_index),
                                         segment_index << detail::kSegmentIdShift);
    for (const auto& e : events) {
      switch (e.kind) {
        case PairKind::TruePair: ++run.stats.true_pairs; break;
        case PairKind::MultipairExtra: ++run.stats.multipair_extras; break;
        case PairKind::BackgroundSignal: ++run.stats.background_signal; break;
        case PairKind::BackgroundIdler: ++run.stats.background_idler; break;
      }
    }

    const auto idlers = idler_photons(events);
    if (setup.idler_split) {
      const auto split = beamsplit(idlers, 0.5, idler_split_rng);
      register_photons(split.a, setup.detectors[channels::kHerald], channels::kHerald, duration,
                       channel_rng(channels::kHerald), raw[channels::kHerald]);
      register_photons(split.b, setup.detectors[channels::kHeraldSplit], channels::kHeraldSplit, duration,
                       channel_rng(channels::kHeraldSplit), raw[channels::kHeraldSplit]);
    } else {
      register_photons(idlers, setup.detectors[channels::kHerald], channels::kHerald, duration,
                       channel_rng(channels::kHerald), raw[channels::kHerald]);
    }

    ModulationStats mod_stats;
    events = apply_modulation(std::move(events), setup.modulation, modulation_rng, &mod_stats);
    run.stats.modulation_out_of_grid += mod_stats.out_of_grid;
    if (setup.sample_in_path) events = apply_sample(std::move(events), setup.sample, sample_rng);

    const auto split = beamsplit(signal_photons(events), setup.beamsplitter_ratio, split_rng);
    register_photons(split.a, setup.detectors[channels::kReemitA], channels::kReemitA, duration,
                     channel_rng(channels::kReemitA), raw[channels::kReemitA]);
    register_photons(split.b, setup.detectors[channels::kReemitB], channels::kReemitB, duration,
                     channel_rng(channels::kReemitB), raw[channels::kReemitB]);
  }

  for (auto& [ch, tags] : raw) {
    const auto& det = setup.detectors[ch];
    add_dark_counts(det, ch, duration, channel_rng(ch), tags);
    std::sort(tags.begin(), tags.end(), tag_order);
    apply_dead_time(tags, det.dead_time);
    run.channels.emplace(ch, TimeTagStream(std::move(tags), duration));
  }
  return run;
}

}  // namespace qplas
