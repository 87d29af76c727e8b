#pragma once

// Flat `section.key = value` configuration. Blank lines and `#` comments are
// ignored; every key is optional and falls back to the documented default
// (the calibrated reproduction of the reference measurement). Durations take
// a unit suffix: ps, ns, us, ms or s.

#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qplas/optics/experiment.hpp"

namespace qplas::io {

/// Parse or validation failure; `line` is 0 when not attributable to a line.
class ConfigError : public Error {
public:
  ConfigError(std::size_t line, const std::string& what)
      : Error(line ? "config line " + std::to_string(line) + ": " + what : "config: " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

struct ModulationSpec {
  ModulationKind kind = ModulationKind::Identity;
  double edge = 0.0;    // ns, Heaviside
  double fwhm = 40.0;   // ns, Gaussian target
  double center = 0.0;  // ns, Gaussian target
  ModulationTable table{};

  friend bool operator==(const ModulationSpec&, const ModulationSpec&) = default;
};

struct SampleSpec {
  bool enabled = true;
  double photon_wavelength = 795.0;
  double overall_conversion = 0.44;
  double background_suppression = 0.69;
  spectrum::FanoParams resonance = spectrum::measured_sample_resonance();
  double spectrum_min = 600.0;
  double spectrum_max = 1000.0;
  double spectrum_step = 1.0;

  friend bool operator==(const SampleSpec&, const SampleSpec&) = default;
};

struct AnalysisConfig {
  TimePs bin_width = 1000;
  TimePs window = 504'000;         // correlation histograms span [-window, window)
  TimePs triple_window = 150'000;  // heralded g2 window half-width
  TimePs auto_window = 5'000'000;  // zero-delay autocorrelation half-width

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

/// Calibrated fluorescence rate on the signal arm, s^-1: together with the
/// default detectors and triple window it gives heralded g2(0) of about 0.019
/// for the incident photons.
inline constexpr double kCalibratedSignalBackground = 24500.0;

struct ExperimentConfig {
  SourceConfig source = [] {
    SourceConfig s;
    s.background_rate_signal = kCalibratedSignalBackground;
    return s;
  }();
  ModulationSpec modulation{};
  SampleSpec sample{};
  spectrum::ArrayGeometry geometry{};
  std::array<DetectorConfig, 4> detectors{};
  bool idler_split = false;
  double beamsplitter_ratio = 0.5;
  TimePs duration = 60 * kPsPerSecond;
  TimePs segment = kPsPerSecond;
  AnalysisConfig analysis{};
  std::uint64_t seed = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline ModulationFunction build_modulation(const ModulationSpec& m, const BiphotonAmplitude& input) {
  switch (m.kind) {
    case ModulationKind::Identity: return ModulationFunction::identity();
    case ModulationKind::Heaviside: return ModulationFunction::heaviside(m.edge);
    case ModulationKind::Gaussian: return ModulationFunction::gaussian_target(input, m.fwhm, m.center);
    case ModulationKind::Tabulated: return ModulationFunction::tabulated(m.table);
  }
  return ModulationFunction::identity();
}

/// Materializes the simulation setup (builds the sample spectrum and the
/// modulation envelope).
inline ExperimentSetup to_setup(const ExperimentConfig& c) {
  ExperimentSetup s;
  s.source = c.source;
  s.modulation = build_modulation(c.modulation, c.source.amplitude);
  s.sample.spectrum = std::make_shared<const spectrum::TransmissionSpectrum>(spectrum::fano_spectrum(
      c.geometry, c.sample.resonance,
      spectrum::wavelength_grid(c.sample.spectrum_min, c.sample.spectrum_max, c.sample.spectrum_step)));
  s.sample.photon_wavelength = c.sample.photon_wavelength;
  s.sample.overall_conversion = c.sample.overall_conversion;
  s.sample.background_suppression = c.sample.background_suppression;
  s.sample_in_path = c.sample.enabled;
  s.idler_split = c.idler_split;
  s.beamsplitter_ratio = c.beamsplitter_ratio;
  s.detectors = c.detectors;
  s.segment = c.segment;
  return s;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view v, std::size_t line, const std::string& key) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x))
    throw ConfigError(line, key + ": expected a number, got '" + std::string(v) + "'");
  return x;
}

inline std::uint64_t parse_u64(std::string_view v, std::size_t line, const std::string& key) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end)
    throw ConfigError(line, key + ": expected a non-negative integer, got '" + std::string(v) + "'");
  return x;
}

inline bool parse_bool(std::string_view v, std::size_t line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(line, key + ": expected true or false, got '" + std::string(v) + "'");
}

/// Duration expressed in units of `unit_ps` picoseconds. The conversion factor
/// is exactly 1 when the suffix matches the unit, so values round-trip.
inline double parse_duration(std::string_view v, std::size_t line, const std::string& key, double unit_ps = 1.0) {
  static const std::pair<std::string_view, double> units[] = {
      {"ps", 1.0}, {"ns", 1e3}, {"us", 1e6}, {"ms", 1e9}, {"s", 1e12}};
  for (const auto& [suffix, scale] : units) {
    if (v.size() > suffix.size() && v.substr(v.size() - suffix.size()) == suffix) {
      auto number = trim(v.substr(0, v.size() - suffix.size()));
      // "ms" and "us" also end in "s"; the number part must then parse cleanly.
      double x = 0.0;
      auto [p, ec] = std::from_chars(number.data(), number.data() + number.size(), x);
      if (ec == std::errc() && p == number.data() + number.size() && std::isfinite(x)) return x * (scale / unit_ps);
    }
  }
  throw ConfigError(line, key + ": expected a duration with unit ps, ns, us, ms or s, got '" + std::string(v) + "'");
}

inline TimePs parse_time(std::string_view v, std::size_t line, const std::string& key) {
  const double ps = parse_duration(v, line, key);
  // Decimal fractions such as 0.3ns are not exact in binary; accept them when
  // they land within rounding error of a whole picosecond.
  if (std::abs(ps - std::round(ps)) > 1e-9 * std::max(1.0, std::abs(ps)) || std::abs(ps) > 9.0e18)
    throw ConfigError(line, key + ": duration must be a whole number of picoseconds");
  return static_cast<TimePs>(std::llround(ps));
}

inline WavepacketShape parse_shape(std::string_view v, std::size_t line, const std::string& key) {
  for (auto s : {WavepacketShape::DoubleExponential, WavepacketShape::ExponentialDecay, WavepacketShape::Gaussian})
    if (v == to_string(s)) return s;
  throw ConfigError(line, key + ": unknown shape '" + std::string(v) +
                              "' (double_exponential, exponential_decay, gaussian)");
}

inline ModulationKind parse_modulation(std::string_view v, std::size_t line, const std::string& key) {
  for (auto k : {ModulationKind::Identity, ModulationKind::Heaviside, ModulationKind::Gaussian,
                 ModulationKind::Tabulated})
    if (v == to_string(k)) return k;
  throw ConfigError(line, key + ": unknown modulation '" + std::string(v) +
                              "' (identity, heaviside, gaussian, tabulated)");
}

inline std::vector<double> parse_list(std::string_view v, std::size_t line, const std::string& key) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_double(trim(v.substr(0, comma)), line, key));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

/// Largest unit that represents the value exactly.
inline std::string format_time(TimePs t) {
  static const std::pair<const char*, TimePs> units[] = {
      {"s", kPsPerSecond}, {"ms", 1'000'000'000}, {"us", 1'000'000}, {"ns", 1000}};
  for (const auto& [suffix, scale] : units)
    if (t != 0 && t % scale == 0) return std::to_string(t / scale) + suffix;
  return std::to_string(t) + "ps";
}

inline std::string format_ps(double ps) {
  if (ps == std::floor(ps) && std::abs(ps) < 9.0e18) return format_time(static_cast<TimePs>(ps));
  return format_double(ps) + "ps";
}

}  // namespace detail

/// Checks every cross-field constraint; the line number is not known here.
inline void validate(const ExperimentConfig& c) {
  try {
    c.source.validate();
    c.geometry.validate();
    c.sample.resonance.validate();
    for (const auto& d : c.detectors) d.validate();
    if (c.modulation.kind == ModulationKind::Tabulated) c.modulation.table.validate();
    if (c.modulation.kind == ModulationKind::Gaussian && !(c.modulation.fwhm > 0.0))
      throw InvalidArgument("modulation.fwhm must be > 0");
    SampleConfig probe;
    probe.photon_wavelength = c.sample.photon_wavelength;
    probe.overall_conversion = c.sample.overall_conversion;
    probe.background_suppression = c.sample.background_suppression;
    probe.validate();
    if (!(c.sample.spectrum_max > c.sample.spectrum_min) || !(c.sample.spectrum_step > 0.0))
      throw InvalidArgument("sample spectrum grid needs min < max and step > 0");
    if (c.sample.photon_wavelength < c.sample.spectrum_min || c.sample.photon_wavelength > c.sample.spectrum_max)
      throw InvalidArgument("sample.photon_wavelength lies outside the sample spectrum grid");
    if (!(c.beamsplitter_ratio >= 0.0 && c.beamsplitter_ratio <= 1.0))
      throw InvalidArgument("experiment.beamsplitter_ratio must lie in [0, 1]");
    if (c.duration < 0) throw InvalidArgument("experiment.duration must be >= 0");
    if (c.segment <= 0) throw InvalidArgument("experiment.segment must be > 0");
    const auto& a = c.analysis;
    if (a.bin_width <= 0 || a.window <= 0 || a.triple_window <= 0 || a.auto_window <= 0)
      throw InvalidArgument("analysis widths must be > 0");
    if (a.window % a.bin_width != 0) throw InvalidArgument("analysis.window must be a multiple of analysis.bin_width");
  } catch (const InvalidArgument& e) {
    throw ConfigError(0, e.what());
  }
}

namespace detail {

/// Applies one assignment; returns false for an unknown key.
inline bool assign(ExperimentConfig& c, const std::string& key, std::string_view v, std::size_t line) {
  auto num = [&] { return parse_double(v, line, key); };
  auto time = [&] { return parse_time(v, line, key); };

  if (key == "source.pair_rate") c.source.pair_rate = num();
  else if (key == "source.shape") c.source.amplitude.shape = parse_shape(v, line, key);
  else if (key == "source.fwhm") c.source.amplitude.fwhm = parse_duration(v, line, key, 1e3);
  else if (key == "source.offset") c.source.amplitude.offset = parse_duration(v, line, key, 1e3);
  else if (key == "source.multipair_prob") c.source.multipair_prob = num();
  else if (key == "source.background_rate_signal") c.source.background_rate_signal = num();
  else if (key == "source.background_rate_idler") c.source.background_rate_idler = num();
  else if (key == "modulation.kind") c.modulation.kind = parse_modulation(v, line, key);
  else if (key == "modulation.edge") c.modulation.edge = parse_duration(v, line, key, 1e3);
  else if (key == "modulation.fwhm") c.modulation.fwhm = parse_duration(v, line, key, 1e3);
  else if (key == "modulation.center") c.modulation.center = parse_duration(v, line, key, 1e3);
  else if (key == "modulation.table_start") c.modulation.table.start = parse_duration(v, line, key, 1e3);
  else if (key == "modulation.table_step") c.modulation.table.step = parse_duration(v, line, key, 1e3);
  else if (key == "modulation.table") c.modulation.table.values = parse_list(v, line, key);
  else if (key == "sample.enabled") c.sample.enabled = parse_bool(v, line, key);
  else if (key == "sample.photon_wavelength_nm") c.sample.photon_wavelength = num();
  else if (key == "sample.overall_conversion") c.sample.overall_conversion = num();
  else if (key == "sample.background_suppression") c.sample.background_suppression = num();
  else if (key == "sample.resonance_nm") c.sample.resonance.center = num();
  else if (key == "sample.peak_transmittance") c.sample.resonance.peak_transmittance = num();
  else if (key == "sample.resonance_fwhm_nm") c.sample.resonance.fwhm = num();
  else if (key == "sample.fano_q") c.sample.resonance.q = num();
  else if (key == "sample.spectrum_min_nm") c.sample.spectrum_min = num();
  else if (key == "sample.spectrum_max_nm") c.sample.spectrum_max = num();
  else if (key == "sample.spectrum_step_nm") c.sample.spectrum_step = num();
  else if (key == "geometry.pitch_nm") c.geometry.pitch = num();
  else if (key == "geometry.hole_diameter_nm") c.geometry.hole_diameter = num();
  else if (key == "geometry.film_thickness_nm") c.geometry.film_thickness = num();
  else if (key == "geometry.taper_angle_deg") c.geometry.taper_angle = num();
  else if (key == "experiment.idler_split") c.idler_split = parse_bool(v, line, key);
  else if (key == "experiment.beamsplitter_ratio") c.beamsplitter_ratio = num();
  else if (key == "experiment.duration") c.duration = time();
  else if (key == "experiment.segment") c.segment = time();
  else if (key == "analysis.bin_width") c.analysis.bin_width = time();
  else if (key == "analysis.window") c.analysis.window = time();
  else if (key == "analysis.triple_window") c.analysis.triple_window = time();
  else if (key == "analysis.auto_window") c.analysis.auto_window = time();
  else if (key == "rng.seed") c.seed = parse_u64(v, line, key);
  else if (key.rfind("detector.ch", 0) == 0) {
    const auto dot = key.find('.', 11);
    if (dot == std::string::npos || dot == 11) return false;
    const auto ch = key.substr(11, dot - 11);
    if (ch.size() != 1 || ch[0] < '0' || ch[0] > '3') return false;
    auto& d = c.detectors[static_cast<std::size_t>(ch[0] - '0')];
    const auto field = key.substr(dot + 1);
    if (field == "efficiency") d.efficiency = num();
    else if (field == "dark_rate") d.dark_rate = num();
    else if (field == "jitter") d.jitter_sigma = parse_duration(v, line, key);
    else if (field == "dead_time") d.dead_time = time();
    else return false;
  } else {
    return false;
  }
  return true;
}

/// Range checks a single key right after assignment so the error carries its line.
inline void check_key(const ExperimentConfig& c, const std::string& key, std::size_t line) {
  auto fail = [&](const std::string& rule) { throw ConfigError(line, key + " " + rule); };
  const auto& s = c.source;
  if (key == "source.pair_rate" && !(s.pair_rate > 0.0)) fail("must be > 0");
  if (key == "source.fwhm" && !(s.amplitude.fwhm > 0.0)) fail("must be > 0");
  if (key == "source.multipair_prob" && !(s.multipair_prob >= 0.0 && s.multipair_prob < 1.0)) fail("must lie in [0, 1)");
  if ((key == "source.background_rate_signal" && s.background_rate_signal < 0.0) ||
      (key == "source.background_rate_idler" && s.background_rate_idler < 0.0))
    fail("must be >= 0");
  if ((key == "sample.overall_conversion" && !(c.sample.overall_conversion >= 0.0 && c.sample.overall_conversion <= 1.0)) ||
      (key == "sample.background_suppression" &&
       !(c.sample.background_suppression >= 0.0 && c.sample.background_suppression <= 1.0)) ||
      (key == "experiment.beamsplitter_ratio" && !(c.beamsplitter_ratio >= 0.0 && c.beamsplitter_ratio <= 1.0)))
    fail("must lie in [0, 1]");
  if (key == "sample.peak_transmittance" &&
      !(c.sample.resonance.peak_transmittance > 0.0 && c.sample.resonance.peak_transmittance <= 1.0))
    fail("must lie in (0, 1]");
  if ((key == "sample.resonance_fwhm_nm" && !(c.sample.resonance.fwhm > 0.0)) ||
      (key == "sample.photon_wavelength_nm" && !(c.sample.photon_wavelength > 0.0)) ||
      (key == "geometry.pitch_nm" && !(c.geometry.pitch > 0.0)) ||
      (key == "geometry.hole_diameter_nm" && !(c.geometry.hole_diameter > 0.0)) ||
      (key == "geometry.film_thickness_nm" && !(c.geometry.film_thickness > 0.0)) ||
      (key == "modulation.fwhm" && !(c.modulation.fwhm > 0.0)) ||
      (key == "modulation.table_step" && !(c.modulation.table.step > 0.0)))
    fail("must be > 0");
  if (key == "sample.fano_q" && c.sample.resonance.q == 0.0) fail("must be nonzero");
  if (key == "modulation.table")
    for (double v : c.modulation.table.values)
      if (!(v >= 0.0 && v <= 1.0)) fail("entries must lie in [0, 1]");
  if (key.rfind("detector.ch", 0) == 0) {
    for (const auto& d : c.detectors) {
      if (!(d.efficiency >= 0.0 && d.efficiency <= 1.0)) fail("must lie in [0, 1]");
      if (d.dark_rate < 0.0 || d.jitter_sigma < 0.0 || d.dead_time < 0) fail("must be >= 0");
    }
  }
  if ((key == "experiment.duration" && c.duration < 0) || (key == "experiment.segment" && c.segment <= 0) ||
      (key.rfind("analysis.", 0) == 0 && (c.analysis.bin_width <= 0 || c.analysis.window <= 0 ||
                                          c.analysis.triple_window <= 0 || c.analysis.auto_window <= 0)))
    fail(key == "experiment.duration" ? "must be >= 0" : "must be > 0");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'section.key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key before '='");
    if (value.empty()) throw ConfigError(line_no, key + ": missing value");
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh)
      throw ConfigError(line_no, key + ": duplicate key (first set on line " + std::to_string(it->second) + ")");
    if (!detail::assign(c, key, value, line_no)) throw ConfigError(line_no, "unknown key '" + key + "'");
    detail::check_key(c, key, line_no);
  }
  validate(c);
  return c;
}

/// Writes every key, so the output documents the full effective configuration.
inline std::string serialize_config(const ExperimentConfig& c) {
  using detail::format_double;
  using detail::format_ps;
  using detail::format_time;
  std::ostringstream o;
  auto ns = [](double v) { return format_double(v) + "ns"; };
  o << "# source: cavity-enhanced pair emission\n";
  o << "source.pair_rate = " << format_double(c.source.pair_rate) << "\n";
  o << "source.shape = " << to_string(c.source.amplitude.shape) << "\n";
  o << "source.fwhm = " << ns(c.source.amplitude.fwhm) << "\n";
  o << "source.offset = " << ns(c.source.amplitude.offset) << "\n";
  o << "source.multipair_prob = " << format_double(c.source.multipair_prob) << "\n";
  o << "source.background_rate_signal = " << format_double(c.source.background_rate_signal) << "\n";
  o << "source.background_rate_idler = " << format_double(c.source.background_rate_idler) << "\n";
  o << "\n# modulation of the signal arm, relative to the herald\n";
  o << "modulation.kind = " << to_string(c.modulation.kind) << "\n";
  o << "modulation.edge = " << ns(c.modulation.edge) << "\n";
  o << "modulation.fwhm = " << ns(c.modulation.fwhm) << "\n";
  o << "modulation.center = " << ns(c.modulation.center) << "\n";
  o << "modulation.table_start = " << ns(c.modulation.table.start) << "\n";
  o << "modulation.table_step = " << ns(c.modulation.table.step) << "\n";
  if (!c.modulation.table.values.empty()) {
    o << "modulation.table = ";
    for (std::size_t k = 0; k < c.modulation.table.values.size(); ++k)
      o << (k ? ", " : "") << format_double(c.modulation.table.values[k]);
    o << "\n";
  }
  o << "\n# nanohole sample\n";
  o << "sample.enabled = " << (c.sample.enabled ? "true" : "false") << "\n";
  o << "sample.photon_wavelength_nm = " << format_double(c.sample.photon_wavelength) << "\n";
  o << "sample.overall_conversion = " << format_double(c.sample.overall_conversion) << "\n";
  o << "sample.background_suppression = " << format_double(c.sample.background_suppression) << "\n";
  o << "sample.resonance_nm = " << format_double(c.sample.resonance.center) << "\n";
  o << "sample.peak_transmittance = " << format_double(c.sample.resonance.peak_transmittance) << "\n";
  o << "sample.resonance_fwhm_nm = " << format_double(c.sample.resonance.fwhm) << "\n";
  o << "sample.fano_q = " << format_double(c.sample.resonance.q) << "\n";
  o << "sample.spectrum_min_nm = " << format_double(c.sample.spectrum_min) << "\n";
  o << "sample.spectrum_max_nm = " << format_double(c.sample.spectrum_max) << "\n";
  o << "sample.spectrum_step_nm = " << format_double(c.sample.spectrum_step) << "\n";
  o << "geometry.pitch_nm = " << format_double(c.geometry.pitch) << "\n";
  o << "geometry.hole_diameter_nm = " << format_double(c.geometry.hole_diameter) << "\n";
  o << "geometry.film_thickness_nm = " << format_double(c.geometry.film_thickness) << "\n";
  o << "geometry.taper_angle_deg = " << format_double(c.geometry.taper_angle) << "\n";
  o << "\n# detectors: 0 herald, 1 and 2 beam-splitter outputs, 3 split herald\n";
  for (std::size_t ch = 0; ch < c.detectors.size(); ++ch) {
    const auto& d = c.detectors[ch];
    const std::string p = "detector.ch" + std::to_string(ch) + ".";
    o << p << "efficiency = " << format_double(d.efficiency) << "\n";
    o << p << "dark_rate = " << format_double(d.dark_rate) << "\n";
    o << p << "jitter = " << format_ps(d.jitter_sigma) << "\n";
    o << p << "dead_time = " << format_time(d.dead_time) << "\n";
  }
  o << "\nexperiment.idler_split = " << (c.idler_split ? "true" : "false") << "\n";
  o << "experiment.beamsplitter_ratio = " << format_double(c.beamsplitter_ratio) << "\n";
  o << "experiment.duration = " << format_time(c.duration) << "\n";
  o << "experiment.segment = " << format_time(c.segment) << "\n";
  o << "\nanalysis.bin_width = " << format_time(c.analysis.bin_width) << "\n";
  o << "analysis.window = " << format_time(c.analysis.window) << "\n";
  o << "analysis.triple_window = " << format_time(c.analysis.triple_window) << "\n";
  o << "analysis.auto_window = " << format_time(c.analysis.auto_window) << "\n";
  o << "\nrng.seed = " << c.seed << "\n";
  return o.str();
}

}  // namespace qplas::io
