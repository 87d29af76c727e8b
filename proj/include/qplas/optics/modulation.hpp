#pragma once

// Electro-optic amplitude modulation of the heralded signal photons. The
// modulator is triggered by the herald, so its transmission is a function of
// t_rel = signal_time - idler_time. A photon survives with probability m(t_rel)^2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qplas/core/rng.hpp"
#include "qplas/core/wavepacket.hpp"
#include "qplas/source/pair_source.hpp"

namespace qplas {

enum class ModulationKind { Identity, Heaviside, Gaussian, Tabulated };

inline std::string to_string(ModulationKind k) {
  switch (k) {
    case ModulationKind::Identity: return "identity";
    case ModulationKind::Heaviside: return "heaviside";
    case ModulationKind::Gaussian: return "gaussian";
    case ModulationKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

/// Amplitude transmission m(t) in [0, 1] on a uniform grid t_k = start + k step.
struct ModulationTable {
  double start = 0.0;  // ns
  double step = 1.0;   // ns
  std::vector<double> values;

  void validate() const {
    if (!(step > 0.0)) throw InvalidArgument("modulation table step must be > 0");
    if (values.empty()) throw InvalidArgument("modulation table must not be empty");
    for (double v : values)
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("modulation amplitude must lie in [0, 1]");
  }

  double end() const { return start + step * static_cast<double>(values.size() - 1); }

  /// Linear interpolation; outside the grid the nearer edge value is used.
  double operator()(double t, bool* out_of_grid) const {
    const double x = (t - start) / step;
    if (x < 0.0 || x > static_cast<double>(values.size() - 1)) {
      if (out_of_grid) *out_of_grid = true;
      return x < 0.0 ? values.front() : values.back();
    }
    const auto k = static_cast<std::size_t>(x);
    if (k + 1 >= values.size()) return values.back();
    const double f = x - static_cast<double>(k);
    return values[k] + f * (values[k + 1] - values[k]);
  }

  friend bool operator==(const ModulationTable&, const ModulationTable&) = default;
};

class ModulationFunction {
public:
  ModulationFunction() = default;

  static ModulationFunction identity() { return {}; }

  /// m = 1 for t_rel >= edge, 0 before.
  static ModulationFunction heaviside(double edge_ns) {
    ModulationFunction m;
    m.kind_ = ModulationKind::Heaviside;
    m.edge_ = edge_ns;
    return m;
  }

  static ModulationFunction tabulated(ModulationTable table) {
    table.validate();
    ModulationFunction m;
    m.kind_ = ModulationKind::Tabulated;
    m.table_ = std::move(table);
    return m;
  }

  /// Shapes `input` into a Gaussian of the given FWHM centred at `center_ns`.
  /// Defined below via derive_modulation_for_target.
  static ModulationFunction gaussian_target(const BiphotonAmplitude& input, double target_fwhm_ns,
                                            double center_ns);

  ModulationKind kind() const noexcept { return kind_; }
  double edge() const noexcept { return edge_; }
  double target_fwhm() const noexcept { return target_fwhm_; }
  double center() const noexcept { return center_; }
  const ModulationTable& table() const noexcept { return table_; }

  /// m(t_rel) for t_rel in ns. `out_of_grid` is set when a table does not cover t_rel.
  double amplitude(double t_rel_ns, bool* out_of_grid = nullptr) const {
    switch (kind_) {
      case ModulationKind::Identity: return 1.0;
      case ModulationKind::Heaviside: return t_rel_ns >= edge_ ? 1.0 : 0.0;
      case ModulationKind::Gaussian:
      case ModulationKind::Tabulated: return table_(t_rel_ns, out_of_grid);
    }
    return 1.0;
  }

  friend bool operator==(const ModulationFunction&, const ModulationFunction&) = default;

private:
  ModulationKind kind_ = ModulationKind::Identity;
  double edge_ = 0.0;
  double target_fwhm_ = 0.0;
  double center_ = 0.0;
  ModulationTable table_{};
};

struct TimeGrid {
  double start = 0.0;  // ns
  double step = 0.05;  // ns
  std::size_t points = 0;

  double at(std::size_t k) const { return start + step * static_cast<double>(k); }
};

/// Grid covering both densities out to ten FWHM from their centres.
inline TimeGrid default_shaping_grid(const BiphotonAmplitude& input, const BiphotonAmplitude& target,
                                     double step_ns = 0.05) {
  const double lo = std::min(input.offset - 10.0 * input.fwhm, target.offset - 10.0 * target.fwhm);
  const double hi = std::max(input.offset + 10.0 * input.fwhm, target.offset + 10.0 * target.fwhm);
  return {lo, step_ns, static_cast<std::size_t>(std::ceil((hi - lo) / step_ns)) + 1};
}

struct ModulationDesign {
  ModulationFunction modulation;
  /// Probability mass of the target that the rescaled amplitude cannot produce.
  double clipped_mass = 0.0;
  /// Fraction of input photons transmitted, integral of m^2 times the input density.
  double efficiency = 0.0;
};

/// m(t) = sqrt(min(r, M) / M) with r = target/input and M the largest ratio on
/// the grid (or `gain_cap` when smaller). Where the input density vanishes m = 0.
inline ModulationDesign derive_modulation_for_target(const BiphotonAmplitude& input,
                                                     const BiphotonAmplitude& target, const TimeGrid& grid,
                                                     std::optional<double> gain_cap = std::nullopt) {
  input.validate();
  target.validate();
  if (grid.points < 2 || !(grid.step > 0.0)) throw InvalidArgument("shaping grid needs >= 2 points and step > 0");
  if (gain_cap && !(*gain_cap > 0.0)) throw InvalidArgument("gain cap must be > 0");

  std::vector<double> ratio(grid.points, 0.0);
  double max_ratio = 0.0;
  for (std::size_t k = 0; k < grid.points; ++k) {
    const double in = evaluate_density(input, grid.at(k));
    if (in > 0.0) {
      ratio[k] = evaluate_density(target, grid.at(k)) / in;
      max_ratio = std::max(max_ratio, ratio[k]);
    }
  }
  if (!(max_ratio > 0.0) || !std::isfinite(max_ratio))
    throw InvalidArgument("target has no overlap with the input wavepacket on the grid");
  const double scale = gain_cap ? std::min(*gain_cap, max_ratio) : max_ratio;

  ModulationDesign design;
  ModulationTable table{grid.start, grid.step, std::vector<double>(grid.points, 0.0)};
  double clipped = 0.0, transmitted = 0.0;
  for (std::size_t k = 0; k < grid.points; ++k) {
    const double t = grid.at(k);
    const double in = evaluate_density(input, t);
    const double kept = std::min(ratio[k], scale);
    table.values[k] = std::sqrt(kept / scale);
    clipped += evaluate_density(target, t) - kept * in;
    transmitted += kept / scale * in;
  }
  design.clipped_mass = std::max(0.0, clipped * grid.step);
  design.efficiency = transmitted * grid.step;
  design.modulation = ModulationFunction::tabulated(std::move(table));
  return design;
}

inline ModulationFunction ModulationFunction::gaussian_target(const BiphotonAmplitude& input, double target_fwhm_ns,
                                                              double center_ns) {
  const BiphotonAmplitude target{WavepacketShape::Gaussian, target_fwhm_ns, center_ns};
  auto design = derive_modulation_for_target(input, target, default_shaping_grid(input, target));
  ModulationFunction m = std::move(design.modulation);
  m.kind_ = ModulationKind::Gaussian;
  m.target_fwhm_ = target_fwhm_ns;
  m.center_ = center_ns;
  return m;
}

struct ModulationStats {
  std::size_t out_of_grid = 0;
  std::size_t blocked = 0;
};

/// Thins signal photons with probability m(t_rel)^2; idler photons are untouched.
/// One keyed uniform per event id decides survival.
inline std::vector<PairEvent> apply_modulation(std::vector<PairEvent> events, const ModulationFunction& m,
                                               const RngSpec& rng, ModulationStats* stats = nullptr) {
  if (m.kind() == ModulationKind::Identity) return events;
  for (auto& e : events) {
    if (!e.has_signal_photon()) continue;
    bool outside = false;
    const double amp = m.amplitude(ps_to_ns(e.relative_delay()), &outside);
    if (outside && stats) ++stats->out_of_grid;
    if (uniform_at(rng, e.id) >= amp * amp) {
      e.signal_alive = false;
      if (stats) ++stats->blocked;
    }
  }
  return events;
}

}  // namespace qplas
