#pragma once

// Counting-statistics model of a HOM measurement: coincidence counts are
// Poisson with mean N * transmittance * P_c. Used to produce realistic
// visibility-vs-delay data sets and noisy curves for the fits and
// similarity comparisons; the interference itself stays analytic.

#include <vector>

#include "qplas/core/rng.hpp"
#include "qplas/hom/hom.hpp"

namespace qplas {

struct HomMeasurement {
  /// Coincidences expected at full distinguishability (P_c = 1/2) before the sample.
  double counts_at_half = 20000.0;
  /// Scalar transmission of the arm; 1 for the incident photons.
  double transmittance = 1.0;
};

namespace detail {
/// Poisson draw from a keyed uniform stream (inversion for small means, a
/// normal approximation with continuity correction for large ones).
inline double poisson_draw(double mean, RngStream& rng) {
  if (mean <= 0.0) return 0.0;
  if (mean < 50.0) {
    const double u = rng.uniform();
    double p = std::exp(-mean), cdf = p;
    double k = 0.0;
    while (u > cdf && k < 1000.0) {
      k += 1.0;
      p *= mean / k;
      cdf += p;
    }
    return k;
  }
  return std::max(0.0, std::round(mean + std::sqrt(mean) * rng.normal()));
}
}  // namespace detail

/// Counts divided by the transmittance, as coincidence curves are compared
/// after correcting for sample loss.
inline HomCurve simulate_hom_curve(const BiphotonAmplitude& amp, const std::vector<double>& detuning_mhz,
                                   double delay, const HomMeasurement& m, const RngSpec& rng) {
  if (!(m.transmittance > 0.0 && m.transmittance <= 1.0)) throw InvalidArgument("transmittance must lie in (0, 1]");
  RngStream stream(rng);
  HomCurve model = hom_curve(amp, detuning_mhz, delay);
  const double scale = 2.0 * m.counts_at_half * m.transmittance;
  for (double& v : model.values) v = detail::poisson_draw(scale * v, stream) / (2.0 * m.counts_at_half * m.transmittance);
  return model;
}

/// V = 1 - C(0)/C(inf) from two Poisson counts per delay, with first-order errors.
inline std::vector<VisibilityPoint> simulate_visibility_points(const BiphotonAmplitude& amp,
                                                               const std::vector<double>& delays,
                                                               const HomMeasurement& m, const RngSpec& rng) {
  RngStream stream(rng);
  std::vector<VisibilityPoint> out;
  const double scale = 2.0 * m.counts_at_half * m.transmittance;
  for (double d : delays) {
    const double c0 = detail::poisson_draw(scale * hom_coincidence(amp, 0.0, d), stream);
    const double cinf = std::max(1.0, detail::poisson_draw(scale * 0.5, stream));
    const double ratio = c0 / cinf;
    const double err = ratio * std::sqrt(1.0 / std::max(c0, 1.0) + 1.0 / cinf);
    out.push_back({d, 1.0 - ratio, err});
  }
  return out;
}

}  // namespace qplas
