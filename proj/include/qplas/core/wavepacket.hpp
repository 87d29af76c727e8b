#pragma once

// Closed forms for the three wavepacket shapes. All widths are FWHM of the
// density |psi(tau)|^2; decay constants are derived here and never stored.

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "qplas/core/rng.hpp"
#include "qplas/core/types.hpp"

namespace qplas {

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

/// Decay constant of exp(-|t|/tau0) (double exponential) or exp(-t/tau0)
/// (exponential decay); standard deviation for the Gaussian.
inline double width_parameter(const BiphotonAmplitude& amp) {
  switch (amp.shape) {
    case WavepacketShape::DoubleExponential: return amp.fwhm / (2.0 * std::numbers::ln2);
    case WavepacketShape::ExponentialDecay: return amp.fwhm / std::numbers::ln2;
    case WavepacketShape::Gaussian: return amp.fwhm / kFwhmPerSigma;
  }
  return 0.0;
}

/// |psi(tau)|^2 in ns^-1; integrates to one.
inline double evaluate_density(const BiphotonAmplitude& amp, double tau) {
  const double x = tau - amp.offset;
  const double w = width_parameter(amp);
  switch (amp.shape) {
    case WavepacketShape::DoubleExponential: return std::exp(-std::abs(x) / w) / (2.0 * w);
    case WavepacketShape::ExponentialDecay: return x < 0.0 ? 0.0 : std::exp(-x / w) / w;
    case WavepacketShape::Gaussian:
      return std::exp(-0.5 * x * x / (w * w)) / (w * std::sqrt(2.0 * std::numbers::pi));
  }
  return 0.0;
}

/// Real amplitude psi(tau) = sqrt(density); the natural phase of all shapes is flat.
inline double evaluate_amplitude(const BiphotonAmplitude& amp, double tau) {
  return std::sqrt(evaluate_density(amp, tau));
}

inline double cumulative(const BiphotonAmplitude& amp, double tau) {
  const double x = tau - amp.offset;
  const double w = width_parameter(amp);
  switch (amp.shape) {
    case WavepacketShape::DoubleExponential:
      return x < 0.0 ? 0.5 * std::exp(x / w) : 1.0 - 0.5 * std::exp(-x / w);
    case WavepacketShape::ExponentialDecay: return x < 0.0 ? 0.0 : -std::expm1(-x / w);
    case WavepacketShape::Gaussian: return 0.5 * std::erfc(-x / (w * std::numbers::sqrt2));
  }
  return 0.0;
}

/// Inverse CDF for u in (0, 1).
inline double quantile(const BiphotonAmplitude& amp, double u) {
  const double w = width_parameter(amp);
  switch (amp.shape) {
    case WavepacketShape::DoubleExponential:
      return amp.offset + (u < 0.5 ? w * std::log(2.0 * u) : -w * std::log(2.0 * (1.0 - u)));
    case WavepacketShape::ExponentialDecay: return amp.offset - w * std::log1p(-u);
    case WavepacketShape::Gaussian:
      return amp.offset + w * std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
  }
  return amp.offset;
}

/// One delay in ns drawn by inverse-CDF sampling.
inline double sample_delay(const BiphotonAmplitude& amp, RngStream& rng) {
  return quantile(amp, rng.uniform_open());
}

/// Keyed variant: the delay of event `index` depends only on (spec, index).
inline double sample_delay_at(const BiphotonAmplitude& amp, const RngSpec& spec, std::uint64_t index) {
  return quantile(amp, to_unit_open(random_words(spec, index)[0]));
}

inline std::vector<double> sample_delays(const BiphotonAmplitude& amp, const RngSpec& spec, std::size_t n) {
  RngStream rng(spec);
  std::vector<double> out(n);
  for (auto& d : out) d = sample_delay(amp, rng);
  return out;
}

}  // namespace qplas
