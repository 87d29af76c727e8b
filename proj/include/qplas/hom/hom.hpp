#pragma once

// Frequency-domain Hong-Ou-Mandel interference of a signal-idler pair with
// detuning Delta and optical delay delta:
//   P_c(Delta, delta) = 1/2 (1 - Re int psi(t + delta) psi*(-t + delta) e^{i Delta t} dt
//                                / int |psi|^2 dt).
// All three wavepacket shapes have real amplitudes, so the phase factor
// reduces to cos(Delta t).

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "qplas/core/wavepacket.hpp"
#include "qplas/correlator/waveform.hpp"
#include "qplas/fit/least_squares.hpp"

namespace qplas {

/// Detuning in MHz to angular frequency in rad/ns.
inline constexpr double mhz_to_rad_per_ns(double mhz) { return 2.0 * std::numbers::pi * mhz * 1e-3; }

namespace detail {

/// Half-length beyond which the overlap integrand is below double precision.
inline double overlap_reach(const BiphotonAmplitude& amp, double delay) {
  const double w = width_parameter(amp);
  const double shift = std::abs(delay - amp.offset);
  switch (amp.shape) {
    case WavepacketShape::DoubleExponential:
    case WavepacketShape::ExponentialDecay: return shift + 45.0 * w;
    case WavepacketShape::Gaussian: return shift + 12.0 * w;
  }
  return shift + 45.0 * w;
}

}  // namespace detail

/// Re int psi(t + delta) psi(-t + delta) cos(Delta t) dt for a normalized
/// psi. Gauss-Kronrod on panels no longer than a quarter oscillation period
/// or half a width, with breakpoints at the kinks of the integrand.
inline double hom_overlap(const BiphotonAmplitude& amp, double detuning, double delay) {
  amp.validate();
  if (std::isinf(detuning)) return 0.0;
  const double w = width_parameter(amp);
  const double reach = detail::overlap_reach(amp, delay);
  const double kink = delay - amp.offset;  // psi(t + delta) kinks at t = -kink, psi(-t + delta) at t = +kink

  auto integrand = [&](double t) {
    return evaluate_amplitude(amp, t + delay) * evaluate_amplitude(amp, -t + delay) * std::cos(detuning * t);
  };

  std::vector<double> breaks{-reach, reach};
  if (std::abs(kink) < reach) {
    breaks.push_back(kink);
    breaks.push_back(-kink);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double panel = 0.5 * w;
  if (detuning != 0.0) panel = std::min(panel, 0.5 * std::numbers::pi / std::abs(detuning));
  constexpr std::size_t kMaxPanels = 400'000;

  double total = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s], b = breaks[s + 1];
    const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil((b - a) / panel)), 1, kMaxPanels);
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double lo = a + h * static_cast<double>(k);
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, lo + h, 0, 0);
    }
  }
  return total;
}

/// Coincidence probability; detuning in rad/ns, delay in ns. Infinite
/// detuning is the fully distinguishable limit, exactly 1/2.
inline double hom_coincidence(const BiphotonAmplitude& amp, double detuning, double delay) {
  return 0.5 * (1.0 - hom_overlap(amp, detuning, delay));
}

/// V(delta) = 1 - 2 P_c(0, delta).
inline double hom_visibility(const BiphotonAmplitude& amp, double delay) {
  return 1.0 - 2.0 * hom_coincidence(amp, 0.0, delay);
}

struct HomCurve {
  std::vector<double> detuning_mhz;
  std::vector<double> values;
  double optical_delay = 0.0;  // ns

  std::size_t size() const noexcept { return values.size(); }
};

inline HomCurve hom_curve(const BiphotonAmplitude& amp, const std::vector<double>& detuning_mhz, double delay) {
  HomCurve c;
  c.detuning_mhz = detuning_mhz;
  c.optical_delay = delay;
  for (double f : detuning_mhz) c.values.push_back(hom_coincidence(amp, mhz_to_rad_per_ns(f), delay));
  return c;
}

inline std::vector<double> detuning_grid(double max_mhz, std::size_t points) {
  if (points < 2 || !(max_mhz > 0.0)) throw InvalidArgument("detuning grid needs >= 2 points and max > 0");
  std::vector<double> g;
  for (std::size_t k = 0; k < points; ++k)
    g.push_back(-max_mhz + 2.0 * max_mhz * static_cast<double>(k) / static_cast<double>(points - 1));
  return g;
}

/// Cosine similarity of two coincidence curves on the same detuning grid.
inline double hom_similarity(const HomCurve& a, const HomCurve& b) {
  if (a.detuning_mhz != b.detuning_mhz)
    throw AnalysisError(AnalysisError::Kind::GridMismatch, "HOM curves are on different detuning grids");
  return cosine_similarity(a.values, b.values);
}

struct VisibilityPoint {
  double optical_delay = 0.0;  // ns
  double visibility = 0.0;
  double error = 0.0;
};

struct CoherenceFit {
  double fwhm = 0.0;  // ns
  double error = 0.0;
  double residual_norm = 0.0;
};

/// Least-squares fwhm of hom_visibility(amp(fwhm), delta) to the points,
/// weighted by 1/error where errors are given. A coarse log scan seeds the
/// search so the fit does not depend on a user guess.
inline CoherenceFit fit_coherence_time(const std::vector<VisibilityPoint>& points, WavepacketShape shape,
                                       double offset = 0.0) {
  std::vector<double> delays;
  for (const auto& p : points) delays.push_back(p.optical_delay);
  std::sort(delays.begin(), delays.end());
  if (points.size() < 2 || std::unique(delays.begin(), delays.end()) - delays.begin() < 2)
    throw FitError("underdetermined coherence-time fit: need at least 2 distinct optical delays");
  const auto n = static_cast<int>(points.size());

  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const BiphotonAmplitude amp{shape, std::abs(p(0)) + 1e-9, offset};
    for (int k = 0; k < n; ++k) {
      const auto& pt = points[static_cast<std::size_t>(k)];
      const double sigma = pt.error > 0.0 ? pt.error : 1.0;
      r(k) = (hom_visibility(amp, pt.optical_delay) - pt.visibility) / sigma;
    }
  };

  double best = 0.0, best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(1), r(n);
  for (int k = 0; k <= 60; ++k) {
    x(0) = std::pow(10.0, -1.0 + 5.0 * k / 60.0);
    residuals(x, r);
    if (r.squaredNorm() < best_cost) best_cost = r.squaredNorm(), best = x(0);
  }
  x(0) = best;
  const auto res = fit::least_squares(residuals, x, n);
  return {std::abs(res.params(0)), res.error(0), res.residual_norm};
}

}  // namespace qplas
