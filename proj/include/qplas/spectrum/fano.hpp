#pragma once

// Extraordinary-transmission peak as a Fano lineshape on top of the Bethe
// diffraction background:
//   T(lambda) = A (q Gamma/2 + (lambda - lambda0))^2 / ((Gamma/2)^2 + (lambda - lambda0)^2)
//             + T_bethe(lambda),
// where A is fixed by requiring T = peak_transmittance at the lineshape
// maximum lambda0 + Gamma / (2 q).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qplas/fit/least_squares.hpp"
#include "qplas/spectrum/geometry.hpp"

namespace qplas::spectrum {

struct FanoParams {
  double center = 795.0;  // lambda0, nm
  double peak_transmittance = 0.5;
  double fwhm = 54.0;  // Gamma, nm
  double q = 5.0;

  double peak_wavelength() const { return center + fwhm / (2.0 * q); }

  void validate() const {
    if (!(peak_transmittance > 0.0 && peak_transmittance <= 1.0))
      throw InvalidArgument("peak transmittance must lie in (0, 1]");
    if (!(fwhm > 0.0)) throw InvalidArgument("resonance fwhm must be > 0");
    if (!std::isfinite(q) || q == 0.0) throw InvalidArgument("Fano q must be finite and nonzero");
    if (!(center > 0.0)) throw InvalidArgument("resonance center must be > 0");
  }

  friend bool operator==(const FanoParams&, const FanoParams&) = default;
};

/// Resonance measured on the fabricated sample: broadened, red-shifted peak.
inline FanoParams measured_sample_resonance() { return {801.0, 0.36, 96.0, 8.0}; }
/// Resonance of the design geometry before fabrication imperfections.
inline FanoParams designed_sample_resonance() { return {788.25, 0.5, 54.0, 4.0}; }

struct TransmittanceParts {
  double resonance = 0.0;
  double diffraction = 0.0;
  double total() const { return resonance + diffraction; }
};

inline double fano_continuum_level(const ArrayGeometry& geom, const FanoParams& p) {
  return (p.peak_transmittance - bethe_transmittance(geom, p.peak_wavelength())) / (1.0 + p.q * p.q);
}

inline TransmittanceParts fano_transmittance(const ArrayGeometry& geom, const FanoParams& p, double lambda) {
  const double half = 0.5 * p.fwhm;
  const double x = lambda - p.center;
  const double num = p.q * half + x;
  return {fano_continuum_level(geom, p) * num * num / (half * half + x * x), bethe_transmittance(geom, lambda)};
}

/// Transmittance sampled on a strictly increasing grid, with its components.
struct TransmissionSpectrum {
  std::vector<double> wavelengths;
  std::vector<double> total;
  std::vector<double> resonance;
  std::vector<double> diffraction;

  bool contains(double lambda) const {
    return !wavelengths.empty() && lambda >= wavelengths.front() && lambda <= wavelengths.back();
  }

  std::string domain() const {
    if (wavelengths.empty()) return "[empty]";
    return "[" + std::to_string(wavelengths.front()) + ", " + std::to_string(wavelengths.back()) + "] nm";
  }

  /// Linear interpolation of the total transmittance.
  double at(double lambda) const {
    if (!contains(lambda))
      throw DomainError("wavelength " + std::to_string(lambda) + " nm outside spectrum domain " + domain());
    auto hi = std::lower_bound(wavelengths.begin(), wavelengths.end(), lambda);
    const auto i = static_cast<std::size_t>(hi - wavelengths.begin());
    if (*hi == lambda) return total[i];
    const double f = (lambda - wavelengths[i - 1]) / (wavelengths[i] - wavelengths[i - 1]);
    return total[i - 1] + f * (total[i] - total[i - 1]);
  }
};

inline std::vector<double> wavelength_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to > from)) throw InvalidArgument("wavelength grid needs from < to and step > 0");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  grid.reserve(n);
  for (std::size_t k = 0; k < n; ++k) grid.push_back(from + step * static_cast<double>(k));
  return grid;
}

inline TransmissionSpectrum fano_spectrum(const ArrayGeometry& geom, const FanoParams& p,
                                          const std::vector<double>& grid) {
  geom.validate();
  p.validate();
  if (fano_continuum_level(geom, p) <= 0.0)
    throw InvalidArgument("peak transmittance does not exceed the diffraction background");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw InvalidArgument("wavelength grid must be strictly increasing");
  TransmissionSpectrum s;
  s.wavelengths = grid;
  for (double lambda : grid) {
    const auto parts = fano_transmittance(geom, p, lambda);
    if (parts.total() < 0.0 || parts.total() > 1.0)
      throw DomainError("model transmittance " + std::to_string(parts.total()) + " outside [0, 1] at " +
                        std::to_string(lambda) + " nm");
    s.total.push_back(parts.total());
    s.resonance.push_back(parts.resonance);
    s.diffraction.push_back(parts.diffraction);
  }
  return s;
}

struct SpectrumPoint {
  double wavelength = 0.0;
  double transmittance = 0.0;
};

struct FanoFit {
  FanoParams params;
  FanoParams errors;  // one-sigma, same field layout
  double residual_norm = 0.0;
  int evaluations = 0;
};

namespace detail {

inline FanoParams fano_from_vector(const Eigen::VectorXd& v) { return {v(0), v(1), v(2), v(3)}; }

inline FanoParams initial_fano_guess(const std::vector<SpectrumPoint>& pts, double q0) {
  auto peak = std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.transmittance < b.transmittance;
  });
  auto trough = std::min_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.transmittance < b.transmittance;
  });
  const double half = 0.5 * (peak->transmittance + trough->transmittance);
  double left = pts.front().wavelength, right = pts.back().wavelength;
  for (auto it = peak; it != pts.begin(); --it)
    if (it->transmittance < half) { left = it->wavelength; break; }
  for (auto it = peak; it != pts.end(); ++it)
    if (it->transmittance < half) { right = it->wavelength; break; }
  const double width = std::max(right - left, 1e-3 * (pts.back().wavelength - pts.front().wavelength));
  return {peak->wavelength - width / (2.0 * q0), peak->transmittance, width, q0};
}

}  // namespace detail

/// Least-squares Fano fit. Without an initial guess the peak position,
/// height and half-maximum width of the data seed the search and both signs
/// of q are tried.
inline FanoFit fit_fano(const ArrayGeometry& geom, std::vector<SpectrumPoint> points,
                        const FanoParams* initial = nullptr) {
  if (points.size() < 5) throw InvalidArgument("Fano fit needs at least 5 spectrum points");
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.wavelength < b.wavelength; });
  const auto n = static_cast<int>(points.size());

  auto residuals = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
    const FanoParams p = detail::fano_from_vector(v);
    for (int k = 0; k < n; ++k) {
      const auto& pt = points[static_cast<std::size_t>(k)];
      const double model = (p.fwhm == 0.0 || p.q == 0.0) ? 1e3 : fano_transmittance(geom, p, pt.wavelength).total();
      r(k) = model - pt.transmittance;
    }
  };

  std::vector<FanoParams> starts;
  if (initial) {
    starts.push_back(*initial);
  } else {
    starts.push_back(detail::initial_fano_guess(points, 5.0));
    starts.push_back(detail::initial_fano_guess(points, -5.0));
  }

  std::optional<fit::LeastSquaresResult> best;
  std::string last_failure;
  for (const auto& s : starts) {
    try {
      Eigen::VectorXd x0(4);
      x0 << s.center, s.peak_transmittance, s.fwhm, s.q;
      auto result = fit::least_squares(residuals, x0, n);
      if (!best || result.residual_norm < best->residual_norm) best = std::move(result);
    } catch (const FitError& e) {
      last_failure = e.what();
    }
  }
  if (!best) throw FitError("Fano fit failed: " + last_failure);

  FanoFit out;
  out.params = detail::fano_from_vector(best->params);
  if (out.params.fwhm < 0.0) {
    out.params.fwhm = -out.params.fwhm;
    out.params.q = -out.params.q;
  }
  out.errors = {best->error(0), best->error(1), best->error(2), best->error(3)};
  out.residual_norm = best->residual_norm;
  out.evaluations = best->evaluations;
  return out;
}

}  // namespace qplas::spectrum
