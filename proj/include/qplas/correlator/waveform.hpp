#pragma once

// Herald-conditioned delay histograms as estimates of the single-photon
// temporal wavepacket, and the tools to compare and characterize them.

#include <algorithm>
#include <cmath>
#include <vector>

#include "qplas/core/wavepacket.hpp"
#include "qplas/correlator/histogram.hpp"
#include "qplas/fit/least_squares.hpp"

namespace qplas {

/// Histogram of (signal - herald) delays over [tau_min, tau_max) with sqrt(N)
/// errors. An empty result is returned as a zero waveform (see empty()).
inline TemporalWaveform reconstruct_waveform(const TimeTagStream& stream, const ChannelSet& herald,
                                             const ChannelSet& signal, TimePs bin_width, TimePs tau_min,
                                             TimePs tau_max) {
  const auto h = coincidence_histogram(stream, herald, signal, bin_width, tau_min, tau_max);
  TemporalWaveform w;
  w.bin_width = ps_to_ns(bin_width);
  w.start = ps_to_ns(tau_min);
  for (auto c : h.counts) {
    w.counts.push_back(static_cast<double>(c));
    w.errors.push_back(std::sqrt(static_cast<double>(c)));
  }
  return w;
}

inline double cosine_similarity(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw AnalysisError(AnalysisError::Kind::GridMismatch, "cosine similarity needs vectors of equal length");
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xy += x[k] * y[k];
    xx += x[k] * x[k];
    yy += y[k] * y[k];
  }
  if (xx == 0.0 || yy == 0.0)
    throw AnalysisError(AnalysisError::Kind::ZeroNorm, "cosine similarity undefined for a zero-norm input");
  return xy / (std::sqrt(xx) * std::sqrt(yy));
}

inline bool same_grid(const TemporalWaveform& a, const TemporalWaveform& b) {
  const double tol = 1e-9 * std::max(1.0, std::abs(a.bin_width));
  return a.size() == b.size() && std::abs(a.bin_width - b.bin_width) <= tol && std::abs(a.start - b.start) <= tol;
}

inline double cosine_similarity(const TemporalWaveform& a, const TemporalWaveform& b) {
  if (!same_grid(a, b))
    throw AnalysisError(AnalysisError::Kind::GridMismatch,
                        "waveforms are on different bin grids; resample to a common grid first");
  return cosine_similarity(a.counts, b.counts);
}

/// Redistributes counts onto a new grid in proportion to bin overlap, which
/// conserves the total inside the common span. Errors are re-derived as the
/// square root of the summed squared contributions.
inline TemporalWaveform resample(const TemporalWaveform& w, double start, double bin_width, std::size_t bins) {
  if (!(bin_width > 0.0)) throw InvalidArgument("bin width must be > 0");
  TemporalWaveform out;
  out.start = start;
  out.bin_width = bin_width;
  out.counts.assign(bins, 0.0);
  std::vector<double> var(bins, 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double lo = w.start + static_cast<double>(k) * w.bin_width, hi = lo + w.bin_width;
    const double first = std::floor((lo - start) / bin_width), last = std::floor((hi - start) / bin_width);
    for (double j = std::max(first, 0.0); j <= last && j < static_cast<double>(bins); j += 1.0) {
      const double a = start + j * bin_width, b = a + bin_width;
      const double overlap = std::min(hi, b) - std::max(lo, a);
      if (overlap <= 0.0) continue;
      const double f = overlap / w.bin_width;
      const auto idx = static_cast<std::size_t>(j);
      out.counts[idx] += f * w.counts[k];
      if (k < w.errors.size()) var[idx] += f * f * w.errors[k] * w.errors[k];
    }
  }
  for (double v : var) out.errors.push_back(std::sqrt(v));
  return out;
}

/// Full width at half of the largest bin, by linear interpolation between bin
/// centres on each side of the maximum.
inline double half_max_fwhm(const TemporalWaveform& w) {
  if (w.empty()) throw AnalysisError(AnalysisError::Kind::ZeroNorm, "empty waveform has no width");
  const auto peak = static_cast<std::size_t>(std::max_element(w.counts.begin(), w.counts.end()) - w.counts.begin());
  const double half = 0.5 * w.counts[peak];
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double f = (w.counts[inside] - half) / (w.counts[inside] - w.counts[outside]);
    return w.bin_center(inside) + f * (w.bin_center(outside) - w.bin_center(inside));
  };
  double left = w.start, right = w.start + w.bin_width * static_cast<double>(w.size());
  for (std::size_t k = peak; k > 0; --k)
    if (w.counts[k - 1] < half) { left = crossing(k, k - 1); break; }
  for (std::size_t k = peak; k + 1 < w.size(); ++k)
    if (w.counts[k + 1] < half) { right = crossing(k, k + 1); break; }
  return right - left;
}

struct WaveformFit {
  BiphotonAmplitude amplitude;
  double area = 0.0;  // counts in the wavepacket
  double baseline = 0.0;  // counts per bin
  double fwhm_error = 0.0;
  double offset_error = 0.0;
  double reduced_chi2 = 0.0;
};

/// Weighted least-squares fit of area * (probability mass of the wavepacket in
/// each bin) + baseline to the histogram, weights 1/max(error, 1). Integrating
/// over the bin keeps the model smooth in the offset for shapes with a step.
inline WaveformFit fit_waveform(const TemporalWaveform& w, WavepacketShape shape) {
  if (w.empty()) throw AnalysisError(AnalysisError::Kind::ZeroNorm, "cannot fit an empty waveform");
  if (w.size() < 5) throw InvalidArgument("waveform fit needs at least 5 bins");
  const auto n = static_cast<int>(w.size());

  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const BiphotonAmplitude amp{shape, std::abs(p(2)) + 1e-12, p(1)};
    for (int k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const double lo = w.start + static_cast<double>(k) * w.bin_width;
      const double model = p(0) * (cumulative(amp, lo + w.bin_width) - cumulative(amp, lo)) + p(3);
      const double sigma = std::max(i < w.errors.size() ? w.errors[i] : 0.0, 1.0);
      r(k) = (model - w.counts[i]) / sigma;
    }
  };

  const auto peak = static_cast<std::size_t>(std::max_element(w.counts.begin(), w.counts.end()) - w.counts.begin());
  const double fwhm0 = std::max(half_max_fwhm(w), 2.0 * w.bin_width);
  double offset0 = w.bin_center(peak);
  // An exponential decay is parametrized by its leading edge, not its peak;
  // start a little inside the edge bin so the edge term has a gradient.
  if (shape == WavepacketShape::ExponentialDecay) offset0 -= 0.25 * w.bin_width;
  Eigen::VectorXd x0(4);
  x0 << w.total(), offset0, fwhm0, 0.0;
  const auto res = fit::least_squares(residuals, x0, n);

  WaveformFit out;
  out.amplitude = {shape, std::abs(res.params(2)), res.params(1)};
  out.area = res.params(0);
  out.baseline = res.params(3);
  out.fwhm_error = res.error(2);
  out.offset_error = res.error(1);
  out.reduced_chi2 = res.residual_norm * res.residual_norm / std::max(1, n - 4);
  return out;
}

}  // namespace qplas
