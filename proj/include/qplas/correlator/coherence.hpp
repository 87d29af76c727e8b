#pragma once

// Zero-delay coherence estimators and the Cauchy-Schwarz test of
// nonclassical signal-idler correlation. Raw counts only: no accidental
// subtraction anywhere, since that would invalidate the inequality.

#include <cmath>
#include <cstdint>
#include <vector>

#include "qplas/correlator/histogram.hpp"

namespace qplas {

/// g(0) between the two outputs of a split field, counting pairs with
/// |b - a| < half_window.
inline Estimate auto_g2_zero(const TimeTagStream& stream, const ChannelSet& a, const ChannelSet& b,
                             TimePs half_window) {
  if (half_window <= 0) throw InvalidArgument("coincidence window must be > 0");
  const auto h = coincidence_histogram(stream, a, b, half_window, -half_window, half_window);
  const double norm = 2.0 * accidental_level(h);
  const auto c = static_cast<double>(h.total());
  return {c / norm, std::sqrt(std::max(c, 1.0)) / norm};
}

inline Estimate auto_g2_zero(const TimeTagStream& stream, Channel a, Channel b, TimePs half_window) {
  return auto_g2_zero(stream, ChannelSet{a}, ChannelSet{b}, half_window);
}

struct HeraldedCounts {
  std::uint64_t heralds = 0;  // N1
  std::uint64_t doubles_a = 0;  // N12
  std::uint64_t doubles_b = 0;  // N13
  std::uint64_t triples = 0;  // N123
};

/// Per herald at h, counts A and B tags in [h + lo, h + hi); triples are the
/// A-B pairs sharing a herald window.
inline HeraldedCounts heralded_counts(const TimeTagStream& stream, const ChannelSet& herald, const ChannelSet& a,
                                      const ChannelSet& b, TimePs lo, TimePs hi) {
  if (hi <= lo) throw InvalidArgument("herald window must have hi > lo");
  if (herald.intersects(a) || herald.intersects(b) || a.intersects(b))
    throw InvalidArgument("herald and detector channel sets must be disjoint");
  const auto ta = detail::select(stream, a);
  const auto tb = detail::select(stream, b);
  HeraldedCounts n;
  std::size_t a_lo = 0, a_hi = 0, b_lo = 0, b_hi = 0;
  for (const auto& tag : stream.tags()) {
    if (!herald.contains(tag.channel)) continue;
    ++n.heralds;
    const TimePs from = tag.time + lo, to = tag.time + hi;
    while (a_lo < ta.size() && ta[a_lo].time < from) ++a_lo;
    a_hi = std::max(a_hi, a_lo);
    while (a_hi < ta.size() && ta[a_hi].time < to) ++a_hi;
    while (b_lo < tb.size() && tb[b_lo].time < from) ++b_lo;
    b_hi = std::max(b_hi, b_lo);
    while (b_hi < tb.size() && tb[b_hi].time < to) ++b_hi;
    const std::uint64_t n2 = a_hi - a_lo, n3 = b_hi - b_lo;
    n.doubles_a += n2;
    n.doubles_b += n3;
    n.triples += n2 * n3;
  }
  return n;
}

struct HeraldedG2 {
  double value = 0.0;
  double error = 0.0;
  HeraldedCounts counts;
};

/// g2 = N123 N1 / (N12 N13), error from independent Poisson counts. With no
/// triples the error uses one count, so a zero estimate still has a scale.
inline HeraldedG2 heralded_g2_from_counts(const HeraldedCounts& n) {
  if (n.doubles_a == 0 || n.doubles_b == 0 || n.heralds == 0)
    throw AnalysisError(AnalysisError::Kind::UndefinedStatistics,
                        "undefined heralded g2: N12 * N13 = 0 (no heralded detections on one output)");
  const auto n1 = static_cast<double>(n.heralds), n12 = static_cast<double>(n.doubles_a),
             n13 = static_cast<double>(n.doubles_b), n123 = static_cast<double>(n.triples);
  HeraldedG2 g;
  g.counts = n;
  g.value = n123 * n1 / (n12 * n13);
  const double unit = n1 / (n12 * n13);
  if (n.triples == 0) {
    g.error = unit;
  } else {
    g.error = g.value * std::sqrt(1.0 / n123 + 1.0 / n1 + 1.0 / n12 + 1.0 / n13);
  }
  return g;
}

inline HeraldedG2 heralded_g2_zero(const TimeTagStream& stream, const ChannelSet& herald, const ChannelSet& a,
                                   const ChannelSet& b, TimePs lo, TimePs hi) {
  return heralded_g2_from_counts(heralded_counts(stream, herald, a, b, lo, hi));
}

inline HeraldedG2 heralded_g2_zero(const TimeTagStream& stream, Channel herald, Channel a, Channel b,
                                   TimePs half_window) {
  return heralded_g2_zero(stream, ChannelSet{herald}, ChannelSet{a}, ChannelSet{b}, -half_window, half_window);
}

struct CauchySchwarzOptions {
  ChannelSet herald_pair{channels::kHerald, channels::kHeraldSplit};
  ChannelSet reemit_pair{channels::kReemitA, channels::kReemitB};
  TimePs bin_width = 1000;
  TimePs tau_min = -504'000;
  TimePs tau_max = 504'000;
  /// Half-width of the zero-delay window for g_ii(0) and g_rr(0).
  TimePs auto_half_window = 5'000'000;
};

struct CauchySchwarzResult {
  double bin_width = 0.0;  // ns
  std::vector<double> tau;  // ns
  std::vector<double> values;
  std::vector<double> errors;
  /// False where g_ii(0) g_rr(0) is not positive; value and error are NaN there.
  std::vector<bool> defined;
  CorrelationCurve cross;
  Estimate g_ii0;
  Estimate g_rr0;

  std::size_t size() const noexcept { return values.size(); }
  std::size_t peak_index() const {
    std::size_t best = 0;
    bool found = false;
    for (std::size_t k = 0; k < values.size(); ++k)
      if (defined[k] && (!found || values[k] > values[best])) best = k, found = true;
    return best;
  }
};

namespace detail {
inline std::pair<ChannelSet, ChannelSet> split_pair(const ChannelSet& s, const char* what) {
  if (s.channels().size() != 2) throw InvalidArgument(std::string(what) + " must name exactly two channels");
  return {ChannelSet{s.channels()[0]}, ChannelSet{s.channels()[1]}};
}
}  // namespace detail

/// C(tau) = g_ir(tau)^2 / (g_ii(0) g_rr(0)). g_ir correlates the merged
/// herald channels (start) against the merged reemission channels (stop);
/// the zero-delay autocorrelations come from the split outputs of each field.
inline CauchySchwarzResult cauchy_schwarz(const TimeTagStream& stream, const CauchySchwarzOptions& opt) {
  if (opt.herald_pair.intersects(opt.reemit_pair))
    throw InvalidArgument("herald and reemission channels must be disjoint");
  const auto [i1, i2] = detail::split_pair(opt.herald_pair, "herald pair");
  const auto [r1, r2] = detail::split_pair(opt.reemit_pair, "reemission pair");

  CauchySchwarzResult out;
  out.g_ii0 = auto_g2_zero(stream, i1, i2, opt.auto_half_window);
  out.g_rr0 = auto_g2_zero(stream, r1, r2, opt.auto_half_window);
  out.cross = normalize(
      coincidence_histogram(stream, opt.herald_pair, opt.reemit_pair, opt.bin_width, opt.tau_min, opt.tau_max));
  out.bin_width = out.cross.bin_width;
  out.tau = out.cross.tau;

  const double d = out.g_ii0.value * out.g_rr0.value;
  const double rel_d = d > 0.0 ? std::hypot(out.g_ii0.error / out.g_ii0.value, out.g_rr0.error / out.g_rr0.value)
                               : 0.0;
  for (std::size_t k = 0; k < out.cross.size(); ++k) {
    if (!(d > 0.0)) {
      out.values.push_back(std::nan(""));
      out.errors.push_back(std::nan(""));
      out.defined.push_back(false);
      continue;
    }
    const double g = out.cross.values[k], s = out.cross.errors[k];
    const double c = g * g / d;
    // Numerator error includes the second-order term so that g = 0 still
    // carries a finite upward uncertainty.
    const double num_err = (2.0 * std::abs(g) * s + s * s) / d;
    out.values.push_back(c);
    out.errors.push_back(std::hypot(num_err, c * rel_d));
    out.defined.push_back(true);
  }
  return out;
}

}  // namespace qplas
