#pragma once

// Grating-coupled surface plasmon resonances of a square hole array:
//   |k_par + i G x + j G y| = k0 Re sqrt(eps_m eps_d / (eps_m + eps_d)),
// with G = 2 pi / p and k_par = k0 sin(theta) along x for TM and along y for
// TE incidence. Because eps_m depends on wavelength the condition is solved by
// relaxed fixed-point iteration on lambda.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qplas/spectrum/geometry.hpp"
#include "qplas/spectrum/permittivity.hpp"

namespace qplas::spectrum {

enum class Interface { Air, Glass };
enum class Polarization { TM, TE };

inline double dielectric_constant(Interface side) { return side == Interface::Air ? kEpsilonAir : kEpsilonGlass; }

struct DiffractionOrder {
  int i = 1;
  int j = 0;

  std::string label() const { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }
  friend bool operator==(const DiffractionOrder&, const DiffractionOrder&) = default;
};

struct SppResonance {
  DiffractionOrder order;
  double wavelength = 0.0;  // nm
  double residual = 0.0;    // relative |map(lambda) - lambda| / lambda at exit
  int iterations = 0;
};

/// Real part of the surface-plasmon effective index at the interface.
inline double spp_effective_index(std::complex<double> eps_metal, double eps_dielectric) {
  return std::sqrt(eps_metal * eps_dielectric / (eps_metal + eps_dielectric)).real();
}

/// Wavelength satisfying the momentum-matching condition for a fixed index.
inline double momentum_matched_wavelength(double pitch, double n_spp, double sin_theta, double along, double total_sq) {
  const double denom = n_spp * n_spp - sin_theta * sin_theta;
  const double u = (sin_theta * along + std::sqrt(sin_theta * sin_theta * along * along + denom * total_sq)) /
                   (pitch * denom);
  return 1.0 / u;
}

inline SppResonance spp_resonance_wavelength(const ArrayGeometry& geom, const PermittivityTable& perm,
                                             Interface side, double theta_deg, Polarization pol,
                                             DiffractionOrder order, double rel_tol = 1e-9) {
  if (order.i == 0 && order.j == 0) throw InvalidArgument("diffraction order (0,0) does not couple to plasmons");
  const double eps_d = dielectric_constant(side);
  const double s = std::sin(theta_deg * std::numbers::pi / 180.0);
  const double along = pol == Polarization::TM ? order.i : order.j;
  const double total_sq = static_cast<double>(order.i * order.i + order.j * order.j);

  auto map = [&](double lambda) {
    if (!perm.contains(lambda))
      throw DomainError("no plasmon resonance for order " + order.label() + " within permittivity table [" +
                        std::to_string(perm.min_wavelength()) + ", " + std::to_string(perm.max_wavelength()) +
                        "] nm (iterate left the table at " + std::to_string(lambda) + " nm)");
    return momentum_matched_wavelength(geom.pitch, spp_effective_index(perm(lambda), eps_d), s, along, total_sq);
  };

  // Start from the perfect-conductor limit, where n_spp = sqrt(eps_d).
  double lambda = momentum_matched_wavelength(geom.pitch, std::sqrt(eps_d), s, along, total_sq);
  if (!perm.contains(lambda)) lambda = std::clamp(lambda, perm.min_wavelength(), perm.max_wavelength());

  double relax = 1.0;
  double residual = map(lambda) - lambda;
  for (int it = 1; it <= 500; ++it) {
    const double rel = std::abs(residual) / lambda;
    if (rel < rel_tol) return {order, lambda, rel, it};
    double candidate = lambda;
    double candidate_residual = residual;
    bool accepted = false;
    for (; relax > 1e-6; relax *= 0.5) {
      candidate = lambda + relax * residual;
      if (!perm.contains(candidate)) continue;
      candidate_residual = map(candidate) - candidate;
      if (std::abs(candidate_residual) < std::abs(residual)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    lambda = candidate;
    residual = candidate_residual;
    relax = std::min(1.0, relax * 2.0);
  }

  // Relaxation stalled (the map is only piecewise smooth because eps_m is
  // interpolated): bracket a sign change of map(lambda) - lambda across the
  // table, nearest the last iterate, and bisect.
  constexpr int kScan = 4096;
  const double lo_log = std::log(perm.min_wavelength()), hi_log = std::log(perm.max_wavelength());
  double best_a = 0.0, best_b = 0.0, best_distance = std::numeric_limits<double>::infinity();
  double prev_x = perm.min_wavelength(), prev_f = map(prev_x) - prev_x;
  for (int k = 1; k <= kScan; ++k) {
    const double x = std::exp(lo_log + (hi_log - lo_log) * k / kScan);
    const double f = map(std::min(x, perm.max_wavelength())) - x;
    if ((prev_f <= 0.0) != (f <= 0.0)) {
      const double distance = std::abs(0.5 * (prev_x + x) - lambda);
      if (distance < best_distance) {
        best_distance = distance;
        best_a = prev_x;
        best_b = x;
      }
    }
    prev_x = x;
    prev_f = f;
  }
  if (!std::isfinite(best_distance))
    throw DomainError("no plasmon resonance for order " + order.label() + " inside the permittivity table");
  double fa = map(best_a) - best_a;
  int it = 0;
  while ((best_b - best_a) / best_a > 1e-13 && it < 200) {
    const double mid = 0.5 * (best_a + best_b);
    const double fm = map(mid) - mid;
    if ((fm <= 0.0) == (fa <= 0.0)) {
      best_a = mid;
      fa = fm;
    } else {
      best_b = mid;
    }
    ++it;
  }
  lambda = 0.5 * (best_a + best_b);
  return {order, lambda, std::abs(map(lambda) - lambda) / lambda, 500 + it};
}

/// One resonance wavelength per requested order, in request order.
inline std::vector<double> spp_resonance_wavelengths(const ArrayGeometry& geom, const PermittivityTable& perm,
                                                     Interface side, double theta_deg, Polarization pol,
                                                     const std::vector<DiffractionOrder>& orders) {
  if (orders.empty()) throw InvalidArgument("at least one diffraction order is required");
  geom.validate();
  std::vector<double> out;
  out.reserve(orders.size());
  for (const auto& o : orders) out.push_back(spp_resonance_wavelength(geom, perm, side, theta_deg, pol, o).wavelength);
  return out;
}

}  // namespace qplas::spectrum
