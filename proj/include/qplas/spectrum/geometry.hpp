#pragma once

#include <cmath>
#include <numbers>

#include "qplas/core/error.hpp"

namespace qplas::spectrum {

/// Square array of circular holes in a metal film.
struct ArrayGeometry {
  double pitch = 430.0;          // nm
  double hole_diameter = 200.0;  // nm
  double film_thickness = 100.0; // nm
  double taper_angle = 17.0;     // degrees; enters only through fitted resonance parameters

  void validate() const {
    if (!(hole_diameter > 0.0 && hole_diameter < pitch))
      throw InvalidArgument("geometry requires 0 < hole_diameter < pitch");
    if (!(film_thickness > 0.0)) throw InvalidArgument("geometry requires film_thickness > 0");
  }

  double fill_factor() const {
    const double r = 0.5 * hole_diameter;
    return std::numbers::pi * r * r / (pitch * pitch);
  }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

/// Bethe small-aperture transmission normalized to the hole area, 64/(27 pi^2) (k r)^4.
inline double bethe_hole_transmission(double hole_diameter_nm, double lambda_nm) {
  if (!(lambda_nm > 0.0)) throw InvalidArgument("wavelength must be > 0");
  const double kr = 2.0 * std::numbers::pi / lambda_nm * 0.5 * hole_diameter_nm;
  return 64.0 / (27.0 * std::numbers::pi * std::numbers::pi) * std::pow(kr, 4);
}

/// Array transmittance from diffraction alone: per-hole transmission times fill factor.
inline double bethe_transmittance(const ArrayGeometry& geom, double lambda_nm) {
  return bethe_hole_transmission(geom.hole_diameter, lambda_nm) * geom.fill_factor();
}

}  // namespace qplas::spectrum
