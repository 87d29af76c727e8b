#include <gtest/gtest.h>

#include <cmath>

#include "qplas/core/rng.hpp"
#include "qplas/spectrum/fano.hpp"
#include "qplas/spectrum/spp.hpp"

using namespace qplas;
using namespace qplas::spectrum;

TEST(Bethe, ClosedFormAtReferenceGeometry) {
  // 64/(27 pi^2) (k r)^4 evaluated by hand: k r = 2 pi 100 / 795.
  const double kr = 2.0 * 3.14159265358979323846 * 100.0 / 795.0;
  const double hole = 64.0 / (27.0 * 9.8696044010893586) * kr * kr * kr * kr;
  EXPECT_NEAR(bethe_hole_transmission(200.0, 795.0), hole, 1e-14);
  EXPECT_NEAR(hole, 0.094, 0.002);
  const ArrayGeometry g;
  const double array = bethe_transmittance(g, 795.0);
  EXPECT_NEAR(array, hole * 3.14159265358979323846 * 100.0 * 100.0 / (430.0 * 430.0), 1e-14);
  EXPECT_NEAR(array, 0.016, 0.001);
}

TEST(Bethe, ScalingAndMonotonicity) {
  const ArrayGeometry g;
  EXPECT_NEAR(bethe_transmittance(g, 7950.0) / bethe_transmittance(g, 795.0), 1e-4, 1e-16);
  ArrayGeometry tiny = g;
  tiny.hole_diameter = 1e-3;
  EXPECT_LT(bethe_transmittance(tiny, 795.0), 1e-20);
  double prev = 0.0;
  for (double d = 50.0; d < 430.0; d += 10.0) {
    ArrayGeometry x = g;
    x.hole_diameter = d;
    EXPECT_GT(bethe_transmittance(x, 795.0), prev);
    prev = bethe_transmittance(x, 795.0);
  }
  for (double l = 600.0; l < 1000.0; l += 10.0) EXPECT_GT(bethe_transmittance(g, l), bethe_transmittance(g, l + 10.0));
  EXPECT_THROW(bethe_hole_transmission(200.0, 0.0), InvalidArgument);
}

TEST(Permittivity, GoldTableProperties) {
  const auto& t = gold_table();
  for (std::size_t k = 0; k < t.wavelengths().size(); ++k) EXPECT_EQ(t(t.wavelengths()[k]), t.values()[k]);
  for (double l = 600.0; l <= 1000.0; l += 5.0) EXPECT_LT(gold_permittivity(l).real(), 0.0);
  EXPECT_THROW(gold_permittivity(100.0), DomainError);
  EXPECT_THROW(gold_permittivity(2500.0), DomainError);
}

TEST(Permittivity, AgreesWithDrudeLorentzFitAt795) {
  // Independent cross-check: Drude-Lorentz fit to gold in the near infrared
  // (Vial et al., PRB 71, 085416: eps_inf 5.9673, wp 1.328e16 rad/s,
  // gamma 1.0e14 rad/s, one Lorentz term). At 795 nm the Drude part dominates.
  const double c = 2.99792458e17;  // nm/s
  const double w = 2.0 * 3.14159265358979323846 * c / 795.0;
  const double eps_inf = 5.9673, wp = 1.328e16, gamma = 1.0e14;
  const double dl = 1.09, wl = 4.084e15, gl = 6.59e14;
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> eps = eps_inf - wp * wp / (w * w + i * gamma * w) -
                                   dl * wl * wl / (w * w - wl * wl + i * gl * w);
  const auto table = gold_permittivity(795.0);
  EXPECT_NEAR(table.real(), eps.real(), 0.05 * std::abs(eps.real()));
}

TEST(Spp, NormalIncidenceDegeneracy) {
  const ArrayGeometry g;
  for (auto side : {Interface::Air, Interface::Glass}) {
    const auto l = spp_resonance_wavelengths(g, gold_table(), side, 0.0, Polarization::TM,
                                             {{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
    for (double x : l) EXPECT_NEAR(x, l[0], 1e-9 * l[0]);
  }
}

TEST(Spp, GlassResonanceRedOfAir) {
  const ArrayGeometry g;
  const auto air = spp_resonance_wavelength(g, gold_table(), Interface::Air, 0.0, Polarization::TM, {1, 0});
  const auto glass = spp_resonance_wavelength(g, gold_table(), Interface::Glass, 0.0, Polarization::TM, {1, 0});
  EXPECT_GT(glass.wavelength, air.wavelength);
}

TEST(Spp, ConvergesForAllLowOrders) {
  const ArrayGeometry g;
  const std::vector<DiffractionOrder> orders{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  for (auto side : {Interface::Air, Interface::Glass})
    for (auto pol : {Polarization::TM, Polarization::TE})
      for (double theta = 0.0; theta <= 15.0; theta += 2.5)
        for (const auto& o : orders) {
          const auto r = spp_resonance_wavelength(g, gold_table(), side, theta, pol, o);
          EXPECT_LT(r.residual, 1e-6) << o.label() << " theta " << theta;
        }
}

TEST(Spp, TmSplitsAndTeStays) {
  const ArrayGeometry g;
  auto tm_split = [&](double theta) {
    const auto l = spp_resonance_wavelengths(g, gold_table(), Interface::Glass, theta, Polarization::TM, {{1, 0}, {-1, 0}});
    return std::abs(l[0] - l[1]);
  };
  double prev = tm_split(1.0);
  EXPECT_GT(prev, 0.0);
  for (double theta = 2.0; theta <= 10.0; theta += 1.0) {
    const double s = tm_split(theta);
    EXPECT_GT(s, prev) << theta;
    prev = s;
  }
  const double te0 =
      spp_resonance_wavelength(g, gold_table(), Interface::Glass, 0.0, Polarization::TE, {1, 0}).wavelength;
  for (double theta = 1.0; theta <= 10.0; theta += 1.0) {
    const double te =
        spp_resonance_wavelength(g, gold_table(), Interface::Glass, theta, Polarization::TE, {1, 0}).wavelength;
    EXPECT_LT(std::abs(te - te0) / te0, 0.01);
  }
}

TEST(Spp, RejectsZeroOrderAndOutOfTable) {
  const ArrayGeometry g;
  EXPECT_THROW(spp_resonance_wavelength(g, gold_table(), Interface::Air, 0.0, Polarization::TM, {0, 0}), InvalidArgument);
  EXPECT_THROW(spp_resonance_wavelengths(g, gold_table(), Interface::Air, 0.0, Polarization::TM, {}), InvalidArgument);
  const PermittivityTable narrow({600.0, 610.0}, {{-10.0, 1.0}, {-11.0, 1.0}});
  EXPECT_THROW(spp_resonance_wavelength(g, narrow, Interface::Glass, 0.0, Polarization::TM, {1, 0}), DomainError);
}

TEST(Fano, MeasuredPresetGivesReferenceTransmittance) {
  const ArrayGeometry g;
  const auto p = measured_sample_resonance();
  const auto s = fano_spectrum(g, p, wavelength_grid(600.0, 1000.0, 0.25));
  const double peak = *std::max_element(s.total.begin(), s.total.end());
  EXPECT_NEAR(peak, 0.36, 1e-3);
  EXPECT_NEAR(s.at(795.0), 0.34, 0.02);
  EXPECT_NEAR(fano_transmittance(g, p, p.peak_wavelength()).total(), 0.36, 1e-12);
  for (double t : s.total) {
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(Fano, DesignedPresetAndTail) {
  const ArrayGeometry g;
  const auto p = designed_sample_resonance();
  EXPECT_NEAR(fano_transmittance(g, p, p.peak_wavelength()).total(), 0.5, 1e-12);
  // Far from the resonance the lineshape factor tends to 1, leaving the
  // continuum level on top of the diffraction background.
  const double far = p.center + 1e5 * p.fwhm;
  const auto parts = fano_transmittance(g, p, far);
  EXPECT_NEAR(parts.resonance, fano_continuum_level(g, p), 1e-3 * fano_continuum_level(g, p));
}

TEST(Fano, RejectsBadParameters) {
  const ArrayGeometry g;
  EXPECT_THROW(fano_spectrum(g, {795.0, 0.0, 50.0, 5.0}, {700.0, 800.0}), InvalidArgument);
  EXPECT_THROW(fano_spectrum(g, {795.0, 0.5, -1.0, 5.0}, {700.0, 800.0}), InvalidArgument);
  EXPECT_THROW(fano_spectrum(g, {795.0, 0.5, 50.0, 5.0}, {800.0, 700.0}), InvalidArgument);
}

TEST(FanoFit, NoiselessRoundTrip) {
  const ArrayGeometry g;
  for (const auto& truth : {measured_sample_resonance(), designed_sample_resonance(), FanoParams{760.0, 0.3, 70.0, -3.0}}) {
    std::vector<SpectrumPoint> pts;
    for (double l = 600.0; l <= 1000.0; l += 8.0) pts.push_back({l, fano_transmittance(g, truth, l).total()});
    const auto fit = fit_fano(g, pts);
    EXPECT_NEAR(fit.params.center, truth.center, 1e-6 * truth.center);
    EXPECT_NEAR(fit.params.peak_transmittance, truth.peak_transmittance, 1e-6 * truth.peak_transmittance);
    EXPECT_NEAR(fit.params.fwhm, truth.fwhm, 1e-6 * truth.fwhm);
    EXPECT_NEAR(fit.params.q, truth.q, 1e-6 * std::abs(truth.q));
  }
}

TEST(FanoFit, TwoPercentNoise) {
  const ArrayGeometry g;
  const auto truth = measured_sample_resonance();
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RngStream rng({seed, 5});
    std::vector<SpectrumPoint> pts;
    for (int k = 0; k < 50; ++k) {
      const double l = 600.0 + 400.0 * k / 49.0;
      pts.push_back({l, fano_transmittance(g, truth, l).total() * (1.0 + 0.02 * rng.normal())});
    }
    const auto f = fit_fano(g, pts).params;
    good += std::abs(f.peak_wavelength() - truth.peak_wavelength()) < 0.05 * truth.peak_wavelength() &&
            std::abs(f.peak_transmittance - truth.peak_transmittance) < 0.05 * truth.peak_transmittance &&
            std::abs(f.fwhm - truth.fwhm) < 0.05 * truth.fwhm;
  }
  EXPECT_GE(good, 19);
}

TEST(FanoFit, NeedsFivePoints) {
  EXPECT_THROW(fit_fano(ArrayGeometry{}, {{700, 0.1}, {750, 0.2}, {800, 0.3}, {850, 0.2}}), InvalidArgument);
}
