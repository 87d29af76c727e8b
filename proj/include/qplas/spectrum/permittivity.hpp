#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "qplas/core/error.hpp"

namespace qplas::spectrum {

inline constexpr double kHcEvNm = 1239.841984;  // photon energy [eV] * wavelength [nm]

inline constexpr double kEpsilonAir = 1.0;
inline constexpr double kEpsilonGlass = 2.25;

/// Complex relative permittivity tabulated on a strictly increasing wavelength grid.
class PermittivityTable {
public:
  PermittivityTable(std::vector<double> wavelengths_nm, std::vector<std::complex<double>> epsilon)
      : wavelengths_(std::move(wavelengths_nm)), epsilon_(std::move(epsilon)) {
    if (wavelengths_.size() != epsilon_.size() || wavelengths_.size() < 2)
      throw InvalidArgument("permittivity table needs >= 2 matching nodes");
    for (std::size_t i = 1; i < wavelengths_.size(); ++i)
      if (!(wavelengths_[i] > wavelengths_[i - 1]))
        throw InvalidArgument("permittivity wavelengths must be strictly increasing");
  }

  double min_wavelength() const { return wavelengths_.front(); }
  double max_wavelength() const { return wavelengths_.back(); }
  bool contains(double lambda_nm) const {
    return lambda_nm >= min_wavelength() && lambda_nm <= max_wavelength();
  }

  /// Linear interpolation of real and imaginary parts; exact at nodes.
  std::complex<double> operator()(double lambda_nm) const {
    if (!contains(lambda_nm))
      throw DomainError("wavelength " + std::to_string(lambda_nm) + " nm outside permittivity table [" +
                        std::to_string(min_wavelength()) + ", " + std::to_string(max_wavelength()) + "] nm");
    auto hi = std::lower_bound(wavelengths_.begin(), wavelengths_.end(), lambda_nm);
    const auto i = static_cast<std::size_t>(hi - wavelengths_.begin());
    if (*hi == lambda_nm) return epsilon_[i];
    const double f = (lambda_nm - wavelengths_[i - 1]) / (wavelengths_[i] - wavelengths_[i - 1]);
    return epsilon_[i - 1] + f * (epsilon_[i] - epsilon_[i - 1]);
  }

  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
  const std::vector<std::complex<double>>& values() const noexcept { return epsilon_; }

private:
  std::vector<double> wavelengths_;
  std::vector<std::complex<double>> epsilon_;
};

namespace detail {
struct NkRow {
  double energy_ev, n, k;
};

// Gold, P. B. Johnson and R. W. Christy, Phys. Rev. B 6, 4370 (1972).
inline constexpr std::array<NkRow, 49> kGoldJohnsonChristy{{
    {0.64, 0.92, 13.78}, {0.77, 0.56, 11.21}, {0.89, 0.43, 9.519}, {1.02, 0.35, 8.145}, {1.14, 0.27, 7.150},
    {1.26, 0.22, 6.350}, {1.39, 0.17, 5.663}, {1.51, 0.16, 5.083}, {1.64, 0.14, 4.542}, {1.76, 0.13, 4.103},
    {1.88, 0.14, 3.697}, {2.01, 0.21, 3.272}, {2.13, 0.29, 2.863}, {2.26, 0.43, 2.455}, {2.38, 0.62, 2.081},
    {2.50, 1.04, 1.833}, {2.63, 1.31, 1.849}, {2.75, 1.38, 1.914}, {2.88, 1.45, 1.948}, {3.00, 1.46, 1.958},
    {3.12, 1.47, 1.952}, {3.25, 1.46, 1.933}, {3.37, 1.48, 1.895}, {3.50, 1.50, 1.866}, {3.62, 1.48, 1.871},
    {3.74, 1.48, 1.883}, {3.87, 1.54, 1.898}, {3.99, 1.53, 1.893}, {4.12, 1.53, 1.889}, {4.24, 1.49, 1.878},
    {4.36, 1.47, 1.869}, {4.49, 1.43, 1.847}, {4.61, 1.38, 1.803}, {4.74, 1.35, 1.749}, {4.86, 1.33, 1.688},
    {4.98, 1.33, 1.631}, {5.11, 1.32, 1.577}, {5.23, 1.32, 1.536}, {5.36, 1.30, 1.497}, {5.48, 1.31, 1.460},
    {5.60, 1.30, 1.427}, {5.73, 1.30, 1.387}, {5.85, 1.30, 1.350}, {5.98, 1.30, 1.304}, {6.10, 1.33, 1.277},
    {6.22, 1.33, 1.251}, {6.35, 1.34, 1.226}, {6.47, 1.32, 1.203}, {6.60, 1.28, 1.188},
}};
}  // namespace detail

/// Embedded gold optical constants, 188-1937 nm.
inline const PermittivityTable& gold_table() {
  static const PermittivityTable table = [] {
    std::vector<double> lambda;
    std::vector<std::complex<double>> eps;
    for (auto it = detail::kGoldJohnsonChristy.rbegin(); it != detail::kGoldJohnsonChristy.rend(); ++it) {
      lambda.push_back(kHcEvNm / it->energy_ev);
      const std::complex<double> index(it->n, it->k);
      eps.push_back(index * index);
    }
    return PermittivityTable(std::move(lambda), std::move(eps));
  }();
  return table;
}

inline std::complex<double> gold_permittivity(double lambda_nm) { return gold_table()(lambda_nm); }

}  // namespace qplas::spectrum
