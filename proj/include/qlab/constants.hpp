#pragma once

namespace qlab {

// CODATA 2018 exact SI values.
struct PhysicalConstants {
  static constexpr double h = 6.62607015e-34;    // Planck constant, J s
  static constexpr double k_b = 1.380649e-23;    // Boltzmann constant, J/K
  static constexpr double e = 1.602176634e-19;   // elementary charge, C
  static constexpr double c0 = 299792458.0;      // vacuum light speed, m/s
};

// BCS weak-coupling gap from the critical temperature.
constexpr double bcs_gap_j(double t_c_kelvin) {
  return 1.764 * PhysicalConstants::k_b * t_c_kelvin;
}

}  // namespace qlab
