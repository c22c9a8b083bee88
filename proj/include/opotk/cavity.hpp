#pragma once

#include <cstdint>
#include <vector>

#include "opotk/dispersion.hpp"

namespace opotk {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

/// Mirror and loss budget of the monolithic cavity. Transmittances are
/// power fractions.
struct CavitySpec {
    double output_coupler_t = 0.118;  ///< output coupler power transmittance
    double intra_cavity_loss = 0.008; ///< round-trip intra-cavity loss
    double hr_transmittance = 0.0;    ///< high-reflector residual transmittance

    void validate() const;
};

/// One longitudinal resonance 2*l*n(T) = m*lambda.
struct ResonancePoint {
    double temperature_c = 0.0;
    std::int64_t mode_index = 0;
};

/// Temperature spacing of adjacent resonances, lambda / (2*l*|dn/dT|).
/// Throws std::invalid_argument when dn_dt_fund is zero.
double fsr_temperature(const CrystalSpec& crystal);

/// All resonance temperatures in [t_lo, t_hi], one per integer mode index,
/// sorted by temperature. Closed form on the linearized index model.
std::vector<ResonancePoint> resonance_temperatures(const CrystalSpec& crystal,
                                                   double t_lo_c, double t_hi_c);

/// Resonance solver for an arbitrary index model: scans the round-trip
/// phase and refines each integer crossing by bisection to 1e-6 K.
std::vector<ResonancePoint> resonance_temperatures(const IndexModel& model,
                                                   double length_m,
                                                   double wavelength_m,
                                                   double t_lo_c, double t_hi_c);

/// Free spectral range in frequency, c / (2 * n0_fund * l).
double fsr_frequency(const CrystalSpec& crystal);

/// Cavity half width at half maximum in frequency,
/// fsr_frequency * (T + L) / (4*pi). High-finesse approximation.
double cavity_hwhm(const CrystalSpec& crystal, const CavitySpec& cavity);

/// Full width at half maximum of a resonance in temperature,
/// fsr_temperature * (T + L) / (2*pi).
double temperature_linewidth(const CrystalSpec& crystal, const CavitySpec& cavity);

/// Fraction of intra-cavity field that leaves through the output coupler,
/// T / (T + L). Throws std::invalid_argument when T <= 0.
double escape_efficiency(const CavitySpec& cavity);

/// Peak-normalized Airy transmission at one temperature, via the
/// round-trip phase 4*pi*l*n(T)/lambda.
double transmission(const CrystalSpec& crystal, const CavitySpec& cavity,
                    double temperature_c);

/// transmission() evaluated over a list of temperatures.
std::vector<double> transmission_profile(const CrystalSpec& crystal,
                                         const CavitySpec& cavity,
                                         const std::vector<double>& temperatures_c);

} // namespace opotk
