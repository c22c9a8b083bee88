#pragma once

#include "opotk/dispersion.hpp"

namespace opotk {

/// Which convention defines the phase-matching temperature window.
/// HalfMax is the full width at half maximum of the sinc^2 efficiency
/// curve. PiBound is the wider |delta_k * l| <= pi window.
enum class WidthCriterion { HalfMax, PiBound };

struct PhaseMatchPoint {
    double temperature_c = 0.0;
    double delta_k_per_m = 0.0;
    double eta = 1.0; ///< conversion efficiency, normalized to 1 at delta_k = 0
};

/// Residual quasi-phase-matched wave-vector mismatch at a temperature:
/// (delta_n_sh - delta_n_fund) * 4*pi / lambda. Zero at T_ref, odd in
/// (T - T_ref).
double delta_k(const CrystalSpec& spec, double temperature_c);

/// Normalized second-harmonic conversion efficiency sinc^2(delta_k*l/2),
/// equal to 1 at the phase-matching temperature. The removable singularity
/// at delta_k = 0 is evaluated by series expansion.
double conversion_efficiency(const CrystalSpec& spec, double temperature_c);

PhaseMatchPoint phase_match_point(const CrystalSpec& spec, double temperature_c);

/// Temperature window of phase matching, in kelvin. `doubly_resonant`
/// halves the width (the effective crystal length doubles when the second
/// harmonic also resonates). Throws std::invalid_argument when the two
/// dn/dT values coincide (the width is undefined).
double phase_matching_width(const CrystalSpec& spec,
                            WidthCriterion criterion = WidthCriterion::HalfMax,
                            bool doubly_resonant = false);

namespace detail {
/// sin(x)/x with a series fallback below |x| < 1e-4.
double sinc(double x);
/// Argument where sinc^2 falls to one half.
inline constexpr double kSincSqHalfPower = 1.3915573782515102;
} // namespace detail

} // namespace opotk
