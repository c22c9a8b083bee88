#include "opotk/phasematch.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace opotk {

namespace detail {

double sinc(double x) {
    // Series below the crossover keeps the removable singularity at the
    // phase-matching point free of cancellation.
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

} // namespace detail

double delta_k(const CrystalSpec& spec, double temperature_c) {
    spec.validate();
    const double dn = delta_n(spec, Wave::SecondHarmonic, temperature_c) -
                      delta_n(spec, Wave::Fundamental, temperature_c);
    return dn * 4.0 * std::numbers::pi / spec.wavelength_m;
}

double conversion_efficiency(const CrystalSpec& spec, double temperature_c) {
    const double arg = delta_k(spec, temperature_c) * spec.length_m / 2.0;
    const double s = detail::sinc(arg);
    return s * s;
}

PhaseMatchPoint phase_match_point(const CrystalSpec& spec, double temperature_c) {
    PhaseMatchPoint p;
    p.temperature_c = temperature_c;
    p.delta_k_per_m = delta_k(spec, temperature_c);
    p.eta = conversion_efficiency(spec, temperature_c);
    return p;
}

double phase_matching_width(const CrystalSpec& spec, WidthCriterion criterion,
                            bool doubly_resonant) {
    spec.validate();
    const double ddndt = std::abs(spec.dn_dt_sh - spec.dn_dt_fund);
    // validate() already rejects equal dn/dT; guard stays for specs built
    // around validation.
    if (ddndt == 0.0)
        throw std::invalid_argument("phase_matching_width undefined: equal dn/dT values");

    // |delta_k * l| <= pi, the full window of the literal width formula.
    double width = spec.wavelength_m / (2.0 * spec.length_m) / ddndt;
    if (criterion == WidthCriterion::HalfMax)
        width *= 2.0 * detail::kSincSqHalfPower / std::numbers::pi;
    if (doubly_resonant)
        width /= 2.0;
    return width;
}

} // namespace opotk
