#include "opotk/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace opotk {

void CavitySpec::validate() const {
    if (!(output_coupler_t > 0.0 && output_coupler_t < 1.0))
        throw std::invalid_argument("CavitySpec.output_coupler_t must be in (0, 1)");
    if (!(intra_cavity_loss >= 0.0 && intra_cavity_loss < 1.0))
        throw std::invalid_argument("CavitySpec.intra_cavity_loss must be in [0, 1)");
    if (!(output_coupler_t + intra_cavity_loss < 1.0))
        throw std::invalid_argument("CavitySpec: output_coupler_t + intra_cavity_loss must be < 1");
    if (hr_transmittance < 0.0 || hr_transmittance >= 1.0)
        throw std::invalid_argument("CavitySpec.hr_transmittance must be in [0, 1)");
}

double fsr_temperature(const CrystalSpec& crystal) {
    crystal.validate();
    if (crystal.dn_dt_fund == 0.0)
        throw std::invalid_argument("fsr_temperature undefined: dn_dt_fund is zero");
    return crystal.wavelength_m /
           (2.0 * crystal.length_m * std::abs(crystal.dn_dt_fund));
}

namespace {

// Fractional longitudinal mode number 2*l*n(T)/lambda.
double mode_number(const CrystalSpec& c, double temperature_c) {
    const double n = c.n0_fund + c.dn_dt_fund * (temperature_c - c.t_ref_c);
    return 2.0 * c.length_m * n / c.wavelength_m;
}

} // namespace

std::vector<ResonancePoint> resonance_temperatures(const CrystalSpec& crystal,
                                                   double t_lo_c, double t_hi_c) {
    crystal.validate();
    if (crystal.dn_dt_fund == 0.0)
        throw std::invalid_argument("resonance_temperatures: dn_dt_fund is zero");
    if (t_lo_c > t_hi_c)
        throw std::invalid_argument("resonance_temperatures: t_lo must be <= t_hi");

    const double g_lo = mode_number(crystal, t_lo_c);
    const double g_hi = mode_number(crystal, t_hi_c);
    const double g_min = std::min(g_lo, g_hi);
    const double g_max = std::max(g_lo, g_hi);
    // Loosen the bracket by a relative epsilon so endpoint resonances are
    // kept rather than lost to rounding.
    const double eps = 1e-9 * std::max(1.0, std::abs(g_max));
    const auto m_first = static_cast<std::int64_t>(std::ceil(g_min - eps));
    const auto m_last = static_cast<std::int64_t>(std::floor(g_max + eps));

    std::vector<ResonancePoint> points;
    for (std::int64_t m = m_first; m <= m_last; ++m) {
        const double n_required =
            static_cast<double>(m) * crystal.wavelength_m / (2.0 * crystal.length_m);
        const double t = crystal.t_ref_c + (n_required - crystal.n0_fund) / crystal.dn_dt_fund;
        points.push_back({t, m});
    }
    std::sort(points.begin(), points.end(),
              [](const ResonancePoint& a, const ResonancePoint& b) {
                  return a.temperature_c < b.temperature_c;
              });
    return points;
}

std::vector<ResonancePoint> resonance_temperatures(const IndexModel& model,
                                                   double length_m,
                                                   double wavelength_m,
                                                   double t_lo_c, double t_hi_c) {
    if (!(length_m > 0.0) || !(wavelength_m > 0.0))
        throw std::invalid_argument("resonance_temperatures: length and wavelength must be > 0");
    if (t_lo_c > t_hi_c)
        throw std::invalid_argument("resonance_temperatures: t_lo must be <= t_hi");

    const auto mode_of = [&](double t) {
        return 2.0 * length_m * model.index(Wave::Fundamental, t) / wavelength_m;
    };

    // Pick a scan step fine enough that the mode number moves by well under
    // one between samples, so no integer crossing is skipped.
    const int probes = 64;
    double max_slope = 0.0;
    const double span = std::max(t_hi_c - t_lo_c, 1e-9);
    const double h = span / probes;
    for (int i = 0; i < probes; ++i) {
        const double t = t_lo_c + (i + 0.5) * h;
        const double slope = std::abs(mode_of(t + h / 2) - mode_of(t - h / 2)) / h;
        max_slope = std::max(max_slope, slope);
    }
    if (max_slope == 0.0)
        return {};
    const double step = std::min(span, 0.25 / max_slope);
    const int n_steps = std::max(1, static_cast<int>(std::ceil(span / step)));

    constexpr double tol_k = 1e-6;
    std::vector<ResonancePoint> points;
    double t_prev = t_lo_c;
    double g_prev = mode_of(t_prev);
    for (int i = 1; i <= n_steps; ++i) {
        const double t_next = (i == n_steps) ? t_hi_c : t_lo_c + i * span / n_steps;
        const double g_next = mode_of(t_next);
        const auto lo = static_cast<std::int64_t>(
            std::ceil(std::min(g_prev, g_next)));
        const auto hi = static_cast<std::int64_t>(
            std::floor(std::max(g_prev, g_next)));
        for (std::int64_t m = lo; m <= hi; ++m) {
            // Bisect 2*l*n(T)/lambda - m on [t_prev, t_next].
            double a = t_prev, b = t_next;
            double fa = g_prev - static_cast<double>(m);
            while (b - a > tol_k) {
                const double mid = 0.5 * (a + b);
                const double fm = mode_of(mid) - static_cast<double>(m);
                if ((fa <= 0.0) == (fm <= 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            points.push_back({0.5 * (a + b), m});
        }
        t_prev = t_next;
        g_prev = g_next;
    }
    std::sort(points.begin(), points.end(),
              [](const ResonancePoint& a, const ResonancePoint& b) {
                  return a.temperature_c < b.temperature_c;
              });
    // A crossing sitting exactly on a scan-segment boundary can be found twice.
    points.erase(std::unique(points.begin(), points.end(),
                             [](const ResonancePoint& a, const ResonancePoint& b) {
                                 return a.mode_index == b.mode_index;
                             }),
                 points.end());
    return points;
}

double fsr_frequency(const CrystalSpec& crystal) {
    crystal.validate();
    return kSpeedOfLight / (2.0 * crystal.n0_fund * crystal.length_m);
}

double cavity_hwhm(const CrystalSpec& crystal, const CavitySpec& cavity) {
    cavity.validate();
    return fsr_frequency(crystal) *
           (cavity.output_coupler_t + cavity.intra_cavity_loss) /
           (4.0 * std::numbers::pi);
}

double temperature_linewidth(const CrystalSpec& crystal, const CavitySpec& cavity) {
    cavity.validate();
    return fsr_temperature(crystal) *
           (cavity.output_coupler_t + cavity.intra_cavity_loss) /
           (2.0 * std::numbers::pi);
}

double escape_efficiency(const CavitySpec& cavity) {
    if (!(cavity.output_coupler_t > 0.0))
        throw std::invalid_argument("escape_efficiency requires output_coupler_t > 0");
    cavity.validate();
    return cavity.output_coupler_t /
           (cavity.output_coupler_t + cavity.intra_cavity_loss);
}

double transmission(const CrystalSpec& crystal, const CavitySpec& cavity,
                    double temperature_c) {
    cavity.validate();
    crystal.validate();
    const double g = mode_number(crystal, temperature_c);
    // sin^2 of half the round-trip phase, evaluated on the wrapped mode
    // number so the ~1e5 rad total phase costs no precision.
    const double frac = g - std::round(g);
    const double s = std::sin(std::numbers::pi * frac);
    const double coeff = 4.0 / (cavity.output_coupler_t + cavity.intra_cavity_loss);
    return 1.0 / (1.0 + coeff * coeff * s * s);
}

std::vector<double> transmission_profile(const CrystalSpec& crystal,
                                         const CavitySpec& cavity,
                                         const std::vector<double>& temperatures_c) {
    std::vector<double> out;
    out.reserve(temperatures_c.size());
    for (const double t : temperatures_c)
        out.push_back(transmission(crystal, cavity, t));
    return out;
}

} // namespace opotk
