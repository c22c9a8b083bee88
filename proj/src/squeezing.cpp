#include "opotk/squeezing.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace opotk {

void SqueezingParams::validate() const {
    if (!(kappa > 0.0 && kappa <= 1.0))
        throw std::invalid_argument("SqueezingParams.kappa must be in (0, 1]");
    if (!(theta_tilde_rad >= 0.0 && theta_tilde_rad < std::numbers::pi / 2.0))
        throw std::invalid_argument("SqueezingParams.theta_tilde_rad must be in [0, pi/2)");
    if (!(f0_hz > 0.0))
        throw std::invalid_argument("SqueezingParams.f0_hz must be > 0");
    if (!(p_threshold_w > 0.0))
        throw std::invalid_argument("SqueezingParams.p_threshold_w must be > 0");
    if (!(oc_t > 0.0) || loss_l < 0.0 || !(oc_t + loss_l <= 1.0))
        throw std::invalid_argument(
            "SqueezingParams: escape efficiency oc_t/(oc_t+loss_l) must be in (0, 1]");
}

double pump_to_x(double power_w, double p_threshold_w) {
    if (!(p_threshold_w > 0.0))
        throw std::invalid_argument("pump_to_x: p_threshold must be > 0");
    if (power_w < 0.0)
        throw std::domain_error("pump_to_x: pump power must be >= 0");
    if (power_w >= p_threshold_w) {
        std::ostringstream msg;
        msg << "pump_to_x: pump power " << power_w * 1e3 << " mW is at or above threshold "
            << p_threshold_w * 1e3 << " mW; the subthreshold model is invalid there";
        throw std::domain_error(msg.str());
    }
    return std::sqrt(power_w / p_threshold_w);
}

double variance(Quadrature quad, double x, double freq_hz, const SqueezingParams& params) {
    params.validate();
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("variance: x must be in [0, 1)");
    const double escape = params.oc_t / (params.oc_t + params.loss_l);
    const double fr = freq_hz / params.f0_hz;
    const double sign = quad == Quadrature::Squeezed ? -1.0 : 1.0;
    // Squeezed quadrature carries the (1+x)^2 denominator, anti-squeezed (1-x)^2.
    const double one_mp_x = quad == Quadrature::Squeezed ? 1.0 + x : 1.0 - x;
    return 1.0 + sign * params.kappa * escape * 4.0 * x / (one_mp_x * one_mp_x + fr * fr);
}

double variance_with_phase_noise(Quadrature quad, double x, double freq_hz,
                                 const SqueezingParams& params) {
    const double r_this = variance(quad, x, freq_hz, params);
    const Quadrature other = quad == Quadrature::Squeezed ? Quadrature::AntiSqueezed
                                                          : Quadrature::Squeezed;
    const double r_other = variance(other, x, freq_hz, params);
    const double s = std::sin(params.theta_tilde_rad);
    // cos^2 form rewritten so equal variances mix to themselves exactly.
    return r_this + (r_other - r_this) * s * s;
}

double to_db(double r) {
    if (!(r > 0.0))
        throw std::domain_error("to_db: value must be > 0");
    return 10.0 * std::log10(r);
}

double from_db(double db) {
    return std::pow(10.0, db / 10.0);
}

std::vector<PumpSweepRow> pump_sweep(const SqueezingParams& params,
                                     const std::vector<double>& powers_w,
                                     double freq_hz) {
    params.validate();
    std::ostringstream bad;
    for (const double p : powers_w)
        if (p >= params.p_threshold_w)
            bad << (bad.tellp() > 0 ? ", " : "") << p * 1e3 << " mW";
    if (bad.tellp() > 0)
        throw std::domain_error("pump_sweep: powers at or above threshold (" +
                                std::to_string(params.p_threshold_w * 1e3) +
                                " mW): " + bad.str());

    std::vector<PumpSweepRow> rows;
    rows.reserve(powers_w.size());
    for (const double p : powers_w) {
        const double x = pump_to_x(p, params.p_threshold_w);
        rows.push_back({p, x,
                        to_db(variance_with_phase_noise(Quadrature::Squeezed, x, freq_hz, params)),
                        to_db(variance_with_phase_noise(Quadrature::AntiSqueezed, x, freq_hz, params))});
    }
    return rows;
}

std::vector<SpectrumRow> spectrum(const SqueezingParams& params, double x,
                                  const std::vector<double>& freqs_hz) {
    params.validate();
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("spectrum: x must be in [0, 1)");
    std::vector<SpectrumRow> rows;
    rows.reserve(freqs_hz.size());
    for (const double f : freqs_hz)
        rows.push_back({f,
                        to_db(variance_with_phase_noise(Quadrature::Squeezed, x, f, params)),
                        to_db(variance_with_phase_noise(Quadrature::AntiSqueezed, x, f, params))});
    return rows;
}

double squeezing_bandwidth(double x, double f0_hz) {
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("squeezing_bandwidth: x must be in [0, 1)");
    if (!(f0_hz > 0.0))
        throw std::invalid_argument("squeezing_bandwidth: f0 must be > 0");
    return (1.0 + x) * f0_hz;
}

double propagation_efficiency(double visibility, double path_efficiency,
                              double detector_qe) {
    for (const double v : {visibility, path_efficiency, detector_qe})
        if (!(v > 0.0 && v <= 1.0))
            throw std::invalid_argument(
                "propagation_efficiency: all factors must be in (0, 1]");
    // Mode overlap enters the homodyne signal as the field visibility, so
    // the power efficiency carries its square.
    return visibility * visibility * path_efficiency * detector_qe;
}

double parametric_gain(double x, GainSign sign) {
    if (!(x >= 0.0 && x < 1.0))
        throw std::domain_error("parametric_gain: x must be in [0, 1)");
    const double denom = sign == GainSign::Amplify ? 1.0 - x : 1.0 + x;
    return 1.0 / (denom * denom);
}

double threshold_from_gain(double measured_gain, double pump_power_w) {
    if (!(measured_gain > 1.0))
        throw std::domain_error(
            "threshold_from_gain: amplification gain must be > 1");
    if (!(pump_power_w > 0.0))
        throw std::invalid_argument("threshold_from_gain: pump power must be > 0");
    const double x = 1.0 - 1.0 / std::sqrt(measured_gain);
    return pump_power_w / (x * x);
}

} // namespace opotk
