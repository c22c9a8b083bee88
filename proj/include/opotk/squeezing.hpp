#pragma once

#include <vector>

namespace opotk {

enum class Quadrature { Squeezed, AntiSqueezed };
enum class GainSign { Amplify, Deamplify };

/// Everything the lossy-cavity squeezing model consumes. f0 is a device
/// property: take it from cavity_hwhm() or override with a measured value.
struct SqueezingParams {
    double kappa = 0.968;        ///< overall propagation efficiency outside the OPO
    double oc_t = 0.118;         ///< output coupler transmittance
    double loss_l = 0.008;       ///< intra-cavity loss
    double f0_hz = 82e6;         ///< cavity HWHM
    double theta_tilde_rad = 0.0; ///< RMS phase-lock fluctuation
    double p_threshold_w = 0.283; ///< oscillation threshold power

    void validate() const;
};

/// Pump power and the normalized amplitude derived from it.
struct PumpState {
    double power_w = 0.0;
    double x = 0.0; ///< sqrt(P / P_th), < 1 below threshold
};

/// Normalized pump amplitude sqrt(P/P_th). Throws std::domain_error at or
/// above threshold, where the subthreshold model is invalid.
double pump_to_x(double power_w, double p_threshold_w);

/// Quadrature variance in shot-noise units:
///   R-+ = 1 -+ kappa * T/(T+L) * 4x / ((1 +- x)^2 + (f/f0)^2)
/// (squeezed uses the (1+x)^2 denominator, anti-squeezed (1-x)^2).
double variance(Quadrature quad, double x, double freq_hz, const SqueezingParams& params);

/// Phase-noise-contaminated variance, the convex mixture
/// R'+- = R+- cos^2(theta) + R-+ sin^2(theta).
double variance_with_phase_noise(Quadrature quad, double x, double freq_hz,
                                 const SqueezingParams& params);

/// 10*log10(R). Throws std::domain_error on R <= 0.
double to_db(double r);
/// Inverse of to_db.
double from_db(double db);

struct PumpSweepRow {
    double power_w = 0.0;
    double x = 0.0;
    double squeezed_db = 0.0;
    double anti_squeezed_db = 0.0;
};

/// Squeezing/anti-squeezing versus pump power at a fixed measurement
/// frequency. Throws std::domain_error listing any power at or above
/// threshold.
std::vector<PumpSweepRow> pump_sweep(const SqueezingParams& params,
                                     const std::vector<double>& powers_w,
                                     double freq_hz);

struct SpectrumRow {
    double freq_hz = 0.0;
    double squeezed_db = 0.0;
    double anti_squeezed_db = 0.0;
};

/// Squeezing/anti-squeezing spectrum at fixed pump amplitude.
std::vector<SpectrumRow> spectrum(const SqueezingParams& params, double x,
                                  const std::vector<double>& freqs_hz);

/// Frequency where the squeezed variance recovers halfway from its minimum
/// to shot noise: (1 + x) * f0.
double squeezing_bandwidth(double x, double f0_hz);

/// Overall propagation efficiency outside the OPO from homodyne visibility
/// (entering squared), path efficiency, and detector quantum efficiency.
double propagation_efficiency(double visibility, double path_efficiency,
                              double detector_qe);

/// Classical parametric gain of a seed beam, 1/(1 -+ x)^2.
double parametric_gain(double x, GainSign sign);

/// Threshold power from a measured amplification gain at a known pump
/// power: x = 1 - 1/sqrt(G), P_th = P / x^2. Throws std::domain_error on
/// gain <= 1.
double threshold_from_gain(double measured_gain, double pump_power_w);

} // namespace opotk
