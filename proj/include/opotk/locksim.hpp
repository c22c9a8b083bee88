#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "opotk/cavity.hpp"

namespace opotk {

/// PID gains and actuator model for one servo loop. The same struct serves
/// the thermal loop (actuator units are kelvin) and the two piezo phase
/// loops (radians); temperature_resolution_k quantizes the commanded
/// setpoint and applies to the thermal loop only.
struct ServoConfig {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double sample_dt_s = 1e-3;
    double actuator_time_constant_s = 1.0;
    double actuator_range = 5.0;             ///< |command| limit, loop units
    double temperature_resolution_k = 0.001; ///< setpoint quantization (thermal loop)
    double noise_rms = 0.0;                  ///< Gaussian noise on the error signal
    double capture_threshold = 0.05;         ///< lock declared below this mean |error|

    void validate() const;
};

struct ModulationConfig {
    double pdh_mod_freq_hz = 36.7e6;
    double pdh_mod_depth_rad = 0.5;
    double phase_mod_freq_hz = 130e3;
    double phase_mod_depth_rad = 0.5;
    double demod_phase_rad = 0.0;

    void validate() const;
};

/// The three controlled degrees of freedom plus per-loop status flags.
/// Detuning is slaved to temperature through the cavity model:
/// detuning = (T - T_res) * df/dT.
struct PlantState {
    double time_s = 0.0;
    double temperature_c = 40.0;
    double detuning_hz = 0.0;
    double phase_pump_probe_rad = 0.0;
    double phase_probe_lo_rad = 0.0;
    bool cavity_saturated = false;
    bool pump_probe_saturated = false;
    bool probe_lo_saturated = false;
    bool cavity_locked = false;
    bool pump_probe_engaged = false;
    bool pump_probe_locked = false;
    bool probe_lo_engaged = false;
    bool probe_lo_locked = false;
};

/// Static plant parameters derived from the crystal and cavity.
struct LockPlant {
    double f0_hz = 81.7e6;              ///< cavity HWHM
    double dfdt_hz_per_k = 6.7635e9;    ///< detuning slope, fsr_frequency / fsr_temperature
    double t_resonance_c = 40.0;        ///< temperature of the lock-target resonance

    static LockPlant from_specs(const CrystalSpec& crystal, const CavitySpec& cavity,
                                double t_resonance_c);
};

struct LockSimConfig {
    LockPlant plant;
    ServoConfig cavity_servo;
    ServoConfig pump_probe_servo;
    ServoConfig probe_lo_servo;
    ModulationConfig modulation;
    std::uint64_t seed = 1;
    double initial_detuning_hz = 0.0;
    double initial_phase_pump_probe_rad = 0.0;
    double initial_phase_probe_lo_rad = 0.0;
    int engage_window = 100; ///< samples averaged for the capture decision

    /// Reference-device defaults with gains frozen from offline
    /// step-response tuning; starts detuned by f0/4 with modest phase
    /// offsets.
    static LockSimConfig defaults();

    void validate() const;
};

/// Pound-Drever-Hall reflection error signal, normalized: odd in the
/// detuning, zero on resonance, slope ~ 1/f0 near zero. The demodulation
/// phase enters as a cos() scale, so a pi shift flips the sign.
double pdh_error(double detuning_hz, double f0_hz, const ModulationConfig& mod);

/// Dither-lock discriminant for a relative phase: odd, 2*pi-periodic,
/// proportional to sin(phase) with the first-order Bessel weight of the
/// modulation depth.
double phase_error(double relative_phase_rad, double mod_depth_rad);

/// RMS deviation of a phase series from its mean; the residual
/// phase-noise magnitude the squeezing model consumes as theta-tilde.
/// Throws std::invalid_argument on an empty series.
double residual_phase_to_theta(const std::vector<double>& phases_rad);

struct LockSummary {
    bool acquired = false;
    double t_lock_cavity_s = -1.0;
    double t_lock_pump_probe_s = -1.0;
    double t_lock_probe_lo_s = -1.0;
    double residual_rms_detuning_hz = 0.0;
    double residual_rms_phase_pump_probe_rad = 0.0;
    double residual_rms_phase_probe_lo_rad = 0.0;
    double theta_tilde_rad = 0.0;
    bool any_saturation = false;
};

struct LockRun {
    std::vector<PlantState> trace;
    LockSummary summary;
};

/// Discrete-time integrator for the three-stage locking cascade
/// (cavity -> pump-probe -> probe-LO). Deterministic for a given config.
class LockSimulator {
public:
    explicit LockSimulator(LockSimConfig config);

    const PlantState& state() const { return state_; }

    /// Advances one sample: errors, PID updates, first-order actuator
    /// response with the thermal setpoint quantized, seeded noise on each
    /// error signal. Saturation is clamped and flagged in the state.
    const PlantState& step();

private:
    struct Loop {
        double integrator = 0.0;
        double prev_error = 0.0;
        bool has_prev = false;
        double command = 0.0;
        std::vector<double> window;
        std::size_t window_pos = 0;
        std::size_t window_count = 0;
        double window_sum = 0.0;

        void observe(double err);
        bool window_full() const;
        double window_mean() const;
    };

    double run_pid(Loop& loop, const ServoConfig& servo, double error, bool& saturated);

    LockSimConfig cfg_;
    PlantState state_;
    Loop cavity_, pump_probe_, probe_lo_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Runs the cascade for `duration_s` and summarizes the post-acquisition
/// residuals. Duration must cover at least ten actuator time constants.
/// Failure to lock is reported in the summary, not thrown.
LockRun simulate_lock(double duration_s, const LockSimConfig& config);

} // namespace opotk
