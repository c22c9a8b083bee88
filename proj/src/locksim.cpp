#include "opotk/locksim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace opotk {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string(name) + " must be finite");
}

double rms(const std::vector<double>& values, double center) {
    double acc = 0.0;
    for (const double v : values)
        acc += (v - center) * (v - center);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

} // namespace

void ServoConfig::validate() const {
    if (!(kp >= 0.0) || !(ki >= 0.0) || !(kd >= 0.0))
        throw std::invalid_argument("ServoConfig gains must be >= 0");
    if (!(sample_dt_s > 0.0))
        throw std::invalid_argument("ServoConfig.sample_dt_s must be > 0");
    if (!(actuator_time_constant_s > 0.0))
        throw std::invalid_argument("ServoConfig.actuator_time_constant_s must be > 0");
    if (sample_dt_s > actuator_time_constant_s / 10.0 * (1.0 + 1e-9))
        throw std::invalid_argument(
            "ServoConfig.sample_dt_s must be <= actuator_time_constant_s / 10 "
            "to resolve the actuator dynamics");
    if (!(actuator_range > 0.0))
        throw std::invalid_argument("ServoConfig.actuator_range must be > 0");
    if (!(temperature_resolution_k > 0.0))
        throw std::invalid_argument("ServoConfig.temperature_resolution_k must be > 0");
    if (!(noise_rms >= 0.0))
        throw std::invalid_argument("ServoConfig.noise_rms must be >= 0");
    if (!(capture_threshold > 0.0))
        throw std::invalid_argument("ServoConfig.capture_threshold must be > 0");
}

void ModulationConfig::validate() const {
    if (!(pdh_mod_freq_hz > 0.0))
        throw std::invalid_argument("ModulationConfig.pdh_mod_freq_hz must be > 0");
    // Past the first Bessel zeros the discriminant sign flips; keep depths
    // where J0 (PDH carrier) and J1 (dither) stay positive.
    if (!(pdh_mod_depth_rad > 0.0 && pdh_mod_depth_rad < 2.404))
        throw std::invalid_argument(
            "ModulationConfig.pdh_mod_depth_rad must be in (0, 2.404)");
    if (!(phase_mod_freq_hz > 0.0))
        throw std::invalid_argument("ModulationConfig.phase_mod_freq_hz must be > 0");
    if (!(phase_mod_depth_rad > 0.0 && phase_mod_depth_rad < 3.83))
        throw std::invalid_argument(
            "ModulationConfig.phase_mod_depth_rad must be in (0, 3.83)");
    require_finite(demod_phase_rad, "ModulationConfig.demod_phase_rad");
}

LockPlant LockPlant::from_specs(const CrystalSpec& crystal, const CavitySpec& cavity,
                                double t_resonance_c) {
    LockPlant plant;
    plant.f0_hz = cavity_hwhm(crystal, cavity);
    plant.dfdt_hz_per_k = fsr_frequency(crystal) / fsr_temperature(crystal);
    plant.t_resonance_c = t_resonance_c;
    return plant;
}

LockSimConfig LockSimConfig::defaults() {
    LockSimConfig c;
    const CrystalSpec crystal;
    const CavitySpec cavity;
    c.plant = LockPlant::from_specs(crystal, cavity, crystal.t_ref_c);

    c.cavity_servo.kp = 0.25;
    c.cavity_servo.ki = 0.8;
    c.cavity_servo.sample_dt_s = 1e-3;
    c.cavity_servo.actuator_time_constant_s = 1.0;
    c.cavity_servo.actuator_range = 5.0;
    c.cavity_servo.noise_rms = 0.01;

    c.pump_probe_servo.kp = 10.0;
    c.pump_probe_servo.ki = 500.0;
    c.pump_probe_servo.sample_dt_s = 1e-3;
    c.pump_probe_servo.actuator_time_constant_s = 0.01;
    c.pump_probe_servo.actuator_range = 5.0;
    c.pump_probe_servo.noise_rms = 0.02;

    c.probe_lo_servo = c.pump_probe_servo;
    // Tuned so the default run's residual probe-LO fluctuation lands near
    // the 2 degree phase-noise figure the squeezing fits infer.
    c.probe_lo_servo.noise_rms = 0.030;

    c.seed = 1;
    c.initial_detuning_hz = c.plant.f0_hz / 4.0;
    c.initial_phase_pump_probe_rad = 0.3;
    c.initial_phase_probe_lo_rad = 0.3;
    c.engage_window = 100;
    return c;
}

void LockSimConfig::validate() const {
    if (!(plant.f0_hz > 0.0))
        throw std::invalid_argument("LockPlant.f0_hz must be > 0");
    if (!(plant.dfdt_hz_per_k > 0.0))
        throw std::invalid_argument("LockPlant.dfdt_hz_per_k must be > 0");
    require_finite(plant.t_resonance_c, "LockPlant.t_resonance_c");
    cavity_servo.validate();
    pump_probe_servo.validate();
    probe_lo_servo.validate();
    modulation.validate();
    // The dither lock rides on the cavity transmission, so its frequency
    // must sit well inside the cavity bandwidth.
    if (!(modulation.phase_mod_freq_hz < plant.f0_hz / 10.0))
        throw std::invalid_argument(
            "LockSimConfig: phase_mod_freq_hz must be at least a decade below "
            "the cavity HWHM");
    if (pump_probe_servo.sample_dt_s != cavity_servo.sample_dt_s ||
        probe_lo_servo.sample_dt_s != cavity_servo.sample_dt_s)
        throw std::invalid_argument(
            "LockSimConfig: all three servo loops must share one sample_dt_s");
    require_finite(initial_detuning_hz, "LockSimConfig.initial_detuning_hz");
    require_finite(initial_phase_pump_probe_rad,
                   "LockSimConfig.initial_phase_pump_probe_rad");
    require_finite(initial_phase_probe_lo_rad,
                   "LockSimConfig.initial_phase_probe_lo_rad");
    if (engage_window < 1)
        throw std::invalid_argument("LockSimConfig.engage_window must be >= 1");
}

double pdh_error(double detuning_hz, double f0_hz, const ModulationConfig& mod) {
    if (!(f0_hz > 0.0))
        throw std::invalid_argument("pdh_error: f0 must be > 0");
    mod.validate();
    const double beta = mod.pdh_mod_depth_rad;
    const double amp = 2.0 * std::cyl_bessel_j(0.0, beta) * std::cyl_bessel_j(1.0, beta);
    const double u = detuning_hz / f0_hz;
    return amp * std::cos(mod.demod_phase_rad) * u / (1.0 + u * u);
}

double phase_error(double relative_phase_rad, double mod_depth_rad) {
    if (!(mod_depth_rad > 0.0 && mod_depth_rad < 3.83))
        throw std::invalid_argument("phase_error: mod_depth_rad must be in (0, 3.83)");
    return 2.0 * std::cyl_bessel_j(1.0, mod_depth_rad) * std::sin(relative_phase_rad);
}

double residual_phase_to_theta(const std::vector<double>& phases_rad) {
    if (phases_rad.empty())
        throw std::invalid_argument("residual_phase_to_theta: empty phase series");
    double mean = 0.0;
    for (const double p : phases_rad)
        mean += p;
    mean /= static_cast<double>(phases_rad.size());
    return rms(phases_rad, mean);
}

void LockSimulator::Loop::observe(double err) {
    if (window.empty())
        return;
    if (window_count == window.size())
        window_sum -= window[window_pos];
    else
        ++window_count;
    window[window_pos] = err;
    window_sum += err;
    window_pos = (window_pos + 1) % window.size();
}

bool LockSimulator::Loop::window_full() const {
    return !window.empty() && window_count == window.size();
}

double LockSimulator::Loop::window_mean() const {
    return window_sum / static_cast<double>(window_count);
}

LockSimulator::LockSimulator(LockSimConfig config)
    : cfg_(std::move(config)), rng_(cfg_.seed) {
    cfg_.validate();
    state_.time_s = 0.0;
    state_.temperature_c =
        cfg_.plant.t_resonance_c + cfg_.initial_detuning_hz / cfg_.plant.dfdt_hz_per_k;
    state_.detuning_hz = cfg_.initial_detuning_hz;
    state_.phase_pump_probe_rad = cfg_.initial_phase_pump_probe_rad;
    state_.phase_probe_lo_rad = cfg_.initial_phase_probe_lo_rad;
    const auto w = static_cast<std::size_t>(cfg_.engage_window);
    cavity_.window.assign(w, 0.0);
    pump_probe_.window.assign(w, 0.0);
    probe_lo_.window.assign(w, 0.0);
}

double LockSimulator::run_pid(Loop& loop, const ServoConfig& servo, double error,
                              bool& saturated) {
    const double dt = servo.sample_dt_s;
    double deriv = 0.0;
    if (loop.has_prev)
        deriv = (error - loop.prev_error) / dt;
    loop.prev_error = error;
    loop.has_prev = true;

    loop.integrator += error * dt;
    // Negative feedback: a positive error drives the actuator down.
    double u = -(servo.kp * error + servo.ki * loop.integrator + servo.kd * deriv);
    if (std::abs(u) > servo.actuator_range) {
        saturated = true;
        const double clamped = std::clamp(u, -servo.actuator_range, servo.actuator_range);
        // Back-calculate the integrator onto the rail so it cannot wind up.
        if (servo.ki > 0.0)
            loop.integrator = -(clamped + servo.kp * error + servo.kd * deriv) / servo.ki;
        u = clamped;
    }
    loop.command = u;
    return u;
}

const PlantState& LockSimulator::step() {
    const double dt = cfg_.cavity_servo.sample_dt_s;
    const ModulationConfig& mod = cfg_.modulation;

    // Later stages engage one sample after the previous stage latched.
    if (state_.cavity_locked)
        state_.pump_probe_engaged = true;
    if (state_.pump_probe_locked)
        state_.probe_lo_engaged = true;
    state_.cavity_saturated = false;
    state_.pump_probe_saturated = false;
    state_.probe_lo_saturated = false;

    // Fixed draw order keeps trajectories reproducible regardless of when
    // the stages engage.
    const double n_cavity = gauss_(rng_) * cfg_.cavity_servo.noise_rms;
    const double n_pump_probe = gauss_(rng_) * cfg_.pump_probe_servo.noise_rms;
    const double n_probe_lo = gauss_(rng_) * cfg_.probe_lo_servo.noise_rms;

    const double t_start_c =
        cfg_.plant.t_resonance_c + cfg_.initial_detuning_hz / cfg_.plant.dfdt_hz_per_k;

    // Thermal loop: PDH error -> PID -> quantized setpoint -> first-order plant.
    {
        const double err = pdh_error(state_.detuning_hz, cfg_.plant.f0_hz, mod) + n_cavity;
        const double u = run_pid(cavity_, cfg_.cavity_servo, err, state_.cavity_saturated);
        const double res = cfg_.cavity_servo.temperature_resolution_k;
        const double setpoint_c = t_start_c + std::round(u / res) * res;
        state_.temperature_c +=
            dt / cfg_.cavity_servo.actuator_time_constant_s *
            (setpoint_c - state_.temperature_c);
        state_.detuning_hz =
            (state_.temperature_c - cfg_.plant.t_resonance_c) * cfg_.plant.dfdt_hz_per_k;
        cavity_.observe(std::abs(err));
        if (!state_.cavity_locked && cavity_.window_full() &&
            cavity_.window_mean() < cfg_.cavity_servo.capture_threshold)
            state_.cavity_locked = true;
    }

    if (state_.pump_probe_engaged) {
        const double err =
            phase_error(state_.phase_pump_probe_rad, mod.phase_mod_depth_rad) + n_pump_probe;
        const double u =
            run_pid(pump_probe_, cfg_.pump_probe_servo, err, state_.pump_probe_saturated);
        const double setpoint = cfg_.initial_phase_pump_probe_rad + u;
        state_.phase_pump_probe_rad +=
            dt / cfg_.pump_probe_servo.actuator_time_constant_s *
            (setpoint - state_.phase_pump_probe_rad);
        pump_probe_.observe(std::abs(err));
        if (!state_.pump_probe_locked && pump_probe_.window_full() &&
            pump_probe_.window_mean() < cfg_.pump_probe_servo.capture_threshold)
            state_.pump_probe_locked = true;
    }

    if (state_.probe_lo_engaged) {
        const double err =
            phase_error(state_.phase_probe_lo_rad, mod.phase_mod_depth_rad) + n_probe_lo;
        const double u =
            run_pid(probe_lo_, cfg_.probe_lo_servo, err, state_.probe_lo_saturated);
        const double setpoint = cfg_.initial_phase_probe_lo_rad + u;
        state_.phase_probe_lo_rad +=
            dt / cfg_.probe_lo_servo.actuator_time_constant_s *
            (setpoint - state_.phase_probe_lo_rad);
        probe_lo_.observe(std::abs(err));
        if (!state_.probe_lo_locked && probe_lo_.window_full() &&
            probe_lo_.window_mean() < cfg_.probe_lo_servo.capture_threshold)
            state_.probe_lo_locked = true;
    }

    state_.time_s += dt;
    return state_;
}

LockRun simulate_lock(double duration_s, const LockSimConfig& config) {
    config.validate();
    const double tau_max = std::max({config.cavity_servo.actuator_time_constant_s,
                                     config.pump_probe_servo.actuator_time_constant_s,
                                     config.probe_lo_servo.actuator_time_constant_s});
    if (!(duration_s >= 10.0 * tau_max))
        throw std::invalid_argument(
            "simulate_lock: duration must cover at least ten actuator time constants");

    LockSimulator sim(config);
    const double dt = config.cavity_servo.sample_dt_s;
    const auto steps = static_cast<std::size_t>(std::llround(duration_s / dt));

    LockRun run;
    run.trace.reserve(steps + 1);
    run.trace.push_back(sim.state());
    for (std::size_t i = 0; i < steps; ++i)
        run.trace.push_back(sim.step());

    LockSummary& summary = run.summary;
    for (const PlantState& st : run.trace) {
        if (st.cavity_locked && summary.t_lock_cavity_s < 0.0)
            summary.t_lock_cavity_s = st.time_s;
        if (st.pump_probe_locked && summary.t_lock_pump_probe_s < 0.0)
            summary.t_lock_pump_probe_s = st.time_s;
        if (st.probe_lo_locked && summary.t_lock_probe_lo_s < 0.0)
            summary.t_lock_probe_lo_s = st.time_s;
        summary.any_saturation = summary.any_saturation || st.cavity_saturated ||
                                 st.pump_probe_saturated || st.probe_lo_saturated;
    }
    summary.acquired = summary.t_lock_cavity_s >= 0.0 &&
                       summary.t_lock_pump_probe_s >= 0.0 &&
                       summary.t_lock_probe_lo_s >= 0.0;
    if (summary.acquired) {
        std::vector<double> detunings, phases_pp, phases_plo;
        for (const PlantState& st : run.trace) {
            if (st.time_s < summary.t_lock_probe_lo_s)
                continue;
            detunings.push_back(st.detuning_hz);
            phases_pp.push_back(st.phase_pump_probe_rad);
            phases_plo.push_back(st.phase_probe_lo_rad);
        }
        summary.residual_rms_detuning_hz = rms(detunings, 0.0);
        summary.residual_rms_phase_pump_probe_rad = rms(phases_pp, 0.0);
        summary.residual_rms_phase_probe_lo_rad = rms(phases_plo, 0.0);
        summary.theta_tilde_rad = residual_phase_to_theta(phases_plo);
    }
    return run;
}

} // namespace opotk
