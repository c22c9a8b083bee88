#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "opotk/cavity.hpp"
#include "opotk/dispersion.hpp"
#include "opotk/locksim.hpp"

using namespace opotk;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

LockSimConfig quiet_defaults() {
    auto cfg = LockSimConfig::defaults();
    cfg.cavity_servo.noise_rms = 0.0;
    cfg.pump_probe_servo.noise_rms = 0.0;
    cfg.probe_lo_servo.noise_rms = 0.0;
    return cfg;
}

/// One temperature LSB expressed as detuning.
double detuning_lsb(const LockSimConfig& cfg) {
    return cfg.cavity_servo.temperature_resolution_k * cfg.plant.dfdt_hz_per_k;
}

} // namespace

TEST_SUITE("locksim") {

TEST_CASE("plant constants follow from the crystal and cavity") {
    const CrystalSpec crystal;
    const CavitySpec cavity;
    const LockPlant plant = LockPlant::from_specs(crystal, cavity, crystal.t_ref_c);
    CHECK(plant.f0_hz == doctest::Approx(81683354.6282411).epsilon(1e-12));
    CHECK(plant.dfdt_hz_per_k == doctest::Approx(6763517916.20324).epsilon(1e-12));
    CHECK(plant.t_resonance_c == crystal.t_ref_c);
}

TEST_CASE("reflection error signal") {
    ModulationConfig mod;
    mod.pdh_mod_depth_rad = 0.5;
    mod.demod_phase_rad = 0.0;
    const double f0 = 82e6;

    SUBCASE("zero on resonance, extremum at the half-width") {
        CHECK(pdh_error(0.0, f0, mod) == 0.0);
        // 2 J0(1/2) J1(1/2) / 2 at u = 1.
        CHECK(pdh_error(f0, f0, mod) ==
              doctest::Approx(0.454723265549336 / 2.0).epsilon(1e-12));
        // Small-detuning slope is the Bessel amplitude over f0.
        CHECK(pdh_error(1.0, f0, mod) * f0 ==
              doctest::Approx(0.454723265549336).epsilon(1e-9));
    }

    SUBCASE("odd in the detuning") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(-5.0 * f0, 5.0 * f0);
        for (int i = 0; i < 1000; ++i) {
            const double d = u(rng);
            CHECK(pdh_error(-d, f0, mod) == -pdh_error(d, f0, mod));
        }
    }

    SUBCASE("monotone inside the half-width") {
        double prev = pdh_error(0.0, f0, mod);
        for (int i = 1; i <= 100; ++i) {
            const double cur = pdh_error(f0 * i / 100.0, f0, mod);
            CHECK(cur > prev);
            prev = cur;
        }
    }

    SUBCASE("decays past the half-width") {
        CHECK(pdh_error(10.0 * f0, f0, mod) < pdh_error(f0, f0, mod));
        CHECK(pdh_error(100.0 * f0, f0, mod) < 0.01);
    }

    SUBCASE("demodulation phase scales the signal") {
        auto quarter = mod;
        quarter.demod_phase_rad = std::numbers::pi / 2.0;
        CHECK(std::abs(pdh_error(f0 / 3.0, f0, quarter)) < 1e-15);
        auto flipped = mod;
        flipped.demod_phase_rad = std::numbers::pi;
        for (const double d : {1e6, 2e7, 8.2e7, 3e8})
            CHECK(pdh_error(d, f0, flipped) == -pdh_error(d, f0, mod));
    }

    SUBCASE("the error is a function of detuning/f0 only") {
        for (const double scale : {0.5, 2.0, 7.3}) {
            CHECK(pdh_error(0.3 * f0 * scale, f0 * scale, mod) ==
                  doctest::Approx(pdh_error(0.3 * f0, f0, mod)).epsilon(1e-12));
        }
    }

    SUBCASE("rejects invalid inputs") {
        CHECK_THROWS_AS(pdh_error(1e6, 0.0, mod), std::invalid_argument);
        auto bad = mod;
        bad.pdh_mod_depth_rad = 0.0;
        CHECK_THROWS_AS(pdh_error(1e6, f0, bad), std::invalid_argument);
        bad.pdh_mod_depth_rad = 2.404;
        CHECK_THROWS_AS(pdh_error(1e6, f0, bad), std::invalid_argument);
    }
}

TEST_CASE("dither-lock phase discriminant") {
    const double beta = 0.5;
    CHECK(phase_error(0.0, beta) == 0.0);
    CHECK(phase_error(std::numbers::pi / 2.0, beta) ==
          doctest::Approx(0.484536915349748).epsilon(1e-12));
    CHECK(std::abs(phase_error(std::numbers::pi, beta)) < 1e-15);

    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double phi = u(rng);
        CHECK(phase_error(-phi, beta) ==
              doctest::Approx(-phase_error(phi, beta)).epsilon(1e-14));
        CHECK(phase_error(phi + 2.0 * std::numbers::pi, beta) ==
              doctest::Approx(phase_error(phi, beta)).epsilon(1e-9));
    }

    CHECK_THROWS_AS(phase_error(0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(phase_error(0.1, 3.83), std::invalid_argument);
    CHECK_THROWS_AS(phase_error(0.1, -0.5), std::invalid_argument);
}

TEST_CASE("residual phase statistics") {
    CHECK(residual_phase_to_theta({0.25, 0.25, 0.25, 0.25}) == 0.0);
    CHECK(residual_phase_to_theta({0.3, 0.3, 0.3, 0.3, 0.3}) < 1e-12);

    // A pure sine sampled over exact periods has RMS a / sqrt(2) about its
    // mean, independent of the offset.
    const int n = 1000;
    const double a = 0.04;
    std::vector<double> phases;
    phases.reserve(n);
    for (int k = 0; k < n; ++k)
        phases.push_back(0.3 + a * std::sin(2.0 * std::numbers::pi * k / n));
    CHECK(residual_phase_to_theta(phases) ==
          doctest::Approx(a / std::numbers::sqrt2).epsilon(1e-6));

    CHECK_THROWS_AS(residual_phase_to_theta({}), std::invalid_argument);
}

TEST_CASE("configuration validation") {
    auto cfg = LockSimConfig::defaults();
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("servo limits") {
        cfg.cavity_servo.kp = -0.1;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("sampling must resolve the actuator") {
        cfg.pump_probe_servo.sample_dt_s = 2e-3;
        cfg.cavity_servo.sample_dt_s = 2e-3;
        cfg.probe_lo_servo.sample_dt_s = 2e-3;
        // 2 ms against a 10 ms piezo time constant is too coarse.
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("loops share one sample clock") {
        cfg.probe_lo_servo.sample_dt_s = 5e-4;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("dither stays inside the cavity bandwidth") {
        cfg.modulation.phase_mod_freq_hz = cfg.plant.f0_hz / 5.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("modulation depths below the Bessel zeros") {
        cfg.modulation.pdh_mod_depth_rad = 2.5;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = LockSimConfig::defaults();
        cfg.modulation.phase_mod_depth_rad = 3.9;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("engage window") {
        cfg.engage_window = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("plant sanity") {
        cfg.plant.f0_hz = 0.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = LockSimConfig::defaults();
        cfg.plant.dfdt_hz_per_k = -1.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = LockSimConfig::defaults();
        cfg.initial_detuning_hz = std::nan("");
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("simulation requires a duration covering the slow actuator") {
    CHECK_THROWS_AS(simulate_lock(5.0, LockSimConfig::defaults()), std::invalid_argument);
}

TEST_CASE("noise-free cascade acquires and stays put") {
    const auto cfg = quiet_defaults();
    const LockRun run = simulate_lock(12.0, cfg);
    const auto& s = run.summary;

    REQUIRE(s.acquired);
    CHECK_FALSE(s.any_saturation);
    CHECK(s.t_lock_cavity_s >= cfg.engage_window * 1e-3);
    CHECK(s.t_lock_pump_probe_s >= s.t_lock_cavity_s + 0.1);
    CHECK(s.t_lock_probe_lo_s >= s.t_lock_pump_probe_s + 0.1);
    CHECK(s.t_lock_probe_lo_s < 2.0);

    // Once settled the detuning sits within one temperature LSB of
    // resonance and the phases are pulled to zero.
    const double lsb = detuning_lsb(cfg);
    CHECK(std::abs(run.trace.back().detuning_hz) < lsb);
    CHECK(s.residual_rms_detuning_hz < lsb);
    CHECK(std::abs(run.trace.back().phase_probe_lo_rad) < 0.02);
    CHECK(s.theta_tilde_rad < 0.05);

    // The settled detuning may limit-cycle on the setpoint quantization but
    // its per-window envelope must never grow.
    std::vector<double> wmax;
    for (std::size_t base = 2000; base + 1000 <= run.trace.size(); base += 1000) {
        double m = 0.0;
        for (std::size_t k = base; k < base + 1000; ++k)
            m = std::max(m, std::abs(run.trace[k].detuning_hz));
        wmax.push_back(m);
    }
    REQUIRE(wmax.size() >= 5);
    for (std::size_t i = 1; i < wmax.size(); ++i)
        CHECK(wmax[i] <= std::max(wmax[i - 1], 0.5 * lsb));
}

TEST_CASE("trace bookkeeping") {
    const auto cfg = quiet_defaults();
    const LockRun run = simulate_lock(12.0, cfg);
    REQUIRE(run.trace.size() == 12001);
    const auto& first = run.trace.front();
    CHECK(first.time_s == 0.0);
    CHECK(first.detuning_hz == cfg.initial_detuning_hz);
    CHECK(first.phase_pump_probe_rad == cfg.initial_phase_pump_probe_rad);
    CHECK(first.phase_probe_lo_rad == cfg.initial_phase_probe_lo_rad);
    CHECK(first.temperature_c ==
          cfg.plant.t_resonance_c + cfg.initial_detuning_hz / cfg.plant.dfdt_hz_per_k);
    CHECK_FALSE(first.cavity_locked);
    CHECK(run.trace.back().time_s == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("stage ordering holds sample by sample") {
    const LockRun run = simulate_lock(12.0, LockSimConfig::defaults());
    REQUIRE(run.summary.acquired);
    const auto& tr = run.trace;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        const auto& prev = tr[k - 1];
        const auto& cur = tr[k];

        // Engagement follows the previous stage's latch by exactly one sample.
        CHECK(cur.pump_probe_engaged == prev.cavity_locked);
        CHECK(cur.probe_lo_engaged == prev.pump_probe_locked);

        // Locks and engagements latch.
        CHECK(cur.cavity_locked >= prev.cavity_locked);
        CHECK(cur.pump_probe_locked >= prev.pump_probe_locked);
        CHECK(cur.probe_lo_locked >= prev.probe_lo_locked);
        CHECK(cur.pump_probe_engaged >= prev.pump_probe_engaged);
        CHECK(cur.probe_lo_engaged >= prev.probe_lo_engaged);

        // A stage can only be locked while engaged, and engagement implies
        // the stage before it is still locked.
        if (cur.pump_probe_locked)
            CHECK(cur.pump_probe_engaged);
        if (cur.probe_lo_locked)
            CHECK(cur.probe_lo_engaged);
        if (cur.pump_probe_engaged)
            CHECK(cur.cavity_locked);
        if (cur.probe_lo_engaged)
            CHECK(cur.pump_probe_locked);

        // Un-engaged phase loops hold their initial value.
        if (!cur.pump_probe_engaged)
            CHECK(cur.phase_pump_probe_rad == 0.3);
        if (!cur.probe_lo_engaged)
            CHECK(cur.phase_probe_lo_rad == 0.3);
    }
}

TEST_CASE("identical seeds give bit-identical runs") {
    const auto cfg = LockSimConfig::defaults();
    const LockRun a = simulate_lock(12.0, cfg);
    const LockRun b = simulate_lock(12.0, cfg);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        CHECK(a.trace[k].temperature_c == b.trace[k].temperature_c);
        CHECK(a.trace[k].detuning_hz == b.trace[k].detuning_hz);
        CHECK(a.trace[k].phase_pump_probe_rad == b.trace[k].phase_pump_probe_rad);
        CHECK(a.trace[k].phase_probe_lo_rad == b.trace[k].phase_probe_lo_rad);
    }
    CHECK(a.summary.t_lock_probe_lo_s == b.summary.t_lock_probe_lo_s);
    CHECK(a.summary.theta_tilde_rad == b.summary.theta_tilde_rad);

    auto other = cfg;
    other.seed = 2;
    const LockRun c = simulate_lock(12.0, other);
    bool any_difference = false;
    for (std::size_t k = 0; k < a.trace.size() && !any_difference; ++k)
        any_difference = a.trace[k].detuning_hz != c.trace[k].detuning_hz;
    CHECK(any_difference);
}

TEST_CASE("default run lands near the fitted phase noise") {
    const LockRun run = simulate_lock(20.0, LockSimConfig::defaults());
    REQUIRE(run.summary.acquired);
    CHECK(run.summary.theta_tilde_rad > 1.0 * kDeg);
    CHECK(run.summary.theta_tilde_rad < 3.0 * kDeg);

    // The summary figure is exactly the residual statistic of the traced
    // probe-LO phase after the final latch.
    std::vector<double> phases;
    for (const auto& st : run.trace)
        if (st.time_s >= run.summary.t_lock_probe_lo_s)
            phases.push_back(st.phase_probe_lo_rad);
    CHECK(run.summary.theta_tilde_rad == residual_phase_to_theta(phases));
    CHECK(run.summary.residual_rms_phase_probe_lo_rad >= run.summary.theta_tilde_rad);
}

TEST_CASE("overwhelming noise never acquires") {
    auto cfg = LockSimConfig::defaults();
    cfg.cavity_servo.noise_rms = 10.0;
    const LockRun run = simulate_lock(10.0, cfg);
    CHECK_FALSE(run.summary.acquired);
    CHECK(run.summary.t_lock_cavity_s == -1.0);
    CHECK(run.summary.t_lock_probe_lo_s == -1.0);
    CHECK(run.summary.theta_tilde_rad == 0.0);
}

} // TEST_SUITE
