// Python bindings for the OPO toolkit core. Exposes the spec structs and
// the main operations; CSV/trace I/O stays on the C++ side of the fence
// (Python callers pass file paths).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "opotk/analysis.hpp"
#include "opotk/cavity.hpp"
#include "opotk/config.hpp"
#include "opotk/coresonance.hpp"
#include "opotk/csv.hpp"
#include "opotk/dispersion.hpp"
#include "opotk/errors.hpp"
#include "opotk/locksim.hpp"
#include "opotk/phasematch.hpp"
#include "opotk/squeezing.hpp"

namespace py = pybind11;
using namespace opotk;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monolithic OPO design and analysis toolkit";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::enum_<Wave>(m, "Wave")
        .value("Fundamental", Wave::Fundamental)
        .value("SecondHarmonic", Wave::SecondHarmonic);
    py::enum_<Quadrature>(m, "Quadrature")
        .value("Squeezed", Quadrature::Squeezed)
        .value("AntiSqueezed", Quadrature::AntiSqueezed);
    py::enum_<GainSign>(m, "GainSign")
        .value("Amplify", GainSign::Amplify)
        .value("Deamplify", GainSign::Deamplify);
    py::enum_<WidthCriterion>(m, "WidthCriterion")
        .value("HalfMax", WidthCriterion::HalfMax)
        .value("PiBound", WidthCriterion::PiBound);

    py::class_<CrystalSpec>(m, "CrystalSpec")
        .def(py::init<>())
        .def_readwrite("length_m", &CrystalSpec::length_m)
        .def_readwrite("wavelength_m", &CrystalSpec::wavelength_m)
        .def_readwrite("n0_fund", &CrystalSpec::n0_fund)
        .def_readwrite("n0_sh", &CrystalSpec::n0_sh)
        .def_readwrite("dn_dt_fund", &CrystalSpec::dn_dt_fund)
        .def_readwrite("dn_dt_sh", &CrystalSpec::dn_dt_sh)
        .def_readwrite("t_ref_c", &CrystalSpec::t_ref_c)
        .def_readwrite("poling_period_m", &CrystalSpec::poling_period_m)
        .def("validate", &CrystalSpec::validate);

    py::class_<CavitySpec>(m, "CavitySpec")
        .def(py::init<>())
        .def_readwrite("output_coupler_t", &CavitySpec::output_coupler_t)
        .def_readwrite("intra_cavity_loss", &CavitySpec::intra_cavity_loss)
        .def_readwrite("hr_transmittance", &CavitySpec::hr_transmittance)
        .def("validate", &CavitySpec::validate);

    py::class_<SqueezingParams>(m, "SqueezingParams")
        .def(py::init<>())
        .def_readwrite("kappa", &SqueezingParams::kappa)
        .def_readwrite("oc_t", &SqueezingParams::oc_t)
        .def_readwrite("loss_l", &SqueezingParams::loss_l)
        .def_readwrite("f0_hz", &SqueezingParams::f0_hz)
        .def_readwrite("theta_tilde_rad", &SqueezingParams::theta_tilde_rad)
        .def_readwrite("p_threshold_w", &SqueezingParams::p_threshold_w)
        .def("validate", &SqueezingParams::validate);

    py::class_<ResonancePoint>(m, "ResonancePoint")
        .def_readonly("temperature_c", &ResonancePoint::temperature_c)
        .def_readonly("mode_index", &ResonancePoint::mode_index);

    py::class_<CoResonancePoint>(m, "CoResonancePoint")
        .def_readonly("temperature_c", &CoResonancePoint::temperature_c)
        .def_readonly("mode_index", &CoResonancePoint::mode_index)
        .def_readonly("eta", &CoResonancePoint::eta);

    py::class_<ScanRow>(m, "ScanRow")
        .def_readonly("temperature_c", &ScanRow::temperature_c)
        .def_readonly("transmission", &ScanRow::transmission)
        .def_readonly("eta", &ScanRow::eta);

    py::class_<PumpSweepRow>(m, "PumpSweepRow")
        .def_readonly("power_w", &PumpSweepRow::power_w)
        .def_readonly("x", &PumpSweepRow::x)
        .def_readonly("squeezed_db", &PumpSweepRow::squeezed_db)
        .def_readonly("anti_squeezed_db", &PumpSweepRow::anti_squeezed_db);

    py::class_<SpectrumRow>(m, "SpectrumRow")
        .def_readonly("freq_hz", &SpectrumRow::freq_hz)
        .def_readonly("squeezed_db", &SpectrumRow::squeezed_db)
        .def_readonly("anti_squeezed_db", &SpectrumRow::anti_squeezed_db);

    // dispersion / phasematch
    m.def("refractive_index", &refractive_index, py::arg("spec"), py::arg("wave"),
          py::arg("temperature_c"));
    m.def("delta_n", &delta_n, py::arg("spec"), py::arg("wave"), py::arg("temperature_c"));
    m.def("delta_k", &delta_k, py::arg("spec"), py::arg("temperature_c"));
    m.def("conversion_efficiency", &conversion_efficiency, py::arg("spec"),
          py::arg("temperature_c"));
    m.def("phase_matching_width", &phase_matching_width, py::arg("spec"),
          py::arg("criterion") = WidthCriterion::HalfMax,
          py::arg("doubly_resonant") = false);

    // cavity
    m.def("fsr_temperature", &fsr_temperature, py::arg("crystal"));
    m.def("fsr_frequency", &fsr_frequency, py::arg("crystal"));
    m.def("cavity_hwhm", &cavity_hwhm, py::arg("crystal"), py::arg("cavity"));
    m.def("temperature_linewidth", &temperature_linewidth, py::arg("crystal"),
          py::arg("cavity"));
    m.def("escape_efficiency", &escape_efficiency, py::arg("cavity"));
    m.def("transmission", &transmission, py::arg("crystal"), py::arg("cavity"),
          py::arg("temperature_c"));
    m.def("resonance_temperatures",
          py::overload_cast<const CrystalSpec&, double, double>(&resonance_temperatures),
          py::arg("crystal"), py::arg("t_lo_c"), py::arg("t_hi_c"));

    // coresonance
    m.def("co_resonant_points", &co_resonant_points, py::arg("crystal"),
          py::arg("cavity"), py::arg("t_lo_c"), py::arg("t_hi_c"));
    m.def("worst_case_best_eta", &worst_case_best_eta, py::arg("crystal"),
          py::arg("cavity"));
    m.def("scan_table", &scan_table, py::arg("crystal"), py::arg("cavity"),
          py::arg("t_lo_c"), py::arg("t_hi_c"), py::arg("step_k"));

    // squeezing
    m.def("pump_to_x", &pump_to_x, py::arg("power_w"), py::arg("p_threshold_w"));
    m.def("variance", &variance, py::arg("quad"), py::arg("x"), py::arg("freq_hz"),
          py::arg("params"));
    m.def("variance_with_phase_noise", &variance_with_phase_noise, py::arg("quad"),
          py::arg("x"), py::arg("freq_hz"), py::arg("params"));
    m.def("to_db", &to_db, py::arg("r"));
    m.def("from_db", &from_db, py::arg("db"));
    m.def("pump_sweep", &pump_sweep, py::arg("params"), py::arg("powers_w"),
          py::arg("freq_hz"));
    m.def("spectrum", &spectrum, py::arg("params"), py::arg("x"), py::arg("freqs_hz"));
    m.def("squeezing_bandwidth", &squeezing_bandwidth, py::arg("x"), py::arg("f0_hz"));
    m.def("propagation_efficiency", &propagation_efficiency, py::arg("visibility"),
          py::arg("path_efficiency"), py::arg("detector_qe"));
    m.def("parametric_gain", &parametric_gain, py::arg("x"), py::arg("sign"));
    m.def("threshold_from_gain", &threshold_from_gain, py::arg("measured_gain"),
          py::arg("pump_power_w"));

    // analysis
    py::class_<SpectrumTrace>(m, "SpectrumTrace")
        .def(py::init<>())
        .def_readwrite("rbw_hz", &SpectrumTrace::rbw_hz)
        .def_readwrite("vbw_hz", &SpectrumTrace::vbw_hz)
        .def_readwrite("label", &SpectrumTrace::label)
        .def_readwrite("center_frequency_hz", &SpectrumTrace::center_frequency_hz)
        .def("zero_span", &SpectrumTrace::zero_span)
        .def("validate", &SpectrumTrace::validate)
        .def("add_point",
             [](SpectrumTrace& t, double freq_hz, double power_dbm) {
                 t.points.push_back({freq_hz, power_dbm});
             })
        .def("points", [](const SpectrumTrace& t) {
            std::vector<std::pair<double, double>> out;
            out.reserve(t.points.size());
            for (const auto& p : t.points)
                out.emplace_back(p.freq_hz, p.power_dbm);
            return out;
        });

    py::class_<NormalizedPoint>(m, "NormalizedPoint")
        .def_readonly("freq_hz", &NormalizedPoint::freq_hz)
        .def_readonly("relative_power", &NormalizedPoint::relative_power)
        .def_readonly("dark_corrected", &NormalizedPoint::dark_corrected);

    py::class_<FreeParams>(m, "FreeParams")
        .def(py::init<>())
        .def_readwrite("theta_tilde", &FreeParams::theta_tilde)
        .def_readwrite("p_threshold", &FreeParams::p_threshold)
        .def_readwrite("loss_l", &FreeParams::loss_l)
        .def("count", &FreeParams::count);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("theta_tilde_rad", &FitResult::theta_tilde_rad)
        .def_readonly("theta_tilde_stderr_rad", &FitResult::theta_tilde_stderr_rad)
        .def_readonly("p_threshold_w", &FitResult::p_threshold_w)
        .def_readonly("loss_l", &FitResult::loss_l)
        .def_readonly("params", &FitResult::params)
        .def_readonly("residual_rms_db", &FitResult::residual_rms_db)
        .def_readonly("n_points", &FitResult::n_points)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("free", &FitResult::free);

    py::class_<QuadratureSample>(m, "QuadratureSample")
        .def(py::init([](double x, double freq_hz, Quadrature quad, double relative_power) {
                 return QuadratureSample{x, freq_hz, quad, relative_power};
             }),
             py::arg("x"), py::arg("freq_hz"), py::arg("quad"), py::arg("relative_power"))
        .def_readwrite("x", &QuadratureSample::x)
        .def_readwrite("freq_hz", &QuadratureSample::freq_hz)
        .def_readwrite("quad", &QuadratureSample::quad)
        .def_readwrite("relative_power", &QuadratureSample::relative_power);

    py::class_<PowerSample>(m, "PowerSample")
        .def(py::init([](double pump_power_w, double freq_hz, Quadrature quad,
                         double relative_power) {
                 return PowerSample{pump_power_w, freq_hz, quad, relative_power};
             }),
             py::arg("pump_power_w"), py::arg("freq_hz"), py::arg("quad"),
             py::arg("relative_power"))
        .def_readwrite("pump_power_w", &PowerSample::pump_power_w)
        .def_readwrite("freq_hz", &PowerSample::freq_hz)
        .def_readwrite("quad", &PowerSample::quad)
        .def_readwrite("relative_power", &PowerSample::relative_power);

    m.def("load_trace_file", &load_trace_file, py::arg("path"));
    m.def("save_trace_file", [](const std::string& path, const SpectrumTrace& trace) {
        std::ostringstream buf;
        save_trace(buf, trace);
        std::ofstream out(path);
        if (!out)
            throw ParseError("cannot open '" + path + "' for writing");
        out << buf.str();
    });
    m.def("normalize", &normalize, py::arg("signal"), py::arg("shot"),
          py::arg("dark") = std::nullopt, py::arg("subtract_dark") = false);
    m.def("fit_theta", &fit_theta, py::arg("data"), py::arg("fixed"));
    m.def("fit_model", &fit_model, py::arg("data"), py::arg("initial"), py::arg("free"),
          py::arg("residuals_in_db") = true);

    // locksim
    py::class_<ServoConfig>(m, "ServoConfig")
        .def(py::init<>())
        .def_readwrite("kp", &ServoConfig::kp)
        .def_readwrite("ki", &ServoConfig::ki)
        .def_readwrite("kd", &ServoConfig::kd)
        .def_readwrite("sample_dt_s", &ServoConfig::sample_dt_s)
        .def_readwrite("actuator_time_constant_s", &ServoConfig::actuator_time_constant_s)
        .def_readwrite("actuator_range", &ServoConfig::actuator_range)
        .def_readwrite("temperature_resolution_k", &ServoConfig::temperature_resolution_k)
        .def_readwrite("noise_rms", &ServoConfig::noise_rms)
        .def_readwrite("capture_threshold", &ServoConfig::capture_threshold);

    py::class_<ModulationConfig>(m, "ModulationConfig")
        .def(py::init<>())
        .def_readwrite("pdh_mod_freq_hz", &ModulationConfig::pdh_mod_freq_hz)
        .def_readwrite("pdh_mod_depth_rad", &ModulationConfig::pdh_mod_depth_rad)
        .def_readwrite("phase_mod_freq_hz", &ModulationConfig::phase_mod_freq_hz)
        .def_readwrite("phase_mod_depth_rad", &ModulationConfig::phase_mod_depth_rad)
        .def_readwrite("demod_phase_rad", &ModulationConfig::demod_phase_rad);

    py::class_<LockPlant>(m, "LockPlant")
        .def(py::init<>())
        .def_readwrite("f0_hz", &LockPlant::f0_hz)
        .def_readwrite("dfdt_hz_per_k", &LockPlant::dfdt_hz_per_k)
        .def_readwrite("t_resonance_c", &LockPlant::t_resonance_c)
        .def_static("from_specs", &LockPlant::from_specs, py::arg("crystal"),
                    py::arg("cavity"), py::arg("t_resonance_c"));

    py::class_<LockSimConfig>(m, "LockSimConfig")
        .def(py::init<>())
        .def_static("defaults", &LockSimConfig::defaults)
        .def_readwrite("plant", &LockSimConfig::plant)
        .def_readwrite("cavity_servo", &LockSimConfig::cavity_servo)
        .def_readwrite("pump_probe_servo", &LockSimConfig::pump_probe_servo)
        .def_readwrite("probe_lo_servo", &LockSimConfig::probe_lo_servo)
        .def_readwrite("modulation", &LockSimConfig::modulation)
        .def_readwrite("seed", &LockSimConfig::seed)
        .def_readwrite("initial_detuning_hz", &LockSimConfig::initial_detuning_hz)
        .def_readwrite("initial_phase_pump_probe_rad",
                       &LockSimConfig::initial_phase_pump_probe_rad)
        .def_readwrite("initial_phase_probe_lo_rad",
                       &LockSimConfig::initial_phase_probe_lo_rad)
        .def_readwrite("engage_window", &LockSimConfig::engage_window);

    py::class_<PlantState>(m, "PlantState")
        .def_readonly("time_s", &PlantState::time_s)
        .def_readonly("temperature_c", &PlantState::temperature_c)
        .def_readonly("detuning_hz", &PlantState::detuning_hz)
        .def_readonly("phase_pump_probe_rad", &PlantState::phase_pump_probe_rad)
        .def_readonly("phase_probe_lo_rad", &PlantState::phase_probe_lo_rad)
        .def_readonly("cavity_locked", &PlantState::cavity_locked)
        .def_readonly("pump_probe_locked", &PlantState::pump_probe_locked)
        .def_readonly("probe_lo_locked", &PlantState::probe_lo_locked);

    py::class_<LockSummary>(m, "LockSummary")
        .def_readonly("acquired", &LockSummary::acquired)
        .def_readonly("t_lock_cavity_s", &LockSummary::t_lock_cavity_s)
        .def_readonly("t_lock_pump_probe_s", &LockSummary::t_lock_pump_probe_s)
        .def_readonly("t_lock_probe_lo_s", &LockSummary::t_lock_probe_lo_s)
        .def_readonly("residual_rms_detuning_hz", &LockSummary::residual_rms_detuning_hz)
        .def_readonly("residual_rms_phase_pump_probe_rad",
                      &LockSummary::residual_rms_phase_pump_probe_rad)
        .def_readonly("residual_rms_phase_probe_lo_rad",
                      &LockSummary::residual_rms_phase_probe_lo_rad)
        .def_readonly("theta_tilde_rad", &LockSummary::theta_tilde_rad)
        .def_readonly("any_saturation", &LockSummary::any_saturation);

    py::class_<LockRun>(m, "LockRun")
        .def_readonly("trace", &LockRun::trace)
        .def_readonly("summary", &LockRun::summary);

    m.def("pdh_error", &pdh_error, py::arg("detuning_hz"), py::arg("f0_hz"),
          py::arg("mod"));
    m.def("phase_error", &phase_error, py::arg("relative_phase_rad"),
          py::arg("mod_depth_rad"));
    m.def("residual_phase_to_theta", &residual_phase_to_theta, py::arg("phases_rad"));
    m.def("simulate_lock", &simulate_lock, py::arg("duration_s"), py::arg("config"));

    // config
    py::class_<ToolkitConfig>(m, "ToolkitConfig")
        .def_static("defaults", &ToolkitConfig::defaults)
        .def_static("load", &ToolkitConfig::load, py::arg("path"))
        .def_readwrite("crystal", &ToolkitConfig::crystal)
        .def_readwrite("cavity", &ToolkitConfig::cavity)
        .def_readwrite("squeezing", &ToolkitConfig::squeezing)
        .def_readwrite("locksim", &ToolkitConfig::locksim)
        .def_readwrite("output_dir", &ToolkitConfig::output_dir)
        .def_readwrite("label", &ToolkitConfig::label)
        .def_readwrite("report_pump_w", &ToolkitConfig::report_pump_w)
        .def_readwrite("report_bandwidth_pump_w", &ToolkitConfig::report_bandwidth_pump_w)
        .def_readwrite("report_freq_hz", &ToolkitConfig::report_freq_hz);
}
