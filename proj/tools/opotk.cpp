// Command-line front end for the OPO toolkit: temperature scans, squeezing
// spectra and pump sweeps, trace fitting, lock-cascade simulation, and the
// multi-device comparison report.
//
// Exit codes: 0 success, 2 usage/config error, 3 domain error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "opotk/analysis.hpp"
#include "opotk/cavity.hpp"
#include "opotk/config.hpp"
#include "opotk/coresonance.hpp"
#include "opotk/csv.hpp"
#include "opotk/errors.hpp"
#include "opotk/locksim.hpp"
#include "opotk/phasematch.hpp"
#include "opotk/squeezing.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;

[[noreturn]] void usage_error(const std::string& message) {
    throw CLI::ValidationError(message);
}

opotk::ToolkitConfig load_single_config(const std::vector<std::string>& paths) {
    if (paths.size() > 1)
        usage_error("this command accepts at most one --config");
    return paths.empty() ? opotk::ToolkitConfig::defaults()
                         : opotk::ToolkitConfig::load(paths.front());
}

std::filesystem::path resolve_output_dir(const opotk::ToolkitConfig& cfg,
                                         const std::string& flag_dir) {
    std::filesystem::path dir = cfg.output_dir;
    if (const char* env = std::getenv("OPOTK_OUTPUT_DIR"); env && *env)
        dir = env;
    if (!flag_dir.empty())
        dir = flag_dir;
    if (!dir.empty())
        std::filesystem::create_directories(dir);
    return dir;
}

void write_csv(const std::filesystem::path& path, const opotk::Table& table) {
    opotk::write_table_file(path.string(), table);
    std::cout << "wrote " << path.string() << " (" << table.rows.size() << " rows)\n";
}

int run_scan(const opotk::ToolkitConfig& cfg, const std::string& out_dir,
             double t_min_c, double t_max_c, double step_k, const std::string& out_name) {
    if (!(step_k > 0.0))
        usage_error("--step must be > 0");
    if (!(t_max_c > t_min_c))
        usage_error("--t-max must be greater than --t-min");
    const auto rows = opotk::scan_table(cfg.crystal, cfg.cavity, t_min_c, t_max_c, step_k);
    opotk::Table table;
    table.metadata["label"] = cfg.label;
    table.columns = {"temperature_C", "transmission", "eta"};
    for (const auto& r : rows)
        table.rows.push_back({r.temperature_c, r.transmission, r.eta});
    write_csv(std::filesystem::path(out_dir) / out_name, table);
    return 0;
}

int run_spectrum(const opotk::ToolkitConfig& cfg, const std::string& out_dir,
                 double pump_mw, double f_max_mhz, int points,
                 const std::string& out_name) {
    if (points < 2)
        usage_error("--points must be >= 2");
    if (!(f_max_mhz > 0.0))
        usage_error("--f-max-mhz must be > 0");
    const double x = opotk::pump_to_x(pump_mw * 1e-3, cfg.squeezing.p_threshold_w);
    std::vector<double> freqs_hz;
    freqs_hz.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        freqs_hz.push_back(f_max_mhz * 1e6 * i / (points - 1));
    const auto rows = opotk::spectrum(cfg.squeezing, x, freqs_hz);
    opotk::Table table;
    table.metadata["label"] = cfg.label;
    table.metadata["pump_mW"] = std::to_string(pump_mw);
    table.columns = {"freq_MHz", "sq_dB", "antisq_dB"};
    for (const auto& r : rows)
        table.rows.push_back({r.freq_hz * 1e-6, r.squeezed_db, r.anti_squeezed_db});
    write_csv(std::filesystem::path(out_dir) / out_name, table);
    return 0;
}

int run_sweep(const opotk::ToolkitConfig& cfg, const std::string& out_dir,
              const std::vector<double>& powers_mw, double freq_mhz,
              const std::string& out_name) {
    if (powers_mw.empty())
        usage_error("--powers-mw needs at least one value");
    std::vector<double> powers_w;
    powers_w.reserve(powers_mw.size());
    for (const double p : powers_mw)
        powers_w.push_back(p * 1e-3);
    const auto rows = opotk::pump_sweep(cfg.squeezing, powers_w, freq_mhz * 1e6);
    opotk::Table table;
    table.metadata["label"] = cfg.label;
    table.metadata["freq_MHz"] = std::to_string(freq_mhz);
    table.columns = {"power_mW", "x", "sq_dB", "antisq_dB"};
    for (const auto& r : rows)
        table.rows.push_back({r.power_w * 1e3, r.x, r.squeezed_db, r.anti_squeezed_db});
    write_csv(std::filesystem::path(out_dir) / out_name, table);
    return 0;
}

std::vector<opotk::PowerSample> load_fit_data(const std::string& path) {
    const opotk::Table table = opotk::read_table_file(path);
    const std::vector<std::string> expected = {"pump_mW", "freq_MHz", "quadrature",
                                               "relative_dB"};
    if (table.columns != expected)
        throw opotk::ParseError(path +
                                ": expected header 'pump_mW,freq_MHz,quadrature,relative_dB'");
    std::vector<opotk::PowerSample> data;
    data.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        opotk::PowerSample s;
        s.pump_power_w = row[0] * 1e-3;
        s.freq_hz = row[1] * 1e6;
        if (row[2] == 0.0)
            s.quad = opotk::Quadrature::Squeezed;
        else if (row[2] == 1.0)
            s.quad = opotk::Quadrature::AntiSqueezed;
        else
            throw opotk::ParseError(
                path + ": quadrature must be 0 (squeezed) or 1 (anti-squeezed)");
        s.relative_power = opotk::from_db(row[3]);
        data.push_back(s);
    }
    return data;
}

int run_fit(const opotk::ToolkitConfig& cfg, const std::string& data_path,
            const std::vector<std::string>& free_names, bool linear_residuals) {
    opotk::FreeParams free{false, false, false};
    for (const auto& name : free_names) {
        if (name == "theta")
            free.theta_tilde = true;
        else if (name == "p_threshold")
            free.p_threshold = true;
        else if (name == "loss")
            free.loss_l = true;
        else
            usage_error("--free accepts: theta, p_threshold, loss");
    }
    if (free.count() == 0)
        usage_error("--free must name at least one parameter");

    const auto data = load_fit_data(data_path);
    const auto fit = opotk::fit_model(data, cfg.squeezing, free, !linear_residuals);

    nlohmann::json out;
    out["theta_tilde_rad"] = fit.theta_tilde_rad;
    out["theta_tilde_deg"] = fit.theta_tilde_rad * kDegPerRad;
    if (free.theta_tilde) {
        out["theta_tilde_stderr_rad"] = fit.theta_tilde_stderr_rad;
        out["theta_tilde_stderr_deg"] = fit.theta_tilde_stderr_rad * kDegPerRad;
    }
    out["p_threshold_mW"] = fit.p_threshold_w * 1e3;
    out["loss_l"] = fit.loss_l;
    out["residual_rms_dB"] = fit.residual_rms_db;
    out["n_points"] = fit.n_points;
    out["converged"] = fit.converged;
    out["free"] = nlohmann::json::array();
    if (free.theta_tilde)
        out["free"].push_back("theta");
    if (free.p_threshold)
        out["free"].push_back("p_threshold");
    if (free.loss_l)
        out["free"].push_back("loss");
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_locksim(opotk::ToolkitConfig cfg, const std::string& out_dir, double duration_s,
                std::uint64_t seed, bool seed_given, const std::string& out_csv,
                const std::string& out_json) {
    if (seed_given)
        cfg.locksim.seed = seed;
    const auto run = opotk::simulate_lock(duration_s, cfg.locksim);

    opotk::Table table;
    table.metadata["label"] = cfg.label;
    table.metadata["seed"] = std::to_string(cfg.locksim.seed);
    table.columns = {"time_s", "temperature_C", "detuning_Hz", "phase_pp_rad",
                     "phase_plo_rad"};
    for (const auto& st : run.trace)
        table.rows.push_back({st.time_s, st.temperature_c, st.detuning_hz,
                              st.phase_pump_probe_rad, st.phase_probe_lo_rad});
    write_csv(std::filesystem::path(out_dir) / out_csv, table);

    const auto& s = run.summary;
    nlohmann::json summary;
    summary["acquired"] = s.acquired;
    summary["t_lock_cavity_s"] = s.t_lock_cavity_s;
    summary["t_lock_pump_probe_s"] = s.t_lock_pump_probe_s;
    summary["t_lock_probe_lo_s"] = s.t_lock_probe_lo_s;
    summary["residual_rms_detuning_Hz"] = s.residual_rms_detuning_hz;
    summary["residual_rms_phase_pump_probe_rad"] = s.residual_rms_phase_pump_probe_rad;
    summary["residual_rms_phase_probe_lo_rad"] = s.residual_rms_phase_probe_lo_rad;
    summary["theta_tilde_rad"] = s.theta_tilde_rad;
    summary["theta_tilde_deg"] = s.theta_tilde_rad * kDegPerRad;
    summary["any_saturation"] = s.any_saturation;
    summary["seed"] = cfg.locksim.seed;
    summary["duration_s"] = duration_s;

    const auto json_path = std::filesystem::path(out_dir) / out_json;
    std::ofstream json_file(json_path);
    if (!json_file)
        throw opotk::ParseError("cannot open '" + json_path.string() + "' for writing");
    json_file << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_report(const std::vector<std::string>& config_paths, bool as_json) {
    std::vector<opotk::ToolkitConfig> configs;
    if (config_paths.empty())
        configs.push_back(opotk::ToolkitConfig::defaults());
    for (const auto& path : config_paths)
        configs.push_back(opotk::ToolkitConfig::load(path));

    std::vector<opotk::OpoReportEntry> entries;
    entries.reserve(configs.size());
    for (const auto& cfg : configs)
        entries.push_back(cfg.report_entry());
    const auto rows = opotk::report_table(entries);

    if (as_json) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j;
            j["label"] = r.label;
            j["output_coupler_t"] = r.oc_t;
            j["p_threshold_mW"] = r.p_threshold_w * 1e3;
            j["escape_efficiency"] = r.escape_efficiency;
            j["squeezed_dB"] = r.squeezed_db;
            j["anti_squeezed_dB"] = r.anti_squeezed_db;
            j["squeezing_pump_mW"] = r.squeezing_pump_w * 1e3;
            j["bandwidth_MHz"] = r.bandwidth_hz * 1e-6;
            j["bandwidth_pump_mW"] = r.bandwidth_pump_w * 1e3;
            out.push_back(j);
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::printf("%-8s %8s %10s %8s %8s %10s %9s %8s %11s\n", "label", "T_oc",
                "P_th_mW", "escape", "sq_dB", "antisq_dB", "pump_mW", "bw_MHz",
                "bw_pump_mW");
    for (const auto& r : rows)
        std::printf("%-8s %8.4f %10.1f %8.4f %8.2f %10.2f %9.1f %8.1f %11.1f\n",
                    r.label.c_str(), r.oc_t, r.p_threshold_w * 1e3, r.escape_efficiency,
                    r.squeezed_db, r.anti_squeezed_db, r.squeezing_pump_w * 1e3,
                    r.bandwidth_hz * 1e-6, r.bandwidth_pump_w * 1e3);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monolithic OPO design and analysis toolkit"};
    app.require_subcommand(1);

    std::vector<std::string> config_paths;
    app.add_option("--config", config_paths,
                   "config file (repeatable for the report command)");
    std::string output_dir_flag;
    app.add_option("--output-dir", output_dir_flag,
                   "output directory (overrides config and OPOTK_OUTPUT_DIR)");

    auto* scan = app.add_subcommand(
        "scan", "temperature scan of cavity transmission and conversion efficiency");
    double t_min_c = 38.0, t_max_c = 42.0, step_k = 0.001;
    std::string scan_out = "scan.csv";
    scan->add_option("--t-min", t_min_c, "scan start, degC")->capture_default_str();
    scan->add_option("--t-max", t_max_c, "scan end, degC")->capture_default_str();
    scan->add_option("--step", step_k, "scan step, K")->capture_default_str();
    scan->add_option("--out", scan_out, "output CSV name")->capture_default_str();

    auto* spectrum = app.add_subcommand(
        "spectrum", "squeezing and anti-squeezing spectrum at fixed pump");
    double pump_mw = 130.0, f_max_mhz = 200.0;
    int points = 201;
    std::string spectrum_out = "spectrum.csv";
    spectrum->add_option("--pump-mw", pump_mw, "pump power, mW")->capture_default_str();
    spectrum->add_option("--f-max-mhz", f_max_mhz, "maximum frequency, MHz")->capture_default_str();
    spectrum->add_option("--points", points, "number of frequency points")->capture_default_str();
    spectrum->add_option("--out", spectrum_out, "output CSV name")->capture_default_str();

    auto* sweep = app.add_subcommand(
        "sweep", "squeezing and anti-squeezing versus pump power");
    std::vector<double> powers_mw;
    double sweep_freq_mhz = 2.0;
    std::string sweep_out = "pump_sweep.csv";
    sweep->add_option("--powers-mw", powers_mw, "pump powers, mW")
        ->required()
        ->delimiter(',');
    sweep->add_option("--freq-mhz", sweep_freq_mhz, "measurement frequency, MHz")->capture_default_str();
    sweep->add_option("--out", sweep_out, "output CSV name")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "fit the squeezing model to measured points");
    std::string fit_data;
    std::vector<std::string> free_names = {"theta"};
    bool linear_residuals = false;
    fit->add_option("--data", fit_data, "CSV: pump_mW,freq_MHz,quadrature,relative_dB")
        ->required();
    fit->add_option("--free", free_names, "free parameters: theta, p_threshold, loss")
        ->delimiter(',');
    fit->add_flag("--linear-residuals", linear_residuals,
                  "fit in linear power instead of dB");

    auto* locksim = app.add_subcommand("locksim", "simulate the three-stage lock cascade");
    double duration_s = 20.0;
    std::uint64_t seed = 0;
    std::string lock_csv = "locksim.csv", lock_json = "locksim_summary.json";
    locksim->add_option("--duration-s", duration_s, "simulated duration, s")->capture_default_str();
    auto* seed_opt = locksim->add_option("--seed", seed, "RNG seed (overrides config)");
    locksim->add_option("--out-csv", lock_csv, "time-series CSV name")->capture_default_str();
    locksim->add_option("--out-json", lock_json, "summary JSON name")->capture_default_str();

    auto* report = app.add_subcommand(
        "report", "per-device model predictions (one row per --config)");
    bool report_json = false;
    report->add_flag("--json", report_json, "emit JSON instead of a text table");

    // Let app-level flags (--config, --output-dir) appear after the
    // subcommand name too.
    for (CLI::App* sub : app.get_subcommands({}))
        sub->fallthrough();

    try {
        app.parse(argc, argv);

        if (*report)
            return run_report(config_paths, report_json);

        const opotk::ToolkitConfig cfg = load_single_config(config_paths);
        const std::string out_dir = resolve_output_dir(cfg, output_dir_flag).string();
        if (*scan)
            return run_scan(cfg, out_dir, t_min_c, t_max_c, step_k, scan_out);
        if (*spectrum)
            return run_spectrum(cfg, out_dir, pump_mw, f_max_mhz, points, spectrum_out);
        if (*sweep)
            return run_sweep(cfg, out_dir, powers_mw, sweep_freq_mhz, sweep_out);
        if (*fit)
            return run_fit(cfg, fit_data, free_names, linear_residuals);
        if (*locksim)
            return run_locksim(cfg, out_dir, duration_s, seed, seed_opt->count() > 0,
                               lock_csv, lock_json);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const opotk::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
