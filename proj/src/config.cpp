#include "opotk/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "opotk/errors.hpp"

namespace opotk {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

/// Cuts an end-of-line comment, honoring double quotes.
std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            in_quote = !in_quote;
        else if (line[i] == '#' && !in_quote)
            return line.substr(0, i);
    }
    return line;
}

struct ParseContext {
    std::string source;
    int line_no = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(source + ":" + std::to_string(line_no) + ": " + message);
    }
};

double number_value(const ParseContext& ctx, const std::string& key,
                    const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        ctx.fail("key '" + key + "' expects a number, got '" + value + "'");
    return out;
}

std::uint64_t integer_value(const ParseContext& ctx, const std::string& key,
                            const std::string& value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        ctx.fail("key '" + key + "' expects a non-negative integer, got '" + value + "'");
    return out;
}

std::string string_value(const ParseContext& ctx, const std::string& key,
                         const std::string& value) {
    if (!value.empty() && value.front() == '"') {
        if (value.size() < 2 || value.back() != '"')
            ctx.fail("unterminated string for key '" + key + "'");
        return value.substr(1, value.size() - 2);
    }
    return value;
}

/// Keys shared by the three servo sections.
bool apply_servo_key(ServoConfig& servo, const ParseContext& ctx,
                     const std::string& key, const std::string& value) {
    const double v = [&] {
        return number_value(ctx, key, value);
    }();
    if (key == "kp")
        servo.kp = v;
    else if (key == "ki")
        servo.ki = v;
    else if (key == "kd")
        servo.kd = v;
    else if (key == "sample_dt_s")
        servo.sample_dt_s = v;
    else if (key == "actuator_time_constant_s")
        servo.actuator_time_constant_s = v;
    else if (key == "actuator_range")
        servo.actuator_range = v;
    else if (key == "temperature_resolution_k")
        servo.temperature_resolution_k = v;
    else if (key == "noise_rms")
        servo.noise_rms = v;
    else if (key == "capture_threshold")
        servo.capture_threshold = v;
    else
        return false;
    return true;
}

} // namespace

ToolkitConfig ToolkitConfig::defaults() {
    ToolkitConfig c;
    // Struct defaults already describe device No.1; fold in its fitted
    // phase-noise figure.
    c.squeezing.theta_tilde_rad = 2.0 * std::numbers::pi / 180.0;
    c.locksim = LockSimConfig::defaults();
    return c;
}

ToolkitConfig ToolkitConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open config '" + path + "'");
    return parse(in, path);
}

ToolkitConfig ToolkitConfig::parse(std::istream& in, const std::string& source_name) {
    ToolkitConfig cfg = defaults();
    ParseContext ctx{source_name, 0};

    std::optional<double> kappa, visibility, path_efficiency, detector_qe;
    std::optional<double> initial_detuning_hz;

    std::string section;
    std::string line;
    while (std::getline(in, line)) {
        ++ctx.line_no;
        const std::string content = trim(strip_comment(line));
        if (content.empty())
            continue;
        if (content.front() == '[') {
            if (content.back() != ']' || content.size() < 3)
                ctx.fail("malformed section header '" + content + "'");
            section = trim(content.substr(1, content.size() - 2));
            if (section != "crystal" && section != "cavity" && section != "squeezing" &&
                section != "locksim" && section != "locksim.cavity_servo" &&
                section != "locksim.pump_probe_servo" &&
                section != "locksim.probe_lo_servo" && section != "locksim.modulation" &&
                section != "report")
                ctx.fail("unknown section '[" + section + "]'");
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            ctx.fail("expected 'key = value', got '" + content + "'");
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key.empty() || value.empty())
            ctx.fail("expected 'key = value', got '" + content + "'");

        const auto num = [&] { return number_value(ctx, key, value); };

        if (section.empty()) {
            if (key == "output_dir")
                cfg.output_dir = string_value(ctx, key, value);
            else if (key == "label")
                cfg.label = string_value(ctx, key, value);
            else
                ctx.fail("unknown top-level key '" + key + "'");
        } else if (section == "crystal") {
            if (key == "length_mm")
                cfg.crystal.length_m = num() * 1e-3;
            else if (key == "wavelength_nm")
                cfg.crystal.wavelength_m = num() * 1e-9;
            else if (key == "n0_fund")
                cfg.crystal.n0_fund = num();
            else if (key == "n0_sh")
                cfg.crystal.n0_sh = num();
            else if (key == "dn_dt_fund_per_k")
                cfg.crystal.dn_dt_fund = num();
            else if (key == "dn_dt_sh_per_k")
                cfg.crystal.dn_dt_sh = num();
            else if (key == "t_ref_c")
                cfg.crystal.t_ref_c = num();
            else if (key == "poling_period_um")
                cfg.crystal.poling_period_m = num() * 1e-6;
            else
                ctx.fail("unknown key '" + key + "' in section [crystal]");
        } else if (section == "cavity") {
            if (key == "output_coupler_t")
                cfg.cavity.output_coupler_t = num();
            else if (key == "intra_cavity_loss")
                cfg.cavity.intra_cavity_loss = num();
            else if (key == "hr_transmittance")
                cfg.cavity.hr_transmittance = num();
            else
                ctx.fail("unknown key '" + key + "' in section [cavity]");
        } else if (section == "squeezing") {
            if (key == "kappa")
                kappa = num();
            else if (key == "visibility")
                visibility = num();
            else if (key == "path_efficiency")
                path_efficiency = num();
            else if (key == "detector_qe")
                detector_qe = num();
            else if (key == "f0_mhz")
                cfg.squeezing.f0_hz = num() * 1e6;
            else if (key == "theta_tilde_deg")
                cfg.squeezing.theta_tilde_rad = num() * std::numbers::pi / 180.0;
            else if (key == "p_threshold_mw")
                cfg.squeezing.p_threshold_w = num() * 1e-3;
            else
                ctx.fail("unknown key '" + key + "' in section [squeezing]");
        } else if (section == "locksim") {
            if (key == "seed")
                cfg.locksim.seed = integer_value(ctx, key, value);
            else if (key == "engage_window")
                cfg.locksim.engage_window = static_cast<int>(integer_value(ctx, key, value));
            else if (key == "initial_detuning_mhz")
                initial_detuning_hz = num() * 1e6;
            else if (key == "initial_phase_pump_probe_rad")
                cfg.locksim.initial_phase_pump_probe_rad = num();
            else if (key == "initial_phase_probe_lo_rad")
                cfg.locksim.initial_phase_probe_lo_rad = num();
            else
                ctx.fail("unknown key '" + key + "' in section [locksim]");
        } else if (section == "locksim.cavity_servo") {
            if (!apply_servo_key(cfg.locksim.cavity_servo, ctx, key, value))
                ctx.fail("unknown key '" + key + "' in section [locksim.cavity_servo]");
        } else if (section == "locksim.pump_probe_servo") {
            if (!apply_servo_key(cfg.locksim.pump_probe_servo, ctx, key, value))
                ctx.fail("unknown key '" + key + "' in section [locksim.pump_probe_servo]");
        } else if (section == "locksim.probe_lo_servo") {
            if (!apply_servo_key(cfg.locksim.probe_lo_servo, ctx, key, value))
                ctx.fail("unknown key '" + key + "' in section [locksim.probe_lo_servo]");
        } else if (section == "locksim.modulation") {
            if (key == "pdh_mod_freq_mhz")
                cfg.locksim.modulation.pdh_mod_freq_hz = num() * 1e6;
            else if (key == "pdh_mod_depth_rad")
                cfg.locksim.modulation.pdh_mod_depth_rad = num();
            else if (key == "phase_mod_freq_khz")
                cfg.locksim.modulation.phase_mod_freq_hz = num() * 1e3;
            else if (key == "phase_mod_depth_rad")
                cfg.locksim.modulation.phase_mod_depth_rad = num();
            else if (key == "demod_phase_rad")
                cfg.locksim.modulation.demod_phase_rad = num();
            else
                ctx.fail("unknown key '" + key + "' in section [locksim.modulation]");
        } else if (section == "report") {
            if (key == "pump_mw")
                cfg.report_pump_w = num() * 1e-3;
            else if (key == "bandwidth_pump_mw")
                cfg.report_bandwidth_pump_w = num() * 1e-3;
            else if (key == "freq_mhz")
                cfg.report_freq_hz = num() * 1e6;
            else
                ctx.fail("unknown key '" + key + "' in section [report]");
        }
    }

    ParseContext whole{source_name, ctx.line_no};
    const bool any_triple = visibility || path_efficiency || detector_qe;
    if (kappa && any_triple)
        throw ParseError(source_name +
                         ": give either squeezing.kappa or the visibility/"
                         "path_efficiency/detector_qe triple, not both");
    if (any_triple && !(visibility && path_efficiency && detector_qe))
        throw ParseError(source_name +
                         ": visibility, path_efficiency and detector_qe must be "
                         "given together");

    try {
        if (kappa)
            cfg.squeezing.kappa = *kappa;
        else if (any_triple)
            cfg.squeezing.kappa =
                propagation_efficiency(*visibility, *path_efficiency, *detector_qe);

        // The cavity section is the single source for the mirror budget the
        // squeezing model sees.
        cfg.squeezing.oc_t = cfg.cavity.output_coupler_t;
        cfg.squeezing.loss_l = cfg.cavity.intra_cavity_loss;

        // The lock plant always follows the configured crystal and cavity.
        cfg.locksim.plant =
            LockPlant::from_specs(cfg.crystal, cfg.cavity, cfg.crystal.t_ref_c);
        cfg.locksim.initial_detuning_hz =
            initial_detuning_hz ? *initial_detuning_hz : cfg.locksim.plant.f0_hz / 4.0;

        cfg.crystal.validate();
        cfg.cavity.validate();
        cfg.squeezing.validate();
        cfg.locksim.validate();
        if (!(cfg.report_pump_w >= 0.0) || !(cfg.report_bandwidth_pump_w >= 0.0))
            throw std::invalid_argument("report pump powers must be >= 0");
        if (!(cfg.report_freq_hz >= 0.0))
            throw std::invalid_argument("report.freq_mhz must be >= 0");
    } catch (const std::invalid_argument& e) {
        throw ParseError(source_name + ": " + e.what());
    }
    return cfg;
}

OpoReportEntry ToolkitConfig::report_entry() const {
    OpoReportEntry entry;
    entry.label = label;
    entry.params = squeezing;
    entry.squeezing_pump_w = report_pump_w;
    entry.bandwidth_pump_w = report_bandwidth_pump_w;
    entry.measurement_freq_hz = report_freq_hz;
    return entry;
}

} // namespace opotk
