#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "opotk/squeezing.hpp"

namespace opotk {

/// A spectrum-analyzer trace: frequency-indexed power record plus the
/// resolution/video-bandwidth metadata needed to interpret it. For
/// zero-span (time-domain) traces all frequencies are equal and
/// center_frequency_hz records the analyzer setting.
struct SpectrumTrace {
    struct Point {
        double freq_hz = 0.0;
        double power_dbm = 0.0;
    };
    std::vector<Point> points;
    double rbw_hz = 0.0;
    double vbw_hz = 0.0;
    std::string label;
    std::optional<double> center_frequency_hz;

    void validate() const;
    bool zero_span() const;
};

struct NormalizedPoint {
    double freq_hz = 0.0;
    double relative_power = 1.0; ///< linear, shot-noise units
    bool dark_corrected = false;
};

/// Reads the trace CSV format: header lines `# rbw_hz=...`, `# vbw_hz=...`,
/// `# label=...` (and optional `# center_frequency_hz=...`), a
/// `frequency_hz,power_dbm` column row, then data rows. Throws ParseError
/// with a line number, or std::invalid_argument naming the violated field.
SpectrumTrace load_trace(std::istream& in, const std::string& source_name = "<stream>");
SpectrumTrace load_trace_file(const std::string& path);

void save_trace(std::ostream& out, const SpectrumTrace& trace);

/// Normalizes a signal trace to the shot-noise trace, optionally
/// subtracting detector dark noise first; all arithmetic in linear power.
/// Shot and dark traces are interpolated onto the signal grid; grids that
/// do not overlap are an error, as is shot noise at or below dark noise.
std::vector<NormalizedPoint> normalize(const SpectrumTrace& signal,
                                       const SpectrumTrace& shot,
                                       const std::optional<SpectrumTrace>& dark,
                                       bool subtract_dark);

/// One measured variance point for fitting, with the pump given as the
/// normalized amplitude x (threshold held fixed).
struct QuadratureSample {
    double x = 0.0;
    double freq_hz = 0.0;
    Quadrature quad = Quadrature::Squeezed;
    double relative_power = 1.0; ///< measured R, linear shot-noise units
};

/// As QuadratureSample but with the absolute pump power, so the threshold
/// itself can be a fit parameter.
struct PowerSample {
    double pump_power_w = 0.0;
    double freq_hz = 0.0;
    Quadrature quad = Quadrature::Squeezed;
    double relative_power = 1.0;
};

struct FreeParams {
    bool theta_tilde = true;
    bool p_threshold = false;
    bool loss_l = false;

    int count() const { return int(theta_tilde) + int(p_threshold) + int(loss_l); }
};

struct FitResult {
    double theta_tilde_rad = 0.0;
    double theta_tilde_stderr_rad = 0.0;
    double p_threshold_w = 0.0; ///< fitted value, or copy of the fixed one
    double loss_l = 0.0;        ///< fitted value, or copy of the fixed one
    SqueezingParams params;     ///< snapshot with the fitted values folded in
    double residual_rms_db = 0.0;
    int n_points = 0;
    bool converged = true;
    FreeParams free;
};

/// Least-squares fit of the phase-noise parameter over [0, pi/4), with
/// residuals taken in dB. Golden-section search, deterministic. Throws
/// std::invalid_argument on fewer than two points, any x >= 1, or a flat
/// residual landscape (all data at x = 0).
FitResult fit_theta(const std::vector<QuadratureSample>& data,
                    const SqueezingParams& fixed);

/// Joint bounded least squares over any subset of {theta_tilde,
/// p_threshold, loss_l}; Nelder-Mead in up to three dimensions. Bounds:
/// theta in [0, pi/4), P_th above the largest observed pump power, L in
/// [0, 0.05]. Residuals in dB by default, linear behind the flag.
/// Non-convergence is reported via FitResult::converged, not an exception.
FitResult fit_model(const std::vector<PowerSample>& data,
                    const SqueezingParams& initial, const FreeParams& free,
                    bool residuals_in_db = true);

/// Inputs for one device row of the comparison report.
struct OpoReportEntry {
    std::string label;
    SqueezingParams params;
    double squeezing_pump_w = 0.0; ///< pump power for the 2 MHz rows
    double bandwidth_pump_w = 0.0; ///< pump power for the bandwidth row
    double measurement_freq_hz = 2e6;
};

struct ReportRow {
    std::string label;
    double oc_t = 0.0;
    double p_threshold_w = 0.0;
    double escape_efficiency = 0.0;
    double squeezed_db = 0.0;
    double anti_squeezed_db = 0.0;
    double squeezing_pump_w = 0.0;
    double bandwidth_hz = 0.0;
    double bandwidth_pump_w = 0.0;
};

/// Model predictions tabulated per device: output coupler, threshold,
/// squeezing/anti-squeezing at the measurement frequency, bandwidth.
std::vector<ReportRow> report_table(const std::vector<OpoReportEntry>& entries);

} // namespace opotk
