#include "opotk/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "opotk/cavity.hpp"
#include "opotk/csv.hpp"
#include "opotk/errors.hpp"
#include "optimize.hpp"

namespace opotk {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double metadata_number(const Table& table, const std::string& key,
                       const std::string& source) {
    const auto it = table.metadata.find(key);
    if (it == table.metadata.end())
        throw ParseError(source + ": missing metadata line '# " + key + "=...'");
    const std::string& text = it->second;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError(source + ": metadata '" + key + "' is not a number: '" + text + "'");
    return value;
}

/// Piecewise-linear interpolation of power_dbm over frequency. Duplicate
/// frequencies collapse to their mean dBm, so zero-span traces become a
/// single node.
class DbmInterpolator {
public:
    DbmInterpolator(const SpectrumTrace& trace, std::string role)
        : role_(std::move(role)) {
        std::vector<SpectrumTrace::Point> pts = trace.points;
        std::sort(pts.begin(), pts.end(),
                  [](const auto& a, const auto& b) { return a.freq_hz < b.freq_hz; });
        std::size_t i = 0;
        while (i < pts.size()) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < pts.size() && pts[j].freq_hz == pts[i].freq_hz)
                sum += pts[j++].power_dbm;
            freqs_.push_back(pts[i].freq_hz);
            dbm_.push_back(sum / static_cast<double>(j - i));
            i = j;
        }
    }

    double operator()(double freq_hz) const {
        if (freq_hz < freqs_.front() || freq_hz > freqs_.back())
            throw std::invalid_argument(
                role_ + " trace does not cover " + format_double(freq_hz) +
                " Hz (covers " + format_double(freqs_.front()) + " to " +
                format_double(freqs_.back()) + " Hz)");
        const auto upper = std::upper_bound(freqs_.begin(), freqs_.end(), freq_hz);
        if (upper == freqs_.begin())
            return dbm_.front();
        const auto hi = static_cast<std::size_t>(upper - freqs_.begin());
        if (hi == freqs_.size())
            return dbm_.back();
        const std::size_t lo = hi - 1;
        const double t = (freq_hz - freqs_[lo]) / (freqs_[hi] - freqs_[lo]);
        return dbm_[lo] + t * (dbm_[hi] - dbm_[lo]);
    }

private:
    std::string role_;
    std::vector<double> freqs_;
    std::vector<double> dbm_;
};

double dbm_to_linear(double dbm) {
    return std::pow(10.0, dbm / 10.0);
}

/// Sum of squared dB residuals of the phase-noise model against the data.
double theta_ssr(double theta, const std::vector<QuadratureSample>& data,
                 SqueezingParams params) {
    params.theta_tilde_rad = theta;
    double ssr = 0.0;
    for (const auto& s : data) {
        const double model =
            variance_with_phase_noise(s.quad, s.x, s.freq_hz, params);
        const double r = to_db(model) - to_db(s.relative_power);
        ssr += r * r;
    }
    return ssr;
}

/// 1-sigma uncertainty from the local curvature of the sum of squares:
/// var = 2 * s^2 / d2(SSR), with s^2 the reduced residual variance.
double curvature_stderr(const std::function<double(double)>& ssr, double at,
                        double lo, double hi, double ssr_min, int n_points,
                        int n_free) {
    const double h = 1e-5;
    double d2;
    if (at - h < lo) {
        d2 = (ssr(at + 2 * h) - 2.0 * ssr(at + h) + ssr_min) / (h * h);
    } else if (at + h > hi) {
        d2 = (ssr(at - 2 * h) - 2.0 * ssr(at - h) + ssr_min) / (h * h);
    } else {
        d2 = (ssr(at + h) - 2.0 * ssr_min + ssr(at - h)) / (h * h);
    }
    if (!(d2 > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    const int dof = std::max(1, n_points - n_free);
    const double s2 = ssr_min / dof;
    return std::sqrt(2.0 * s2 / d2);
}

} // namespace

void SpectrumTrace::validate() const {
    if (points.empty())
        throw std::invalid_argument("trace '" + label + "' has no data points");
    if (!(rbw_hz > 0.0) || !std::isfinite(rbw_hz))
        throw std::invalid_argument("trace '" + label + "': rbw_hz must be > 0");
    if (!(vbw_hz > 0.0) || !std::isfinite(vbw_hz))
        throw std::invalid_argument("trace '" + label + "': vbw_hz must be > 0");
    for (const auto& p : points) {
        if (!std::isfinite(p.freq_hz) || p.freq_hz < 0.0)
            throw std::invalid_argument("trace '" + label +
                                        "': frequency_hz must be finite and >= 0");
        if (!std::isfinite(p.power_dbm))
            throw std::invalid_argument("trace '" + label + "': power_dbm must be finite");
    }
    if (!zero_span()) {
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i].freq_hz > points[i - 1].freq_hz))
                throw std::invalid_argument(
                    "trace '" + label + "': frequency_hz must be strictly increasing "
                    "(or all equal for a zero-span trace)");
    }
    if (center_frequency_hz &&
        (!std::isfinite(*center_frequency_hz) || *center_frequency_hz < 0.0))
        throw std::invalid_argument("trace '" + label +
                                    "': center_frequency_hz must be finite and >= 0");
}

bool SpectrumTrace::zero_span() const {
    if (points.empty())
        return false;
    for (const auto& p : points)
        if (p.freq_hz != points.front().freq_hz)
            return false;
    return true;
}

SpectrumTrace load_trace(std::istream& in, const std::string& source_name) {
    const Table table = read_table(in, source_name);
    if (table.columns != std::vector<std::string>{"frequency_hz", "power_dbm"})
        throw ParseError(source_name +
                         ": expected header 'frequency_hz,power_dbm'");
    SpectrumTrace trace;
    trace.rbw_hz = metadata_number(table, "rbw_hz", source_name);
    trace.vbw_hz = metadata_number(table, "vbw_hz", source_name);
    if (const auto it = table.metadata.find("label"); it != table.metadata.end())
        trace.label = it->second;
    if (table.metadata.count("center_frequency_hz"))
        trace.center_frequency_hz =
            metadata_number(table, "center_frequency_hz", source_name);
    trace.points.reserve(table.rows.size());
    for (const auto& row : table.rows)
        trace.points.push_back({row[0], row[1]});
    if (!trace.zero_span()) {
        // Point at the first offending file line rather than the whole trace.
        for (std::size_t i = 1; i < trace.points.size(); ++i) {
            if (!(trace.points[i].freq_hz > trace.points[i - 1].freq_hz)) {
                const int line = i < table.row_lines.size() ? table.row_lines[i] : 0;
                throw ParseError(source_name + ":" + std::to_string(line) +
                                 ": frequency_hz must be strictly increasing "
                                 "(or all equal for a zero-span trace)");
            }
        }
    }
    trace.validate();
    return trace;
}

SpectrumTrace load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    return load_trace(in, path);
}

void save_trace(std::ostream& out, const SpectrumTrace& trace) {
    trace.validate();
    out << "# rbw_hz=" << format_double(trace.rbw_hz) << "\n";
    out << "# vbw_hz=" << format_double(trace.vbw_hz) << "\n";
    out << "# label=" << trace.label << "\n";
    if (trace.center_frequency_hz)
        out << "# center_frequency_hz=" << format_double(*trace.center_frequency_hz)
            << "\n";
    out << "frequency_hz,power_dbm\n";
    for (const auto& p : trace.points)
        out << format_double(p.freq_hz) << "," << format_double(p.power_dbm) << "\n";
}

std::vector<NormalizedPoint> normalize(const SpectrumTrace& signal,
                                       const SpectrumTrace& shot,
                                       const std::optional<SpectrumTrace>& dark,
                                       bool subtract_dark) {
    signal.validate();
    shot.validate();
    if (dark)
        dark->validate();
    if (subtract_dark && !dark)
        throw std::invalid_argument("dark-noise subtraction requested without a dark trace");

    const DbmInterpolator shot_at(shot, "shot-noise");
    std::optional<DbmInterpolator> dark_at;
    if (subtract_dark)
        dark_at.emplace(*dark, "dark-noise");

    std::vector<NormalizedPoint> out;
    out.reserve(signal.points.size());
    for (const auto& p : signal.points) {
        const double s = dbm_to_linear(p.power_dbm);
        const double sh = dbm_to_linear(shot_at(p.freq_hz));
        NormalizedPoint np;
        np.freq_hz = p.freq_hz;
        np.dark_corrected = subtract_dark;
        if (subtract_dark) {
            const double d = dbm_to_linear((*dark_at)(p.freq_hz));
            if (!(sh > d))
                throw std::invalid_argument(
                    "shot noise at or below dark noise at " + format_double(p.freq_hz) +
                    " Hz; the normalization is undefined");
            np.relative_power = (s - d) / (sh - d);
        } else {
            np.relative_power = s / sh;
        }
        out.push_back(np);
    }
    return out;
}

FitResult fit_theta(const std::vector<QuadratureSample>& data,
                    const SqueezingParams& fixed) {
    fixed.validate();
    if (data.size() < 2)
        throw std::invalid_argument("fit_theta: need at least two samples");
    bool any_pumped = false;
    for (const auto& s : data) {
        if (!(s.x >= 0.0) || s.x >= 1.0)
            throw std::invalid_argument("fit_theta: sample x must be in [0, 1)");
        if (!(s.freq_hz >= 0.0))
            throw std::invalid_argument("fit_theta: sample freq_hz must be >= 0");
        if (!(s.relative_power > 0.0))
            throw std::invalid_argument("fit_theta: sample relative_power must be > 0");
        any_pumped = any_pumped || s.x > 0.0;
    }
    if (!any_pumped)
        throw std::invalid_argument(
            "fit_theta: all samples have x = 0; the model is independent of theta there");

    const double hi = std::numbers::pi / 4.0;
    const auto ssr = [&](double theta) { return theta_ssr(theta, data, fixed); };
    const double best = detail::golden_section(ssr, 0.0, hi, 1e-8);
    const double ssr_min = ssr(best);

    FitResult result;
    result.theta_tilde_rad = best;
    result.theta_tilde_stderr_rad = curvature_stderr(
        ssr, best, 0.0, hi, ssr_min, static_cast<int>(data.size()), 1);
    result.p_threshold_w = fixed.p_threshold_w;
    result.loss_l = fixed.loss_l;
    result.params = fixed;
    result.params.theta_tilde_rad = best;
    result.residual_rms_db = std::sqrt(ssr_min / static_cast<double>(data.size()));
    result.n_points = static_cast<int>(data.size());
    result.converged = true;
    result.free = FreeParams{true, false, false};
    return result;
}

FitResult fit_model(const std::vector<PowerSample>& data,
                    const SqueezingParams& initial, const FreeParams& free,
                    bool residuals_in_db) {
    initial.validate();
    if (free.count() == 0)
        throw std::invalid_argument("fit_model: no free parameters");
    if (data.size() < static_cast<std::size_t>(free.count()) || data.size() < 2)
        throw std::invalid_argument("fit_model: not enough samples for the free parameters");
    double p_max = 0.0;
    for (const auto& s : data) {
        if (!(s.pump_power_w >= 0.0))
            throw std::invalid_argument("fit_model: pump_power_w must be >= 0");
        if (!(s.freq_hz >= 0.0))
            throw std::invalid_argument("fit_model: freq_hz must be >= 0");
        if (residuals_in_db && !(s.relative_power > 0.0))
            throw std::invalid_argument(
                "fit_model: relative_power must be > 0 for dB residuals");
        p_max = std::max(p_max, s.pump_power_w);
    }
    if (!(p_max > 0.0))
        throw std::invalid_argument("fit_model: all samples have zero pump power");

    const double theta_hi = std::numbers::pi / 4.0;
    const double loss_hi = 0.05;
    const double pth_lo = p_max;

    // Pack the free parameters in a fixed order: theta, P_th, L.
    const auto unpack = [&](const std::vector<double>& v) {
        SqueezingParams p = initial;
        std::size_t i = 0;
        if (free.theta_tilde)
            p.theta_tilde_rad = v[i++];
        if (free.p_threshold)
            p.p_threshold_w = v[i++];
        if (free.loss_l)
            p.loss_l = v[i++];
        return p;
    };

    const auto objective = [&](const std::vector<double>& v) {
        const SqueezingParams p = unpack(v);
        double violation = 0.0;
        if (p.theta_tilde_rad < 0.0)
            violation += -p.theta_tilde_rad;
        if (p.theta_tilde_rad >= theta_hi)
            violation += p.theta_tilde_rad - theta_hi;
        if (p.p_threshold_w <= pth_lo)
            violation += (pth_lo - p.p_threshold_w) / pth_lo + 1e-12;
        if (p.loss_l < 0.0)
            violation += -p.loss_l;
        if (p.loss_l > loss_hi)
            violation += p.loss_l - loss_hi;
        if (violation > 0.0)
            return 1e12 * (1.0 + violation);
        double ssr = 0.0;
        for (const auto& s : data) {
            const double x = std::sqrt(s.pump_power_w / p.p_threshold_w);
            const double model = variance_with_phase_noise(s.quad, x, s.freq_hz, p);
            const double r = residuals_in_db ? to_db(model) - to_db(s.relative_power)
                                             : model - s.relative_power;
            ssr += r * r;
        }
        return ssr;
    };

    std::vector<double> x0, scale;
    if (free.theta_tilde) {
        x0.push_back(std::clamp(initial.theta_tilde_rad, 0.0, theta_hi - 1e-6));
        scale.push_back(0.02);
    }
    if (free.p_threshold) {
        x0.push_back(std::max(initial.p_threshold_w, p_max * 1.05));
        scale.push_back(0.1 * x0.back());
    }
    if (free.loss_l) {
        x0.push_back(std::clamp(initial.loss_l, 0.0, loss_hi));
        scale.push_back(0.005);
    }

    const auto nm = detail::nelder_mead(objective, x0, scale, 1e-10, 1e-14, 4000);
    const SqueezingParams fitted = unpack(nm.x);

    FitResult result;
    result.theta_tilde_rad = fitted.theta_tilde_rad;
    result.p_threshold_w = fitted.p_threshold_w;
    result.loss_l = fitted.loss_l;
    result.params = fitted;
    result.n_points = static_cast<int>(data.size());
    result.converged = nm.converged;
    result.free = free;

    if (free.theta_tilde) {
        // Profile curvature along theta with the other parameters held at
        // their fitted values.
        const auto ssr_theta = [&](double theta) {
            std::vector<double> v = nm.x;
            v[0] = theta;
            return objective(v);
        };
        result.theta_tilde_stderr_rad = curvature_stderr(
            ssr_theta, fitted.theta_tilde_rad, 0.0, theta_hi, nm.fmin,
            static_cast<int>(data.size()), free.count());
    }

    if (residuals_in_db) {
        result.residual_rms_db = std::sqrt(nm.fmin / static_cast<double>(data.size()));
    } else {
        double ssr_db = 0.0;
        bool db_ok = true;
        for (const auto& s : data) {
            if (!(s.relative_power > 0.0)) {
                db_ok = false;
                break;
            }
            const double x = std::sqrt(s.pump_power_w / fitted.p_threshold_w);
            const double model = variance_with_phase_noise(s.quad, x, s.freq_hz, fitted);
            const double r = to_db(model) - to_db(s.relative_power);
            ssr_db += r * r;
        }
        result.residual_rms_db =
            db_ok ? std::sqrt(ssr_db / static_cast<double>(data.size()))
                  : std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

std::vector<ReportRow> report_table(const std::vector<OpoReportEntry>& entries) {
    std::vector<ReportRow> rows;
    rows.reserve(entries.size());
    for (const auto& e : entries) {
        e.params.validate();
        CavitySpec cavity;
        cavity.output_coupler_t = e.params.oc_t;
        cavity.intra_cavity_loss = e.params.loss_l;
        ReportRow row;
        row.label = e.label;
        row.oc_t = e.params.oc_t;
        row.p_threshold_w = e.params.p_threshold_w;
        row.escape_efficiency = escape_efficiency(cavity);
        const double x = pump_to_x(e.squeezing_pump_w, e.params.p_threshold_w);
        row.squeezed_db = to_db(variance_with_phase_noise(
            Quadrature::Squeezed, x, e.measurement_freq_hz, e.params));
        row.anti_squeezed_db = to_db(variance_with_phase_noise(
            Quadrature::AntiSqueezed, x, e.measurement_freq_hz, e.params));
        row.squeezing_pump_w = e.squeezing_pump_w;
        const double xb = pump_to_x(e.bandwidth_pump_w, e.params.p_threshold_w);
        row.bandwidth_hz = squeezing_bandwidth(xb, e.params.f0_hz);
        row.bandwidth_pump_w = e.bandwidth_pump_w;
        rows.push_back(row);
    }
    return rows;
}

} // namespace opotk
