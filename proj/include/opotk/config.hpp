#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "opotk/analysis.hpp"
#include "opotk/cavity.hpp"
#include "opotk/locksim.hpp"
#include "opotk/squeezing.hpp"

namespace opotk {

/// Everything a CLI run needs, loaded from one TOML-style config file with
/// sections mirroring the toolkit modules. Keys carry explicit unit
/// suffixes (length_mm, f0_mhz, ...); unknown keys are rejected.
struct ToolkitConfig {
    CrystalSpec crystal;
    CavitySpec cavity;
    SqueezingParams squeezing;
    LockSimConfig locksim;
    std::string output_dir = ".";
    std::string label = "No.1";
    double report_pump_w = 0.130;           ///< pump for the report's 2 MHz rows
    double report_bandwidth_pump_w = 0.130; ///< pump for the report's bandwidth row
    double report_freq_hz = 2e6;

    /// Reference-device (No.1) parameters; every field overridable from file.
    static ToolkitConfig defaults();

    /// Parses and validates; throws ParseError with file/line context on
    /// malformed input, unknown keys, or invariant violations.
    static ToolkitConfig load(const std::string& path);
    static ToolkitConfig parse(std::istream& in, const std::string& source_name);

    OpoReportEntry report_entry() const;
};

} // namespace opotk
