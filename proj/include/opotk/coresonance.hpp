#pragma once

#include <cstdint>
#include <vector>

#include "opotk/cavity.hpp"
#include "opotk/phasematch.hpp"

namespace opotk {

/// A cavity resonance annotated with the conversion efficiency there.
struct CoResonancePoint {
    double temperature_c = 0.0;
    std::int64_t mode_index = 0;
    double eta = 0.0;
};

/// Resonance temperatures in [t_lo, t_hi] annotated with eta, best first.
/// Ties in eta (symmetric pairs about T_ref) break toward the lower
/// temperature. Empty when the scan contains no resonance.
std::vector<CoResonancePoint> co_resonant_points(const CrystalSpec& crystal,
                                                 const CavitySpec& cavity,
                                                 double t_lo_c, double t_hi_c);

/// Efficiency guaranteed at the best co-resonant point no matter where the
/// resonance comb sits relative to the phase-matching peak: the minimum
/// over comb offsets of the best comb-point eta. For the uniform comb this
/// equals eta at half an FSR from the peak.
double worst_case_best_eta(const CrystalSpec& crystal, const CavitySpec& cavity);

struct ScanRow {
    double temperature_c = 0.0;
    double transmission = 0.0;
    double eta = 0.0;
};

/// Temperature scan of cavity transmission and conversion efficiency,
/// suitable for overlay plotting. The last row always lands on t_hi.
std::vector<ScanRow> scan_table(const CrystalSpec& crystal, const CavitySpec& cavity,
                                double t_lo_c, double t_hi_c, double step_k);

} // namespace opotk
