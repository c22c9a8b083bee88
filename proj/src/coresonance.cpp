#include "opotk/coresonance.hpp"

#include <algorithm>
#include <stdexcept>

namespace opotk {

std::vector<CoResonancePoint> co_resonant_points(const CrystalSpec& crystal,
                                                 const CavitySpec& cavity,
                                                 double t_lo_c, double t_hi_c) {
    cavity.validate();
    const auto resonances = resonance_temperatures(crystal, t_lo_c, t_hi_c);
    std::vector<CoResonancePoint> points;
    points.reserve(resonances.size());
    for (const auto& r : resonances)
        points.push_back({r.temperature_c, r.mode_index,
                          conversion_efficiency(crystal, r.temperature_c)});
    std::sort(points.begin(), points.end(),
              [](const CoResonancePoint& a, const CoResonancePoint& b) {
                  if (a.eta != b.eta)
                      return a.eta > b.eta;
                  return a.temperature_c < b.temperature_c;
              });
    return points;
}

double worst_case_best_eta(const CrystalSpec& crystal, const CavitySpec& cavity) {
    cavity.validate();
    // The nearest comb point to the efficiency peak is at most half an FSR
    // away; the comb offset that attains that bound is the worst case.
    const double half_fsr = fsr_temperature(crystal) / 2.0;
    return conversion_efficiency(crystal, crystal.t_ref_c + half_fsr);
}

std::vector<ScanRow> scan_table(const CrystalSpec& crystal, const CavitySpec& cavity,
                                double t_lo_c, double t_hi_c, double step_k) {
    if (!(step_k > 0.0))
        throw std::invalid_argument("scan_table: step must be > 0");
    if (t_lo_c > t_hi_c)
        throw std::invalid_argument("scan_table: t_lo must be <= t_hi");
    cavity.validate();
    crystal.validate();

    std::vector<double> temps;
    for (double t = t_lo_c; t < t_hi_c; t += step_k)
        temps.push_back(t);
    temps.push_back(t_hi_c);

    std::vector<ScanRow> rows;
    rows.reserve(temps.size());
    for (const double t : temps)
        rows.push_back({t, transmission(crystal, cavity, t),
                        conversion_efficiency(crystal, t)});
    return rows;
}

} // namespace opotk
