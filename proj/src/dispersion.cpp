#include "opotk/dispersion.hpp"

#include <stdexcept>

namespace opotk {

void CrystalSpec::validate() const {
    if (!(length_m > 0.0))
        throw std::invalid_argument("CrystalSpec.length_m must be > 0");
    if (!(wavelength_m > 0.0))
        throw std::invalid_argument("CrystalSpec.wavelength_m must be > 0");
    if (dn_dt_sh == dn_dt_fund)
        throw std::invalid_argument(
            "CrystalSpec.dn_dt_sh must differ from dn_dt_fund (phase-matching width undefined)");
    if (!(n0_fund > 1.0 && n0_fund < 3.0))
        throw std::invalid_argument("CrystalSpec.n0_fund must be in (1, 3)");
    if (!(n0_sh > 1.0 && n0_sh < 3.0))
        throw std::invalid_argument("CrystalSpec.n0_sh must be in (1, 3)");
}

double refractive_index(const CrystalSpec& spec, Wave wave, double temperature_c) {
    spec.validate();
    const double n0 = wave == Wave::Fundamental ? spec.n0_fund : spec.n0_sh;
    return n0 + delta_n(spec, wave, temperature_c);
}

double delta_n(const CrystalSpec& spec, Wave wave, double temperature_c) {
    const double dndt = wave == Wave::Fundamental ? spec.dn_dt_fund : spec.dn_dt_sh;
    return dndt * (temperature_c - spec.t_ref_c);
}

LinearIndexModel::LinearIndexModel(CrystalSpec spec) : spec_(spec) {
    spec_.validate();
}

double LinearIndexModel::index(Wave wave, double temperature_c) const {
    const double n0 = wave == Wave::Fundamental ? spec_.n0_fund : spec_.n0_sh;
    return n0 + delta_n(spec_, wave, temperature_c);
}

} // namespace opotk
