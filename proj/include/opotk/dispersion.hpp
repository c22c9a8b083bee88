#pragma once

#include <memory>

namespace opotk {

enum class Wave { Fundamental, SecondHarmonic };

/// Geometry and thermo-optic data of a periodically poled nonlinear crystal.
/// Reference indices and dn/dT are for propagation along the crystal Z(c)
/// axis. The reference temperature is the exact phase-matching temperature,
/// so index deviations are zero there by construction.
struct CrystalSpec {
    double length_m = 0.010;          ///< crystal length l
    double wavelength_m = 860e-9;     ///< fundamental vacuum wavelength
    double n0_fund = 1.84;            ///< index at T_ref, fundamental
    double n0_sh = 1.96;              ///< index at T_ref, second harmonic
    double dn_dt_fund = 3.57e-5;      ///< dn/dT, fundamental [1/K]
    double dn_dt_sh = 5.10e-5;        ///< dn/dT, second harmonic [1/K]
    double t_ref_c = 40.0;            ///< phase-matching temperature [degC]
    double poling_period_m = 4.3e-6;  ///< recorded only, not used in computation

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// n0(wave) + dn/dT(wave) * (T - T_ref), the linearized thermo-optic model.
double refractive_index(const CrystalSpec& spec, Wave wave, double temperature_c);

/// Index deviation from the phase-matching point:
/// dn/dT(wave) * (T - T_ref). Identically zero at T_ref.
double delta_n(const CrystalSpec& spec, Wave wave, double temperature_c);

/// Temperature-dependent index model. The toolkit computes with the
/// linearized model above; this interface is the seam for swapping in a
/// full Sellmeier + thermo-optic polynomial without touching the cavity
/// solvers.
class IndexModel {
public:
    virtual ~IndexModel() = default;
    virtual double index(Wave wave, double temperature_c) const = 0;
};

class LinearIndexModel final : public IndexModel {
public:
    explicit LinearIndexModel(CrystalSpec spec);
    double index(Wave wave, double temperature_c) const override;
    const CrystalSpec& spec() const { return spec_; }

private:
    CrystalSpec spec_;
};

} // namespace opotk
