#pragma once

#include <array>
#include <string>
#include <utility>

namespace urbanrl::bem {

inline constexpr double kStefanBoltzmann = 5.670374419e-8; // W m^-2 K^-4
inline constexpr double kDefaultDtSeconds = 1800.0;
inline constexpr double kTempFloorK = 150.0;
inline constexpr double kTempCeilK = 400.0;

// One simulated building archetype. Areas are per unit floor area
// (floor normalized to 1); layer thickness/conductivity describe the
// innermost layer of each enclosing surface.
struct BuildingParams {
    double building_height_m = 10.0;

    double area_roof = 1.0;
    double area_sunwall = 2.0;
    double area_shadewall = 2.0;
    double area_floor = 1.0;

    double layer_thickness_m_roof = 0.05;
    double layer_thickness_m_sunwall = 0.05;
    double layer_thickness_m_shadewall = 0.05;
    double layer_thickness_m_floor = 0.10;

    double layer_conductivity_w_mk_roof = 0.20;
    double layer_conductivity_w_mk_sunwall = 0.20;
    double layer_conductivity_w_mk_shadewall = 0.20;
    double layer_conductivity_w_mk_floor = 1.00;

    double emissivity_interior = 0.9;

    double h_cv_roof = 4.0;
    double h_cv_sunwall = 3.0;
    double h_cv_shadewall = 3.0;
    double h_cv_floor = 4.0;

    double cop_ac = 0.9;
    double peff_ac = 0.96;
    double cop_heat = 3.6;
    double peff_heat = 0.43;

    double deep_ground_temp_k = 287.15;

    double p_std_pa = 101325.0;
    double r_da_j_kgk = 287.04;
    double c_p_j_kgk = 1004.64;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;

    /// Flat key=value file, keys exactly the field names above.
    static BuildingParams from_file(const std::string& path);

    /// Sets one field by its key name; unknown keys throw ConfigError.
    void set_field(const std::string& key, const std::string& value);
};

// Prognostic temperatures: four interior surfaces plus indoor air.
struct ThermalState {
    double t_roof_k = 293.15;
    double t_sunwall_k = 293.15;
    double t_shadewall_k = 293.15;
    double t_floor_k = 293.15;
    double t_indoor_k = 293.15;

    void validate() const;
};

// Exogenous boundary temperatures for one timestep.
struct ForcingStep {
    double t_canopy_k = 293.15;
    double t_roof_inner_k = 293.15;
    double t_sunwall_inner_k = 293.15;
    double t_shadewall_inner_k = 293.15;
    long step_index = 0;

    void validate() const;
};

struct HvacSetpoints {
    double t_max_k = 328.15; // AC set point
    double t_min_k = 258.15; // heating set point
    double vent_ach = 0.3;   // air changes per hour

    void validate() const;
};

// Fluxes are per unit floor area. residuals holds the four surface
// balances followed by the air balance, re-evaluated at the returned
// temperatures with the linearization coefficients frozen at the values
// used in the solve.
struct StepFluxes {
    double f_cool_wm2 = 0.0;
    double f_heat_wm2 = 0.0;
    double f_vent_wm2 = 0.0;
    double f_wasteheat_wm2 = 0.0;
    std::array<double, 5> residuals{};
};

/// Dry-air density at standard pressure and the given indoor temperature.
double air_density(double t_indoor_k, const BuildingParams& params);

/// Implicit (backward Euler) solve of the coupled surface/air balances.
/// Returns the pre-clamp state; residuals (if non-null) receive the five
/// balance residuals at the solution.
ThermalState solve_energy_balance(const ThermalState& state, const ForcingStep& forcing,
                                  const HvacSetpoints& setpoints, const BuildingParams& params,
                                  double dt_s, std::array<double, 5>* residuals = nullptr,
                                  double* vent_flux_wm2 = nullptr);

/// Clamps indoor air to the setpoint band and reports the cooling/heating
/// fluxes plus waste heat. Ventilation flux and residuals are left zero;
/// step() fills them from the solve.
std::pair<ThermalState, StepFluxes> apply_hvac(const ThermalState& pre_clamp,
                                               const HvacSetpoints& setpoints,
                                               const BuildingParams& params, double dt_s);

/// solve_energy_balance followed by apply_hvac.
std::pair<ThermalState, StepFluxes> step(const ThermalState& state, const ForcingStep& forcing,
                                         const HvacSetpoints& setpoints,
                                         const BuildingParams& params, double dt_s);

} // namespace urbanrl::bem
