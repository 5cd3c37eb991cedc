#include "urbanrl/bem.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "urbanrl/errors.hpp"
#include "urbanrl/kv.hpp"
#include "urbanrl/numfmt.hpp"

namespace urbanrl::bem {

namespace {

struct FieldRef {
    const char* name;
    double BuildingParams::* member;
};

constexpr FieldRef kParamFields[] = {
    {"building_height_m", &BuildingParams::building_height_m},
    {"area_roof", &BuildingParams::area_roof},
    {"area_sunwall", &BuildingParams::area_sunwall},
    {"area_shadewall", &BuildingParams::area_shadewall},
    {"area_floor", &BuildingParams::area_floor},
    {"layer_thickness_m_roof", &BuildingParams::layer_thickness_m_roof},
    {"layer_thickness_m_sunwall", &BuildingParams::layer_thickness_m_sunwall},
    {"layer_thickness_m_shadewall", &BuildingParams::layer_thickness_m_shadewall},
    {"layer_thickness_m_floor", &BuildingParams::layer_thickness_m_floor},
    {"layer_conductivity_w_mk_roof", &BuildingParams::layer_conductivity_w_mk_roof},
    {"layer_conductivity_w_mk_sunwall", &BuildingParams::layer_conductivity_w_mk_sunwall},
    {"layer_conductivity_w_mk_shadewall", &BuildingParams::layer_conductivity_w_mk_shadewall},
    {"layer_conductivity_w_mk_floor", &BuildingParams::layer_conductivity_w_mk_floor},
    {"emissivity_interior", &BuildingParams::emissivity_interior},
    {"h_cv_roof", &BuildingParams::h_cv_roof},
    {"h_cv_sunwall", &BuildingParams::h_cv_sunwall},
    {"h_cv_shadewall", &BuildingParams::h_cv_shadewall},
    {"h_cv_floor", &BuildingParams::h_cv_floor},
    {"cop_ac", &BuildingParams::cop_ac},
    {"peff_ac", &BuildingParams::peff_ac},
    {"cop_heat", &BuildingParams::cop_heat},
    {"peff_heat", &BuildingParams::peff_heat},
    {"deep_ground_temp_k", &BuildingParams::deep_ground_temp_k},
    {"p_std_pa", &BuildingParams::p_std_pa},
    {"r_da_j_kgk", &BuildingParams::r_da_j_kgk},
    {"c_p_j_kgk", &BuildingParams::c_p_j_kgk},
};

void check_temp(double t, const char* what) {
    if (!(std::isfinite(t) && t >= kTempFloorK && t <= kTempCeilK)) {
        throw ConfigError(std::string(what) + " = " + std::to_string(t) +
                          " K outside [150, 400] K");
    }
}

// Per-surface view of the parameter set, ordered roof, sunwall, shadewall, floor.
struct Surface {
    double area;
    double h_cv;
    double conductance; // k / d
    double boundary_k;  // inner-node or deep-ground temperature
};

std::array<Surface, 4> surfaces_of(const BuildingParams& p, const ForcingStep& f) {
    return {{
        {p.area_roof, p.h_cv_roof, p.layer_conductivity_w_mk_roof / p.layer_thickness_m_roof,
         f.t_roof_inner_k},
        {p.area_sunwall, p.h_cv_sunwall,
         p.layer_conductivity_w_mk_sunwall / p.layer_thickness_m_sunwall, f.t_sunwall_inner_k},
        {p.area_shadewall, p.h_cv_shadewall,
         p.layer_conductivity_w_mk_shadewall / p.layer_thickness_m_shadewall,
         f.t_shadewall_inner_k},
        {p.area_floor, p.h_cv_floor, p.layer_conductivity_w_mk_floor / p.layer_thickness_m_floor,
         p.deep_ground_temp_k},
    }};
}

// Coefficients frozen at the state entering the solve.
struct Linearization {
    std::array<Surface, 4> sfc;
    std::array<std::array<double, 4>, 4> w; // radiation area weights, w[i][j], j != i
    double h_rd;                            // 4 eps sigma Tref^3
    double c_air_per_dt;                    // V_B rho C_p / dt
    double k_vent;                          // Vdot rho C_p
    double t_canopy_k;
    double t_indoor_prev_k;
};

Linearization linearize(const ThermalState& state, const ForcingStep& forcing,
                        const HvacSetpoints& setpoints, const BuildingParams& params,
                        double dt_s) {
    Linearization lin;
    lin.sfc = surfaces_of(params, forcing);
    for (int i = 0; i < 4; ++i) {
        double total = 0.0;
        for (int j = 0; j < 4; ++j)
            if (j != i) total += lin.sfc[j].area;
        for (int j = 0; j < 4; ++j)
            lin.w[i][j] = (j == i || total <= 0.0) ? 0.0 : lin.sfc[j].area / total;
    }
    const double t_ref = state.t_indoor_k;
    lin.h_rd = 4.0 * params.emissivity_interior * kStefanBoltzmann * t_ref * t_ref * t_ref;
    const double rho = air_density(state.t_indoor_k, params);
    const double volume = params.building_height_m * params.area_floor;
    lin.c_air_per_dt = volume * rho * params.c_p_j_kgk / dt_s;
    const double vdot = setpoints.vent_ach * volume / 3600.0;
    lin.k_vent = vdot * rho * params.c_p_j_kgk;
    lin.t_canopy_k = forcing.t_canopy_k;
    lin.t_indoor_prev_k = state.t_indoor_k;
    return lin;
}

// Five balance residuals evaluated at x with frozen coefficients.
// Rows 0..3: F_rd + F_cv + F_cd per surface (fluxes positive into the
// surface); row 4: air balance of storage, convection and ventilation.
std::array<double, 5> residuals_at(const Linearization& lin, const Eigen::Matrix<double, 5, 1>& x) {
    std::array<double, 5> r{};
    for (int i = 0; i < 4; ++i) {
        double f_rd = 0.0;
        for (int j = 0; j < 4; ++j)
            if (j != i) f_rd += lin.h_rd * lin.w[i][j] * (x[j] - x[i]);
        const double f_cv = lin.sfc[i].h_cv * (x[4] - x[i]);
        const double f_cd = lin.sfc[i].conductance * (lin.sfc[i].boundary_k - x[i]);
        r[i] = f_rd + f_cv + f_cd;
    }
    double conv = 0.0;
    for (int i = 0; i < 4; ++i) conv += lin.sfc[i].area * lin.sfc[i].h_cv * (x[i] - x[4]);
    r[4] = lin.c_air_per_dt * (x[4] - lin.t_indoor_prev_k) - conv -
           lin.k_vent * (lin.t_canopy_k - x[4]);
    return r;
}

} // namespace

void BuildingParams::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(std::isfinite(v) && v > 0.0))
            throw ConfigError(std::string(what) + " must be > 0, got " + std::to_string(v));
    };
    positive(building_height_m, "building_height_m");
    positive(area_roof, "area_roof");
    positive(area_sunwall, "area_sunwall");
    positive(area_shadewall, "area_shadewall");
    positive(area_floor, "area_floor");
    positive(layer_thickness_m_roof, "layer_thickness_m_roof");
    positive(layer_thickness_m_sunwall, "layer_thickness_m_sunwall");
    positive(layer_thickness_m_shadewall, "layer_thickness_m_shadewall");
    positive(layer_thickness_m_floor, "layer_thickness_m_floor");
    positive(layer_conductivity_w_mk_roof, "layer_conductivity_w_mk_roof");
    positive(layer_conductivity_w_mk_sunwall, "layer_conductivity_w_mk_sunwall");
    positive(layer_conductivity_w_mk_shadewall, "layer_conductivity_w_mk_shadewall");
    positive(layer_conductivity_w_mk_floor, "layer_conductivity_w_mk_floor");
    if (!(emissivity_interior > 0.0 && emissivity_interior <= 1.0))
        throw ConfigError("emissivity_interior must be in (0, 1], got " +
                          std::to_string(emissivity_interior));
    positive(h_cv_roof, "h_cv_roof");
    positive(h_cv_sunwall, "h_cv_sunwall");
    positive(h_cv_shadewall, "h_cv_shadewall");
    positive(h_cv_floor, "h_cv_floor");
    positive(cop_ac * peff_ac, "cop_ac * peff_ac");
    positive(cop_heat * peff_heat, "cop_heat * peff_heat");
    check_temp(deep_ground_temp_k, "deep_ground_temp_k");
    positive(p_std_pa, "p_std_pa");
    positive(r_da_j_kgk, "r_da_j_kgk");
    positive(c_p_j_kgk, "c_p_j_kgk");
}

void BuildingParams::set_field(const std::string& key, const std::string& value) {
    for (const auto& f : kParamFields) {
        if (key == f.name) {
            this->*(f.member) = parse_double(value, "building parameter '" + key + "'");
            return;
        }
    }
    throw ConfigError("unknown building parameter '" + key + "'");
}

BuildingParams BuildingParams::from_file(const std::string& path) {
    KvFile kv = KvFile::from_file(path);
    BuildingParams out;
    for (const auto& [key, value] : kv.entries()) {
        try {
            out.set_field(key, value);
        } catch (const ConfigError& err) {
            throw ConfigError(path + ": " + err.what());
        }
    }
    out.validate();
    return out;
}

void ThermalState::validate() const {
    check_temp(t_roof_k, "t_roof_k");
    check_temp(t_sunwall_k, "t_sunwall_k");
    check_temp(t_shadewall_k, "t_shadewall_k");
    check_temp(t_floor_k, "t_floor_k");
    check_temp(t_indoor_k, "t_indoor_k");
}

void ForcingStep::validate() const {
    check_temp(t_canopy_k, "t_canopy_k");
    check_temp(t_roof_inner_k, "t_roof_inner_k");
    check_temp(t_sunwall_inner_k, "t_sunwall_inner_k");
    check_temp(t_shadewall_inner_k, "t_shadewall_inner_k");
}

void HvacSetpoints::validate() const {
    if (!(t_min_k < t_max_k))
        throw ConfigError("setpoints: t_min_k must be < t_max_k");
    if (!(vent_ach >= 0.0))
        throw ConfigError("setpoints: vent_ach must be >= 0");
}

double air_density(double t_indoor_k, const BuildingParams& params) {
    if (!(t_indoor_k > 0.0))
        throw ConfigError("air_density: t_indoor_k must be > 0, got " + std::to_string(t_indoor_k));
    return params.p_std_pa / (params.r_da_j_kgk * t_indoor_k);
}

ThermalState solve_energy_balance(const ThermalState& state, const ForcingStep& forcing,
                                  const HvacSetpoints& setpoints, const BuildingParams& params,
                                  double dt_s, std::array<double, 5>* residuals,
                                  double* vent_flux_wm2) {
    if (!(dt_s > 0.0)) throw ConfigError("solve_energy_balance: dt_s must be > 0");

    const Linearization lin = linearize(state, forcing, setpoints, params, dt_s);

    Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
    Eigen::Matrix<double, 5, 1> b = Eigen::Matrix<double, 5, 1>::Zero();
    for (int i = 0; i < 4; ++i) {
        a(i, i) = -(lin.h_rd + lin.sfc[i].h_cv + lin.sfc[i].conductance);
        for (int j = 0; j < 4; ++j)
            if (j != i) a(i, j) = lin.h_rd * lin.w[i][j];
        a(i, 4) = lin.sfc[i].h_cv;
        b(i) = -lin.sfc[i].conductance * lin.sfc[i].boundary_k;
    }
    double conv_total = 0.0;
    for (int i = 0; i < 4; ++i) {
        a(4, i) = -lin.sfc[i].area * lin.sfc[i].h_cv;
        conv_total += lin.sfc[i].area * lin.sfc[i].h_cv;
    }
    a(4, 4) = lin.c_air_per_dt + conv_total + lin.k_vent;
    b(4) = lin.c_air_per_dt * lin.t_indoor_prev_k + lin.k_vent * lin.t_canopy_k;

    Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(a);
    const double max_pivot = std::abs(lu.maxPivot());
    lu.setThreshold(1e-12);
    if (max_pivot <= 0.0 || !lu.isInvertible()) {
        throw NumericError("energy balance system is singular (max pivot " +
                           std::to_string(max_pivot) + ", rank " + std::to_string(lu.rank()) +
                           " of 5); check for degenerate coupling parameters");
    }
    const Eigen::Matrix<double, 5, 1> x = lu.solve(b);

    const auto res = residuals_at(lin, x);
    if (residuals) *residuals = res;
    if (vent_flux_wm2) *vent_flux_wm2 = lin.k_vent * (lin.t_canopy_k - x[4]) / params.area_floor;

    ThermalState out;
    out.t_roof_k = x[0];
    out.t_sunwall_k = x[1];
    out.t_shadewall_k = x[2];
    out.t_floor_k = x[3];
    out.t_indoor_k = x[4];
    return out;
}

std::pair<ThermalState, StepFluxes> apply_hvac(const ThermalState& pre_clamp,
                                               const HvacSetpoints& setpoints,
                                               const BuildingParams& params, double dt_s) {
    ThermalState out = pre_clamp;
    StepFluxes fluxes;
    // rho from the pre-clamp indoor temperature of the current step
    const double rho = air_density(pre_clamp.t_indoor_k, params);
    const double capacity_rate = params.building_height_m * rho * params.c_p_j_kgk / dt_s;
    if (pre_clamp.t_indoor_k > setpoints.t_max_k) {
        fluxes.f_cool_wm2 = capacity_rate * (pre_clamp.t_indoor_k - setpoints.t_max_k);
        out.t_indoor_k = setpoints.t_max_k;
    } else if (pre_clamp.t_indoor_k < setpoints.t_min_k) {
        fluxes.f_heat_wm2 = capacity_rate * (setpoints.t_min_k - pre_clamp.t_indoor_k);
        out.t_indoor_k = setpoints.t_min_k;
    }
    fluxes.f_wasteheat_wm2 = 0.6 * fluxes.f_cool_wm2 + 0.2 * fluxes.f_heat_wm2;
    return {out, fluxes};
}

std::pair<ThermalState, StepFluxes> step(const ThermalState& state, const ForcingStep& forcing,
                                         const HvacSetpoints& setpoints,
                                         const BuildingParams& params, double dt_s) {
    std::array<double, 5> residuals{};
    double vent_flux = 0.0;
    const ThermalState pre = solve_energy_balance(state, forcing, setpoints, params, dt_s,
                                                  &residuals, &vent_flux);
    auto [clamped, fluxes] = apply_hvac(pre, setpoints, params, dt_s);
    fluxes.residuals = residuals;
    fluxes.f_vent_wm2 = vent_flux;
    return {clamped, fluxes};
}

} // namespace urbanrl::bem
