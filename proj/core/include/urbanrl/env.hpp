#pragma once

#include <array>
#include <span>
#include <string>

#include "urbanrl/bem.hpp"
#include "urbanrl/data.hpp"

namespace urbanrl::env {

// 5-dimensional RL state, order fixed.
struct Observation {
    double ac_setpoint_k = 328.15;
    double heat_setpoint_k = 258.15;
    double vent_ach = 0.3;
    double t_indoor_k = 293.15;
    double t_canopy_k = 293.15;

    std::array<double, 5> as_array() const {
        return {ac_setpoint_k, heat_setpoint_k, vent_ach, t_indoor_k, t_canopy_k};
    }
};

// Continuous HVAC decision in the paper's action intervals.
inline constexpr double kAcLowC = 25.0, kAcHighC = 35.0;
inline constexpr double kHeatLowC = 10.0, kHeatHighC = 20.0;
inline constexpr double kVentLow = 0.3, kVentHigh = 0.5;

struct ContinuousAction {
    double ac_setpoint_c = 30.0;
    double heat_setpoint_c = 15.0;
    double vent = 0.4;

    std::array<double, 3> as_array() const { return {ac_setpoint_c, heat_setpoint_c, vent}; }
};

inline std::array<double, 3> action_lower_bounds() { return {kAcLowC, kHeatLowC, kVentLow}; }
inline std::array<double, 3> action_upper_bounds() { return {kAcHighC, kHeatHighC, kVentHigh}; }

struct DiscreteAction {
    int index = 0; // 0..7
};
inline constexpr int kDiscreteActionCount = 8;

// Raw setpoint triple in Kelvin, the form both the discrete table and the
// per-city default controllers produce.
struct SetpointCommand {
    double ac_k = 328.15;
    double heat_k = 258.15;
    double vent = 0.3;
};

/// 8-row table: AC in {299.15, 328.15} K x heat in {288.15, 258.15} K x vent in {0.3, 0.5}.
/// index = 4*ac_idx + 2*heat_idx + vent_idx.
SetpointCommand decode_discrete(int index);
int encode_discrete(const SetpointCommand& cmd);

struct RewardConfig {
    double w = 0.1;
    double lambda_p = 1.0;
    double lambda_t = 1.0;
    double t_comfort_min_k = 291.15; // 18 C
    double t_comfort_max_k = 297.15; // 24 C
    double gamma = 0.99;
    long episode_steps = 17520;

    void validate() const;

    /// Keys: w, lambda_p, lambda_t, t_comfort_min_c, t_comfort_max_c, gamma, episode_steps.
    static RewardConfig from_file(const std::string& path);
};

/// P_ac + P_heat: HVAC fluxes divided by COP * Peff.
double energy_term(double f_cool_wm2, double f_heat_wm2, const bem::BuildingParams& params);

/// |t - T_min| + |T_max - t|; never below the band width.
double comfort_term(double t_indoor_k, const RewardConfig& config);

/// R = -w lambda_P energy - (1-w) lambda_T comfort.
double reward(double energy_term, double t_indoor_k, const RewardConfig& config);

/// Discounted return, sum of gamma^k R_k.
double episode_return(std::span<const double> rewards, double gamma);

/// Fixed per-city default setpoints (vent 0.3 for all).
SetpointCommand default_controller(const std::string& city_name);

struct StepOutcome {
    Observation observation;
    double reward = 0.0;
    double energy_term = 0.0;
    double comfort_term = 0.0;
    bool done = false;
    bem::StepFluxes fluxes;
};

// Episodic wrapper around the building model. One instance is
// single-threaded; independent instances run concurrently freely.
class Environment {
public:
    Environment(data::ForcingSeriesPtr forcing, bem::BuildingParams params, RewardConfig reward);

    Observation reset();

    /// Continuous action; out-of-range components are clipped and counted.
    StepOutcome step(const ContinuousAction& action);
    StepOutcome step(const DiscreteAction& action);
    /// Raw setpoints (trusted path used by the discrete table and controllers).
    StepOutcome step(const SetpointCommand& command);

    const Observation& observation() const { return observation_; }
    long step_index() const { return step_index_; }
    bool done() const { return step_index_ >= config_.episode_steps; }
    long clip_count() const { return clip_count_; }

    const RewardConfig& reward_config() const { return config_; }
    const bem::BuildingParams& building() const { return params_; }
    const data::ForcingSeries& forcing() const { return *forcing_; }

private:
    data::ForcingSeriesPtr forcing_;
    bem::BuildingParams params_;
    RewardConfig config_;
    bem::ThermalState state_;
    SetpointCommand setpoints_;
    Observation observation_;
    long step_index_ = 0;
    long clip_count_ = 0;
    bool started_ = false;
};

} // namespace urbanrl::env
