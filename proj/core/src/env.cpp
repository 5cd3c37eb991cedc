#include "urbanrl/env.hpp"

#include <algorithm>
#include <cmath>

#include "urbanrl/errors.hpp"
#include "urbanrl/kv.hpp"

namespace urbanrl::env {

namespace {
constexpr double kAcTableK[2] = {299.15, 328.15};   // 26 C, 55 C
constexpr double kHeatTableK[2] = {288.15, 258.15}; // 15 C, -15 C
constexpr double kVentTable[2] = {0.3, 0.5};
constexpr double kCelsiusOffset = 273.15;
} // namespace

SetpointCommand decode_discrete(int index) {
    if (index < 0 || index >= kDiscreteActionCount)
        throw ConfigError("discrete action index " + std::to_string(index) + " outside 0..7");
    SetpointCommand cmd;
    cmd.ac_k = kAcTableK[(index >> 2) & 1];
    cmd.heat_k = kHeatTableK[(index >> 1) & 1];
    cmd.vent = kVentTable[index & 1];
    return cmd;
}

int encode_discrete(const SetpointCommand& cmd) {
    auto match = [](double v, const double table[2], const char* what) {
        if (v == table[0]) return 0;
        if (v == table[1]) return 1;
        throw ConfigError(std::string("setpoint ") + what + " = " + std::to_string(v) +
                          " is not a discrete table value");
    };
    return 4 * match(cmd.ac_k, kAcTableK, "ac_k") + 2 * match(cmd.heat_k, kHeatTableK, "heat_k") +
           match(cmd.vent, kVentTable, "vent");
}

void RewardConfig::validate() const {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("reward config: w must be in [0, 1]");
    if (!(lambda_p > 0.0)) throw ConfigError("reward config: lambda_p must be > 0");
    if (!(lambda_t > 0.0)) throw ConfigError("reward config: lambda_t must be > 0");
    if (!(t_comfort_min_k < t_comfort_max_k))
        throw ConfigError("reward config: comfort min must be < comfort max");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("reward config: gamma must be in (0, 1]");
    if (episode_steps < 1) throw ConfigError("reward config: episode_steps must be >= 1");
}

RewardConfig RewardConfig::from_file(const std::string& path) {
    KvFile kv = KvFile::from_file(path);
    RewardConfig out;
    for (const auto& [key, value] : kv.entries()) {
        if (key == "w") out.w = kv.get_double(key);
        else if (key == "lambda_p") out.lambda_p = kv.get_double(key);
        else if (key == "lambda_t") out.lambda_t = kv.get_double(key);
        else if (key == "t_comfort_min_c") out.t_comfort_min_k = kv.get_double(key) + kCelsiusOffset;
        else if (key == "t_comfort_max_c") out.t_comfort_max_k = kv.get_double(key) + kCelsiusOffset;
        else if (key == "gamma") out.gamma = kv.get_double(key);
        else if (key == "episode_steps") out.episode_steps = kv.get_int(key);
        else throw ConfigError(path + ": unknown reward/episode key '" + key + "'");
    }
    out.validate();
    return out;
}

double energy_term(double f_cool_wm2, double f_heat_wm2, const bem::BuildingParams& params) {
    const double p_ac = f_cool_wm2 / (params.cop_ac * params.peff_ac);
    const double p_heat = f_heat_wm2 / (params.cop_heat * params.peff_heat);
    return p_ac + p_heat;
}

double comfort_term(double t_indoor_k, const RewardConfig& config) {
    return std::abs(t_indoor_k - config.t_comfort_min_k) +
           std::abs(config.t_comfort_max_k - t_indoor_k);
}

double reward(double energy_term, double t_indoor_k, const RewardConfig& config) {
    return -config.w * config.lambda_p * energy_term -
           (1.0 - config.w) * config.lambda_t * comfort_term(t_indoor_k, config);
}

double episode_return(std::span<const double> rewards, double gamma) {
    // Evaluate the geometric sum back to front for one multiply per term.
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) acc = rewards[i] + gamma * acc;
    return acc;
}

SetpointCommand default_controller(const std::string& city_name) {
    const data::CityPreset& city = data::find_city(city_name);
    return {city.default_ac_k, city.default_heat_k, city.default_vent};
}

Environment::Environment(data::ForcingSeriesPtr forcing, bem::BuildingParams params,
                         RewardConfig reward)
    : forcing_(std::move(forcing)), params_(std::move(params)), config_(reward) {
    if (!forcing_) throw ConfigError("environment: null forcing series");
    params_.validate();
    config_.validate();
    if (static_cast<long>(forcing_->size()) < config_.episode_steps) {
        throw ConfigError("forcing '" + forcing_->label + "' supplies " +
                          std::to_string(forcing_->size()) + " steps, need " +
                          std::to_string(config_.episode_steps));
    }
    reset();
}

Observation Environment::reset() {
    const double t0 = forcing_->steps.front().t_canopy_k;
    state_ = bem::ThermalState{t0, t0, t0, t0, t0};
    setpoints_ = SetpointCommand{}; // HVAC-off defaults (328.15, 258.15, 0.3)
    step_index_ = 0;
    started_ = true;
    observation_ = Observation{setpoints_.ac_k, setpoints_.heat_k, setpoints_.vent, t0, t0};
    return observation_;
}

StepOutcome Environment::step(const ContinuousAction& action) {
    ContinuousAction a = action;
    const auto lo = action_lower_bounds();
    const auto hi = action_upper_bounds();
    const std::array<double*, 3> comps = {&a.ac_setpoint_c, &a.heat_setpoint_c, &a.vent};
    for (std::size_t i = 0; i < 3; ++i) {
        if (*comps[i] < lo[i] || *comps[i] > hi[i]) {
            *comps[i] = std::clamp(*comps[i], lo[i], hi[i]);
            ++clip_count_;
        }
    }
    return step(SetpointCommand{a.ac_setpoint_c + kCelsiusOffset,
                                a.heat_setpoint_c + kCelsiusOffset, a.vent});
}

StepOutcome Environment::step(const DiscreteAction& action) {
    return step(decode_discrete(action.index));
}

StepOutcome Environment::step(const SetpointCommand& command) {
    if (!started_ || done()) throw ConfigError("environment: step() on a finished episode");
    setpoints_ = command;

    const bem::HvacSetpoints sp{setpoints_.ac_k, setpoints_.heat_k, setpoints_.vent};
    sp.validate();
    const bem::ForcingStep& forcing_step = forcing_->steps[static_cast<std::size_t>(step_index_)];
    auto [next_state, fluxes] = bem::step(state_, forcing_step, sp, params_, forcing_->dt_s);
    state_ = next_state;
    ++step_index_;

    StepOutcome out;
    out.fluxes = fluxes;
    out.energy_term = energy_term(fluxes.f_cool_wm2, fluxes.f_heat_wm2, params_);
    out.comfort_term = comfort_term(state_.t_indoor_k, config_);
    out.reward = reward(out.energy_term, state_.t_indoor_k, config_);
    out.done = done();

    // The canopy component of the observation comes straight from the
    // forcing: the temperature the next step will be driven by.
    const std::size_t next_idx =
        std::min<std::size_t>(static_cast<std::size_t>(step_index_), forcing_->size() - 1);
    observation_ = Observation{setpoints_.ac_k, setpoints_.heat_k, setpoints_.vent,
                               state_.t_indoor_k, forcing_->steps[next_idx].t_canopy_k};
    out.observation = observation_;
    return out;
}

} // namespace urbanrl::env
