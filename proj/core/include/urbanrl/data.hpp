#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "urbanrl/bem.hpp"

namespace urbanrl::data {

inline constexpr long kStepsPerYear = 17520;  // half-hour steps
inline constexpr long kStepsPerDay = 48;

struct ForcingSeries {
    std::vector<bem::ForcingStep> steps;
    double dt_s = bem::kDefaultDtSeconds;
    std::string label;
    int year_tag = 0;

    std::size_t size() const { return steps.size(); }
};

using ForcingSeriesPtr = std::shared_ptr<const ForcingSeries>;

/// Strict loader for `step,t_canopy_k,t_roof_inner_k,t_sunwall_inner_k,t_shadewall_inner_k`.
/// Rejects unknown columns, out-of-range values and non-increasing steps,
/// naming the offending line.
ForcingSeries load_forcing_csv(const std::string& path);

void write_forcing_csv(const ForcingSeries& series, const std::string& path);

// Desk-scale stand-in for reanalysis forcing: an annual and a diurnal
// sine on top of a mean, plus Gaussian noise. Inner-node temperatures
// are the canopy series delayed by a fixed lag and smoothed with a
// 48-step (one day) trailing average.
struct SyntheticClimateSpec {
    double mean_k = 288.0;
    double annual_amplitude_k = 10.0;
    double diurnal_amplitude_k = 4.0;
    double noise_std_k = 1.0;
    long inner_node_lag_steps = 6;
    std::uint64_t seed = 0;

    void validate() const;
};

ForcingSeries generate_synthetic(const SyntheticClimateSpec& spec, std::size_t steps);

struct CityPreset {
    std::string name;
    double latitude_deg = 0.0;
    double default_ac_k = 0.0;
    double default_heat_k = 0.0;
    double default_vent = 0.3;
    SyntheticClimateSpec climate;
};

/// The five presets, fixed order: london, newyork, beijing, hongkong, singapore.
const std::vector<CityPreset>& city_presets();

/// Throws ConfigError listing valid names for an unknown city.
const CityPreset& find_city(const std::string& name);

/// Training-year forcing for a preset (fixed per-city seed).
ForcingSeries city_train_forcing(const CityPreset& city, std::size_t steps = kStepsPerYear);
/// Held-out evaluation year (different fixed seed).
ForcingSeries city_eval_forcing(const CityPreset& city, std::size_t steps = kStepsPerYear);

} // namespace urbanrl::data
