#include "urbanrl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "urbanrl/errors.hpp"
#include "urbanrl/numfmt.hpp"
#include "urbanrl/random.hpp"

namespace urbanrl::data {

namespace {

constexpr const char* kCsvHeader =
    "step,t_canopy_k,t_roof_inner_k,t_sunwall_inner_k,t_shadewall_inner_k";

double checked_temp(double v, const std::string& path, std::size_t lineno, const char* col) {
    if (!(std::isfinite(v) && v >= bem::kTempFloorK && v <= bem::kTempCeilK)) {
        throw IoError(path + ":" + std::to_string(lineno) + ": " + col + " = " +
                      std::to_string(v) + " K outside [150, 400] K");
    }
    return v;
}

} // namespace

ForcingSeries load_forcing_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open forcing file '" + path + "'");

    ForcingSeries series;
    series.label = path;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    ++lineno;
    if (std::string(trim(line)) != kCsvHeader) {
        throw IoError(path + ":1: expected header '" + std::string(kCsvHeader) + "', got '" +
                      std::string(trim(line)) + "'");
    }

    long prev_step = -1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view l = trim(line);
        if (l.empty()) continue;
        auto cols = split(l, ',');
        if (cols.size() != 5) {
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 5 columns, got " +
                          std::to_string(cols.size()));
        }
        const std::string ctx = path + ":" + std::to_string(lineno);
        bem::ForcingStep fs;
        fs.step_index = static_cast<long>(parse_int(cols[0], ctx + " column 'step'"));
        if (fs.step_index <= prev_step) {
            throw IoError(ctx + ": step indices must be strictly increasing");
        }
        prev_step = fs.step_index;
        fs.t_canopy_k = checked_temp(parse_double(cols[1], ctx), path, lineno, "t_canopy_k");
        fs.t_roof_inner_k = checked_temp(parse_double(cols[2], ctx), path, lineno, "t_roof_inner_k");
        fs.t_sunwall_inner_k =
            checked_temp(parse_double(cols[3], ctx), path, lineno, "t_sunwall_inner_k");
        fs.t_shadewall_inner_k =
            checked_temp(parse_double(cols[4], ctx), path, lineno, "t_shadewall_inner_k");
        series.steps.push_back(fs);
    }
    if (series.steps.empty()) throw IoError(path + ": no data rows");
    return series;
}

void write_forcing_csv(const ForcingSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // LF endings on every platform
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << kCsvHeader << "\n";
    for (const auto& fs : series.steps) {
        out << fs.step_index << ',' << format_double(fs.t_canopy_k) << ','
            << format_double(fs.t_roof_inner_k) << ',' << format_double(fs.t_sunwall_inner_k)
            << ',' << format_double(fs.t_shadewall_inner_k) << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void SyntheticClimateSpec::validate() const {
    if (!(annual_amplitude_k >= 0.0)) throw ConfigError("annual_amplitude_k must be >= 0");
    if (!(diurnal_amplitude_k >= 0.0)) throw ConfigError("diurnal_amplitude_k must be >= 0");
    if (!(noise_std_k >= 0.0)) throw ConfigError("noise_std_k must be >= 0");
    if (inner_node_lag_steps < 0) throw ConfigError("inner_node_lag_steps must be >= 0");
}

ForcingSeries generate_synthetic(const SyntheticClimateSpec& spec, std::size_t steps) {
    spec.validate();
    if (steps < 1) throw ConfigError("generate_synthetic: steps must be >= 1");

    Rng rng(spec.seed);
    const double annual_w = 2.0 * M_PI / static_cast<double>(kStepsPerYear);
    const double diurnal_w = 2.0 * M_PI / static_cast<double>(kStepsPerDay);

    std::vector<double> canopy(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        double t = spec.mean_k + spec.annual_amplitude_k * std::sin(annual_w * double(k)) +
                   spec.diurnal_amplitude_k * std::sin(diurnal_w * double(k));
        if (spec.noise_std_k > 0.0) t += spec.noise_std_k * rng.normal();
        canopy[k] = std::clamp(t, bem::kTempFloorK, bem::kTempCeilK);
    }

    // Trailing one-day average of the canopy series.
    std::vector<double> smoothed(steps);
    double window_sum = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        window_sum += canopy[k];
        if (k >= static_cast<std::size_t>(kStepsPerDay)) window_sum -= canopy[k - kStepsPerDay];
        const std::size_t n = std::min<std::size_t>(k + 1, kStepsPerDay);
        smoothed[k] = window_sum / double(n);
    }

    ForcingSeries series;
    series.label = "synthetic seed=" + std::to_string(spec.seed);
    series.steps.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        auto& fs = series.steps[k];
        fs.step_index = static_cast<long>(k);
        fs.t_canopy_k = canopy[k];
        const std::size_t lagged =
            (static_cast<long>(k) >= spec.inner_node_lag_steps)
                ? k - static_cast<std::size_t>(spec.inner_node_lag_steps)
                : 0;
        const double inner = smoothed[lagged];
        fs.t_roof_inner_k = inner;
        fs.t_sunwall_inner_k = inner;
        fs.t_shadewall_inner_k = inner;
    }
    return series;
}

const std::vector<CityPreset>& city_presets() {
    // Default set points follow the host climate model's per-city settings;
    // the climate specs are temperature-regime stand-ins, not observed data.
    static const std::vector<CityPreset> presets = {
        {"london", 51.51, 380.00, 290.10, 0.3, {284.0, 7.0, 3.0, 1.0, 6, 101}},
        {"newyork", 40.71, 310.00, 285.10, 0.3, {285.0, 12.0, 5.0, 1.0, 6, 102}},
        {"beijing", 39.90, 310.00, 285.10, 0.3, {286.0, 15.0, 6.0, 1.0, 6, 103}},
        {"hongkong", 22.32, 310.10, 290.10, 0.3, {296.0, 6.0, 3.0, 1.0, 6, 104}},
        {"singapore", 1.35, 380.00, 285.10, 0.3, {300.5, 1.0, 2.0, 1.0, 6, 105}},
    };
    return presets;
}

const CityPreset& find_city(const std::string& name) {
    for (const auto& c : city_presets())
        if (c.name == name) return c;
    std::string valid;
    for (const auto& c : city_presets()) {
        if (!valid.empty()) valid += ", ";
        valid += c.name;
    }
    throw ConfigError("unknown city '" + name + "' (valid: " + valid + ")");
}

ForcingSeries city_train_forcing(const CityPreset& city, std::size_t steps) {
    ForcingSeries s = generate_synthetic(city.climate, steps);
    s.label = city.name + "/train";
    s.year_tag = 1;
    return s;
}

ForcingSeries city_eval_forcing(const CityPreset& city, std::size_t steps) {
    SyntheticClimateSpec spec = city.climate;
    spec.seed += 7919; // distinct held-out year
    ForcingSeries s = generate_synthetic(spec, steps);
    s.label = city.name + "/eval";
    s.year_tag = 2;
    return s;
}

} // namespace urbanrl::data
