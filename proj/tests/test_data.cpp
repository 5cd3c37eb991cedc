#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "urbanrl/data.hpp"
#include "urbanrl/errors.hpp"

using namespace urbanrl;
using namespace urbanrl::data;

TEST_CASE("synthetic generator: constant, deterministic, extrema") {
    SUBCASE("zero amplitudes and noise give a constant series") {
        SyntheticClimateSpec spec{288.0, 0.0, 0.0, 0.0, 0, 1};
        const ForcingSeries s = generate_synthetic(spec, 100);
        for (const auto& fs : s.steps) {
            CHECK(fs.t_canopy_k == 288.0);
            CHECK(fs.t_roof_inner_k == 288.0);
        }
    }
    SUBCASE("same seed reproduces the series") {
        SyntheticClimateSpec spec{288.0, 10.0, 4.0, 1.5, 6, 99};
        const ForcingSeries a = generate_synthetic(spec, 2000);
        const ForcingSeries b = generate_synthetic(spec, 2000);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.steps[i].t_canopy_k == b.steps[i].t_canopy_k);
            CHECK(a.steps[i].t_roof_inner_k == b.steps[i].t_roof_inner_k);
        }
    }
    SUBCASE("annual sine reaches its analytic extrema") {
        SyntheticClimateSpec spec{288.0, 10.0, 0.0, 0.0, 0, 1};
        const ForcingSeries s = generate_synthetic(spec, kStepsPerYear);
        double lo = 1e9, hi = -1e9;
        for (const auto& fs : s.steps) {
            lo = std::min(lo, fs.t_canopy_k);
            hi = std::max(hi, fs.t_canopy_k);
        }
        CHECK(lo == doctest::Approx(278.0).epsilon(1e-12));
        CHECK(hi == doctest::Approx(298.0).epsilon(1e-12));
    }
    SUBCASE("steps must be positive") {
        CHECK_THROWS_AS(generate_synthetic(SyntheticClimateSpec{}, 0), ConfigError);
    }
}

TEST_CASE("forcing csv: write then load is exact") {
    SyntheticClimateSpec spec{290.0, 8.0, 3.0, 1.0, 4, 123};
    const ForcingSeries a = generate_synthetic(spec, 500);
    const char* path = "test_forcing_roundtrip.csv";
    write_forcing_csv(a, path);
    const ForcingSeries b = load_forcing_csv(path);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b.steps[i].step_index == a.steps[i].step_index);
        CHECK(b.steps[i].t_canopy_k == a.steps[i].t_canopy_k);
        CHECK(b.steps[i].t_roof_inner_k == a.steps[i].t_roof_inner_k);
        CHECK(b.steps[i].t_sunwall_inner_k == a.steps[i].t_sunwall_inner_k);
        CHECK(b.steps[i].t_shadewall_inner_k == a.steps[i].t_shadewall_inner_k);
    }
    std::remove(path);
}

TEST_CASE("forcing csv: strict schema") {
    const char* path = "test_forcing_bad.csv";
    SUBCASE("out-of-range value names the row") {
        std::ofstream out(path);
        out << "step,t_canopy_k,t_roof_inner_k,t_sunwall_inner_k,t_shadewall_inner_k\n";
        out << "0,290,290,290,290\n";
        out << "1,-10,290,290,290\n";
        out.close();
        CHECK_THROWS_WITH_AS(load_forcing_csv(path), doctest::Contains(":3"), IoError);
    }
    SUBCASE("extra column rejected") {
        std::ofstream out(path);
        out << "step,t_canopy_k,t_roof_inner_k,t_sunwall_inner_k,t_shadewall_inner_k,extra\n";
        out << "0,290,290,290,290,1\n";
        out.close();
        CHECK_THROWS_AS(load_forcing_csv(path), IoError);
    }
    SUBCASE("non-increasing step index rejected") {
        std::ofstream out(path);
        out << "step,t_canopy_k,t_roof_inner_k,t_sunwall_inner_k,t_shadewall_inner_k\n";
        out << "0,290,290,290,290\n";
        out << "0,291,290,290,290\n";
        out.close();
        CHECK_THROWS_AS(load_forcing_csv(path), IoError);
    }
    SUBCASE("nan rejected") {
        std::ofstream out(path);
        out << "step,t_canopy_k,t_roof_inner_k,t_sunwall_inner_k,t_shadewall_inner_k\n";
        out << "0,nan,290,290,290\n";
        out.close();
        CHECK_THROWS_AS(load_forcing_csv(path), IoError);
    }
    std::remove(path);
}

TEST_CASE("city presets") {
    const auto& presets = city_presets();
    REQUIRE(presets.size() == 5);

    CHECK(find_city("singapore").default_ac_k == 380.00);
    CHECK(find_city("london").default_ac_k == 380.00);
    CHECK(find_city("london").default_heat_k == 290.10);
    CHECK(find_city("newyork").default_ac_k == 310.00);
    CHECK(find_city("newyork").default_heat_k == 285.10);
    CHECK(find_city("beijing").default_ac_k == 310.00);
    CHECK(find_city("hongkong").default_ac_k == 310.10);
    CHECK(find_city("hongkong").default_heat_k == 290.10);
    CHECK(find_city("singapore").default_heat_k == 285.10);
    for (const auto& c : presets) CHECK(c.default_vent == 0.3);

    // regime ordering: temperate cities swing harder than the tropics
    CHECK(find_city("london").climate.annual_amplitude_k >
          find_city("singapore").climate.annual_amplitude_k);

    CHECK_THROWS_AS(find_city("atlantis"), ConfigError);
}

TEST_CASE("train and eval years differ but are reproducible") {
    const auto& city = find_city("beijing");
    const ForcingSeries t1 = city_train_forcing(city, 200);
    const ForcingSeries t2 = city_train_forcing(city, 200);
    const ForcingSeries e1 = city_eval_forcing(city, 200);
    CHECK(t1.steps[10].t_canopy_k == t2.steps[10].t_canopy_k);
    bool any_diff = false;
    for (std::size_t i = 0; i < t1.size(); ++i)
        any_diff |= (t1.steps[i].t_canopy_k != e1.steps[i].t_canopy_k);
    CHECK(any_diff);
}
