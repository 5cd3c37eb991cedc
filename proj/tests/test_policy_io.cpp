#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "urbanrl/errors.hpp"
#include "urbanrl/policy_io.hpp"
#include "urbanrl/sac.hpp"

using namespace urbanrl;
using namespace urbanrl::policy_io;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("artifact round trip is bit exact") {
    agents::SacAgent agent(agents::SacConfig{}, 31);
    const PolicyArtifact a = make_artifact(agent);

    // trained policy trunk: 5 -> 256 -> 256 -> (3 mean + 3 log-std)
    CHECK(a.dims == std::vector<int>{5, 256, 256, 6});
    CHECK(a.action_low == std::vector<double>{25.0, 10.0, 0.3});
    CHECK(a.action_high == std::vector<double>{35.0, 20.0, 0.5});

    const char* path = "test_policy.sacpolicy";
    save_policy(a, path);
    const PolicyArtifact b = load_policy(path);
    CHECK(b.dims == a.dims);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(b.layers[l].w == a.layers[l].w);
        CHECK(b.layers[l].b == a.layers[l].b);
    }
    CHECK(b.action_low == a.action_low);
    CHECK(b.action_high == a.action_high);

    // a second save of the loaded artifact reproduces the bytes
    const char* path2 = "test_policy2.sacpolicy";
    save_policy(b, path2);
    CHECK(slurp(path) == slurp(path2));
    std::remove(path);
    std::remove(path2);
}

TEST_CASE("dimension mismatches are load errors") {
    const char* path = "test_policy_bad.sacpolicy";
    {
        std::ofstream out(path);
        out << "SACPOLICY 1\n";
        out << "2 3 2\n";
        out << "1 2\n"; // row 0 of a 3x2 layer
        out << "3 4\n";
        // missing third row: header said 3 outputs
        out << "0 0 0\n";
    }
    CHECK_THROWS_AS(load_policy(path), IoError);
    {
        std::ofstream out(path);
        out << "NOTAPOLICY 1\n";
    }
    CHECK_THROWS_AS(load_policy(path), IoError);
    std::remove(path);
}

TEST_CASE("matmul inference agrees with the agent's deterministic path") {
    agents::SacAgent agent(agents::SacConfig{}, 77);
    const PolicyArtifact artifact = make_artifact(agent);
    Rng rng(78);
    double max_diff = 0.0;
    for (int i = 0; i < 100; ++i) {
        env::Observation obs{rng.uniform(298.0, 309.0), rng.uniform(283.0, 294.0),
                             rng.uniform(0.3, 0.5), rng.uniform(260.0, 320.0),
                             rng.uniform(250.0, 320.0)};
        const env::ContinuousAction via_artifact = matmul_inference(artifact, obs);
        Rng unused(0);
        const agents::SampledAction via_agent =
            agents::sac_sample_action(agent.policy(), obs, unused, /*deterministic=*/true);
        max_diff = std::max(max_diff, std::abs(via_artifact.ac_setpoint_c - via_agent.action[0]));
        max_diff = std::max(max_diff, std::abs(via_artifact.heat_setpoint_c - via_agent.action[1]));
        max_diff = std::max(max_diff, std::abs(via_artifact.vent - via_agent.action[2]));
    }
    CHECK(max_diff < 1e-9);
}

TEST_CASE("zero-weight artifact reduces to the bias path, inside bounds") {
    agents::SacAgent agent(agents::SacConfig{}, 5);
    PolicyArtifact a = make_artifact(agent);
    for (auto& layer : a.layers) layer.w.setZero();
    a.layers[0].b.setZero();
    a.layers[1].b.setZero();

    const env::ContinuousAction act = matmul_inference(a, env::Observation{});
    const double mean0 = a.layers[2].b(0);
    CHECK(act.ac_setpoint_c == doctest::Approx(5.0 * std::tanh(mean0) + 30.0).epsilon(1e-12));
    CHECK(act.ac_setpoint_c >= 25.0);
    CHECK(act.ac_setpoint_c <= 35.0);
    CHECK(act.heat_setpoint_c >= 10.0);
    CHECK(act.heat_setpoint_c <= 20.0);
    CHECK(act.vent >= 0.3);
    CHECK(act.vent <= 0.5);
}

TEST_CASE("golden artifact stays parseable and stable") {
    // Small fixed-seed policy committed under tests/golden; regenerating it
    // must reproduce the same bytes.
    const std::string golden = std::string(URBANRL_TEST_DIR) + "/golden/tiny.sacpolicy";
    const PolicyArtifact a = load_policy(golden);
    CHECK(a.dims == std::vector<int>{5, 8, 8, 6});
    CHECK(a.action_low == std::vector<double>{25.0, 10.0, 0.3});

    const char* copy = "test_golden_copy.sacpolicy";
    save_policy(a, copy);
    CHECK(slurp(copy) == slurp(golden));
    std::remove(copy);

    // spot values frozen at generation time
    const env::ContinuousAction act = matmul_inference(a, env::Observation{});
    CHECK(act.ac_setpoint_c >= 25.0);
    CHECK(act.ac_setpoint_c <= 35.0);
}
