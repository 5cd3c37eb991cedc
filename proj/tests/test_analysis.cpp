#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "urbanrl/analysis.hpp"
#include "urbanrl/errors.hpp"
#include "urbanrl/random.hpp"

using namespace urbanrl;
using namespace urbanrl::analysis;

namespace {

TermTrace constant_trace(double energy, double comfort, std::size_t n) {
    TermTrace t;
    t.energy.assign(n, energy);
    t.comfort.assign(n, comfort);
    return t;
}

} // namespace

TEST_CASE("reward diff basics") {
    env::RewardConfig c;
    SUBCASE("identical traces give zero") {
        const TermTrace t = constant_trace(3.0, 8.0, 100);
        const auto r = reward_diff(t, t, c);
        CHECK(r.r_diff == 0.0);
    }
    SUBCASE("a uniformly one-lower comfort term is worth 0.9 at w = 0.1") {
        const TermTrace base = constant_trace(3.0, 8.0, 100);
        const TermTrace rl = constant_trace(3.0, 7.0, 100);
        const auto r = reward_diff(rl, base, c);
        CHECK(r.r_diff == doctest::Approx(0.9).epsilon(1e-12));
    }
    SUBCASE("antisymmetry") {
        Rng rng(4);
        TermTrace a, b;
        for (int i = 0; i < 500; ++i) {
            a.energy.push_back(rng.uniform(0.0, 50.0));
            a.comfort.push_back(rng.uniform(6.0, 20.0));
            b.energy.push_back(rng.uniform(0.0, 50.0));
            b.comfort.push_back(rng.uniform(6.0, 20.0));
        }
        CHECK(reward_diff(a, b, c).r_diff == doctest::Approx(-reward_diff(b, a, c).r_diff)
                                                 .epsilon(1e-12));
    }
    SUBCASE("length mismatch rejected") {
        CHECK_THROWS_AS(reward_diff(constant_trace(1, 6, 10), constant_trace(1, 6, 11), c),
                        ConfigError);
    }
    SUBCASE("monthly buckets hold 1460 steps each") {
        TermTrace rl = constant_trace(0.0, 6.0, 17520);
        const TermTrace base = constant_trace(0.0, 6.0, 17520);
        // month 3 (steps 2920..4379) one comfort unit better
        for (std::size_t i = 2920; i < 4380; ++i) rl.comfort[i] = 5.0;
        const auto r = reward_diff(rl, base, c);
        CHECK(r.monthly[2] == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(r.monthly[0] == 0.0);
        CHECK(r.monthly[11] == 0.0);
        CHECK(r.r_diff == doctest::Approx(0.9 * 1460.0 / 17520.0).epsilon(1e-12));
    }
}

TEST_CASE("reward at weight: endpoints, hand case, affinity") {
    env::RewardConfig c;
    const TermTrace t = constant_trace(4.0, 8.0, 50);
    CHECK(reward_at_weight(t, 0.0, c) == doctest::Approx(-8.0).epsilon(1e-15));
    CHECK(reward_at_weight(t, 1.0, c) == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(reward_at_weight(t, 0.5, c) == doctest::Approx(-6.0).epsilon(1e-15));
    CHECK_THROWS_AS(reward_at_weight(t, 1.5, c), ConfigError);

    SUBCASE("the sweep lies on the chord through the endpoints") {
        Rng rng(9);
        TermTrace r;
        for (int i = 0; i < 1000; ++i) {
            r.energy.push_back(rng.uniform(0.0, 80.0));
            r.comfort.push_back(rng.uniform(6.0, 25.0));
        }
        const double r0 = reward_at_weight(r, 0.0, c);
        const double r1 = reward_at_weight(r, 1.0, c);
        for (int k = 0; k <= 100; ++k) {
            const double w = k / 100.0;
            const double line = r0 + (r1 - r0) * w;
            CHECK(std::abs(reward_at_weight(r, w, c) - line) < 1e-12);
        }
    }
}

TEST_CASE("weight intersection") {
    SUBCASE("no crossing when one strategy dominates both endpoints") {
        const auto i = weight_intersection(constant_trace(2.0, 5.0, 10),
                                           constant_trace(4.0, 9.0, 10));
        CHECK(i.kind == Intersection::Kind::none);
    }
    SUBCASE("symmetric swap crosses at one half") {
        const auto i = weight_intersection(constant_trace(10.0, 4.0, 10),
                                           constant_trace(4.0, 10.0, 10));
        REQUIRE(i.kind == Intersection::Kind::point);
        CHECK(i.w == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("hand-solved crossing at 0.4") {
        const auto i = weight_intersection(constant_trace(8.0, 5.0, 10),
                                           constant_trace(2.0, 9.0, 10));
        REQUIRE(i.kind == Intersection::Kind::point);
        CHECK(i.w == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("identical lines are flagged as degenerate") {
        const auto i = weight_intersection(constant_trace(3.0, 7.0, 10),
                                           constant_trace(3.0, 7.0, 10));
        CHECK(i.kind == Intersection::Kind::identical);
    }
}

TEST_CASE("transfer scores") {
    auto matrix_of = [](std::vector<std::vector<double>> reward) {
        TransferMatrix m;
        m.cities = {"a", "b", "c", "d", "e"};
        m.reward = std::move(reward);
        return m;
    };

    SUBCASE("a model that wins everywhere totals 25") {
        TransferMatrix m = matrix_of({{-1, -1, -1, -1, -1},
                                      {-5, -4, -6, -3, -2},
                                      {-6, -5, -7, -4, -3},
                                      {-7, -6, -8, -5, -4},
                                      {-8, -7, -9, -6, -5}});
        const auto scores = transfer_score(m);
        CHECK(scores.front().model == "a");
        CHECK(scores.front().total == 25);
        CHECK(scores.back().total == 5);
    }
    SUBCASE("ties break toward the earlier model") {
        TransferMatrix m = matrix_of({{-2, -2, -2, -2, -2},
                                      {-2, -2, -2, -2, -2},
                                      {-2, -2, -2, -2, -2},
                                      {-2, -2, -2, -2, -2},
                                      {-2, -2, -2, -2, -2}});
        const auto scores = transfer_score(m);
        CHECK(scores[0].model == "a");
        CHECK(scores[0].total == 25);
        CHECK(scores[1].total == 20);
        CHECK(scores[4].total == 5);
    }
    SUBCASE("best in three cities, worst in two totals 17") {
        // model a: rank 5 in cities 0..2, rank 1 in cities 3..4
        TransferMatrix m = matrix_of({{-1, -1, -1, -9, -9},
                                      {-5, -4, -6, -3, -2},
                                      {-6, -5, -7, -4, -3},
                                      {-7, -6, -8, -5, -4},
                                      {-8, -7, -9, -6, -5}});
        const auto scores = transfer_score(m);
        for (const auto& s : scores)
            if (s.model == "a") CHECK(s.total == 5 + 5 + 5 + 1 + 1);
    }
    SUBCASE("ranking is invariant to shifting one evaluation column") {
        Rng rng(14);
        TransferMatrix m;
        m.cities = {"a", "b", "c", "d", "e"};
        m.reward.assign(5, std::vector<double>(5));
        for (auto& row : m.reward)
            for (auto& v : row) v = rng.uniform(-15.0, -5.0);
        const auto base = transfer_score(m);
        for (auto& row : m.reward) row[2] += 100.0; // shift an entire eval city
        const auto shifted = transfer_score(m);
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(base[i].model == shifted[i].model);
            CHECK(base[i].total == shifted[i].total);
        }
    }
    SUBCASE("non-finite entries rejected") {
        TransferMatrix m = matrix_of({{-1, -1, -1, -1, -1},
                                      {-5, -4, -6, -3, -2},
                                      {-6, -5, -7, -4, -3},
                                      {-7, -6, -8, -5, -4},
                                      {-8, -7, -9, -6, std::nan("")}});
        CHECK_THROWS_AS(transfer_score(m), ConfigError);
    }
}

TEST_CASE("csv reports") {
    env::RewardConfig c;
    const TermTrace rl = constant_trace(8.0, 5.0, 100);
    const TermTrace base = constant_trace(2.0, 9.0, 100);

    const char* sweep = "test_weight_sweep.csv";
    write_weight_sweep_csv(sweep, rl, base, c);
    {
        std::ifstream in(sweep);
        std::string header;
        std::getline(in, header);
        CHECK(header == "w,reward_rl,reward_baseline");
        int rows = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 101);
    }
    std::remove(sweep);
}
