#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "urbanrl/env.hpp"
#include "urbanrl/random.hpp"

namespace urbanrl::agents {

/// Rounds each observation component (ventilation scaled by 10) and packs
/// the five integers into one key with base-1000 digits, lowest component
/// first. Throws when a rounded component leaves [0, 999].
std::int64_t encode_state(const env::Observation& obs);

/// min_eps + (max_eps - min_eps) * exp(-decay * epoch).
double epsilon_exponential(long epoch, double max_eps = 1.0, double min_eps = 0.01,
                           double decay = 0.01);

/// Epsilon-greedy over a Q row; greedy ties go to the lowest index.
int epsilon_greedy(const std::array<double, 8>& q_row, double eps, Rng& rng);
int argmax_action(const std::array<double, 8>& q_row);

struct QLearningConfig {
    double alpha = 0.1;
    double gamma = 0.99;
    double max_eps = 1.0;
    double min_eps = 0.01;
    double decay = 0.01;
};

// Sparse tabular Q function over encoded states; unseen states read as
// zero vectors.
class QTable {
public:
    static constexpr int kActions = 8;

    std::array<double, 8> row(std::int64_t key) const;
    void set_row(std::int64_t key, const std::array<double, 8>& values) { table_[key] = values; }
    std::size_t size() const { return table_.size(); }

    int greedy_action(std::int64_t key) const;

    /// Text dump, one line per state: "key a0 a1 ... a7", sorted by key.
    void save(const std::string& path) const;
    static QTable load(const std::string& path);

    friend void q_update(QTable& table, std::int64_t s, int a, double r,
                         std::optional<std::int64_t> s_next, double alpha, double gamma);

private:
    std::unordered_map<std::int64_t, std::array<double, 8>> table_;
};

/// One tabular update toward r + gamma * max_a' Q(s', a'); terminal
/// next states (nullopt) bootstrap with zero.
void q_update(QTable& table, std::int64_t s, int a, double r, std::optional<std::int64_t> s_next,
              double alpha, double gamma);

class QLearningAgent {
public:
    QLearningAgent(QLearningConfig cfg, std::uint64_t seed);

    /// Epsilon-greedy with the per-epoch exponential schedule.
    int act(const env::Observation& obs, long episode_index);
    int greedy_action(const env::Observation& obs) const;

    void observe(const env::Observation& obs, int action, double reward,
                 const env::Observation& next_obs, bool done);

    const QTable& table() const { return table_; }
    QTable& table() { return table_; }
    const QLearningConfig& config() const { return cfg_; }

private:
    QLearningConfig cfg_;
    QTable table_;
    Rng rng_;
};

} // namespace urbanrl::agents
