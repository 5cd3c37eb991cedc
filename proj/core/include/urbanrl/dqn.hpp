#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urbanrl/env.hpp"
#include "urbanrl/nn.hpp"
#include "urbanrl/replay.hpp"

namespace urbanrl::agents {

/// Linear decay from start to end over the first `fraction` of total steps.
double epsilon_linear(long step, long total_steps, double start = 1.0, double end = 0.05,
                      double fraction = 0.5);

struct DqnConfig {
    int obs_dim = 5;
    int n_actions = 8;
    int hidden = 128;
    double lr = 2.5e-4;
    double gamma = 0.99;
    std::size_t buffer_capacity = 10000;
    int batch_size = 100;
    double tau = 1.0; // hard copy
    long learning_start = 10000;
    int train_every = 10;
    int target_update_every = 500;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double exploration_fraction = 0.5;
    long total_steps = 876000; // schedule horizon; trainer sets episodes * episode length
};

/// y_i = r_i + gamma * max_a' Q_target(s'_i, a'); terminal transitions use r_i.
std::vector<double> dqn_td_target(const std::vector<const Transition*>& batch,
                                  const nn::Mlp& target_net, double gamma);

class DqnAgent {
public:
    DqnAgent(DqnConfig cfg, std::uint64_t seed);

    /// Uniform random before learning starts, then epsilon-greedy with the
    /// linear schedule.
    int act(const env::Observation& obs, long global_step);
    int greedy_action(const env::Observation& obs) const;

    void observe(const Transition& t) { buffer_.push(t); }

    /// One TD regression step when the schedule says so, else no-op
    /// (returns nullopt; skip_reason() tells why).
    std::optional<double> train_step(long global_step);

    /// Mean-squared TD regression on an explicit batch/target pair.
    double train_on_batch(const std::vector<const Transition*>& batch,
                          const std::vector<double>& targets);

    const nn::Mlp& q_network() const { return q_; }
    const nn::Mlp& target_network() const { return target_; }
    const DqnConfig& config() const { return cfg_; }
    ReplayBuffer& buffer() { return buffer_; }
    const std::string& skip_reason() const { return skip_reason_; }

    void save(const std::string& path) const;
    static DqnAgent load(const std::string& path, std::uint64_t seed);

private:
    DqnConfig cfg_;
    Rng rng_; // must precede the networks: it drives their initialization
    nn::Mlp q_, target_;
    nn::AdamState opt_;
    ReplayBuffer buffer_;
    std::string skip_reason_;
    // scratch
    std::vector<const Transition*> batch_;
};

} // namespace urbanrl::agents
