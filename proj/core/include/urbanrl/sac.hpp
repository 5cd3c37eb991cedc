#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "urbanrl/env.hpp"
#include "urbanrl/nn.hpp"
#include "urbanrl/replay.hpp"

namespace urbanrl::agents {

struct SacScratch; // reusable training buffers (internal)

// Squashed-Gaussian action head: the policy trunk emits mean and raw
// log-std per dimension; log-std is squashed into [log_std_min,
// log_std_max], samples go through tanh and an affine rescale into the
// action bounds.
struct GaussianHead {
    std::vector<double> low, high;
    double log_std_min = -5.0;
    double log_std_max = 2.0;

    int dim() const { return static_cast<int>(low.size()); }
    double scale(int d) const { return 0.5 * (high[d] - low[d]); }
    double bias(int d) const { return 0.5 * (high[d] + low[d]); }
    double squash_log_std(double raw) const;
};

inline constexpr double kSquashEps = 1e-6; // keeps the tanh Jacobian log finite

/// The standard 3-dimensional HVAC head over the paper's action intervals.
GaussianHead hvac_action_head();

struct SampledAction {
    std::vector<double> action;   // env units
    std::vector<double> pre_tanh; // u
    std::vector<double> mean, log_std, noise;
    double log_prob = 0.0; // density of `action`, tanh-Jacobian included
};

/// Samples from the head given the trunk output (2*dim values). With
/// deterministic set, uses the mean and consumes no randomness.
SampledAction sample_head(const GaussianHead& head, std::span<const double> trunk_out, Rng* rng,
                          bool deterministic);

/// Policy sample for an observation; squashes and rescales into the HVAC
/// action bounds.
SampledAction sac_sample_action(const nn::Mlp& policy, const env::Observation& obs, Rng& rng,
                                bool deterministic);

/// y_i = r_i + gamma * (min_j Q_j'(s_i', a_i') - alpha * log pi(a_i'|s_i'))
/// with a_i' freshly sampled; terminal transitions return r_i.
std::vector<double> sac_targets(const std::vector<const Transition*>& batch,
                                const nn::Mlp& q1_target, const nn::Mlp& q2_target,
                                const nn::Mlp& policy, const GaussianHead& head, double alpha,
                                double gamma, Rng& rng);

struct SacConfig {
    int obs_dim = 5;
    int action_dim = 3;
    int hidden = 256;
    double q_lr = 1e-3;
    double policy_lr = 3e-4;
    double gamma = 0.99;
    std::size_t buffer_capacity = 1000000;
    int batch_size = 256;
    double tau = 0.005;
    long learning_start = 5000;
    int policy_update_every = 2;
    int target_update_every = 1;
    double alpha_init = 0.2;
    bool autotune_alpha = true;
    double target_entropy = -3.0; // negative action dimensionality
    double log_std_min = -5.0;
    double log_std_max = 2.0;
};

class SacAgent {
public:
    SacAgent(SacConfig cfg, std::uint64_t seed);
    ~SacAgent();
    SacAgent(SacAgent&&) noexcept;
    SacAgent& operator=(SacAgent&&) noexcept;

    /// Stochastic sample during training, mean action when deterministic.
    env::ContinuousAction act(const env::Observation& obs, bool deterministic = false);

    void observe(const Transition& t) { buffer_.push(t); }

    struct Losses {
        double q_loss = 0.0; // sum of the two critic losses
        double policy_loss = 0.0;
        double alpha_loss = 0.0;
        bool policy_updated = false;
    };

    /// Critic step every call past learning_start; policy/temperature and
    /// target updates on their own schedules. No-op (nullopt) before
    /// learning starts or while the buffer is underfull.
    std::optional<Losses> train_step(long global_step);

    /// Mean-squared regression of both critics toward fixed targets.
    double q_train_on_batch(const std::vector<const Transition*>& batch,
                            const std::vector<double>& targets);

    double alpha() const;
    const nn::Mlp& policy() const { return policy_; }
    const nn::Mlp& q1() const { return q1_; }
    const nn::Mlp& q2() const { return q2_; }
    const nn::Mlp& q1_target() const { return q1_target_; }
    const nn::Mlp& q2_target() const { return q2_target_; }
    const GaussianHead& head() const { return head_; }
    const SacConfig& config() const { return cfg_; }
    ReplayBuffer& buffer() { return buffer_; }

private:
    double critics_update(const std::vector<const Transition*>& batch,
                          const std::vector<double>& targets, bool with_policy_forward);
    void policy_and_alpha_update(const std::vector<const Transition*>& batch, Losses& out);

    SacConfig cfg_;
    GaussianHead head_;
    Rng rng_;
    nn::Mlp q1_, q2_, q1_target_, q2_target_, policy_;
    nn::AdamState q1_opt_, q2_opt_, policy_opt_;
    double log_alpha_ = 0.0;
    nn::ScalarAdam alpha_opt_;
    ReplayBuffer buffer_;
    std::vector<const Transition*> batch_;
    std::unique_ptr<SacScratch> scratch_;
};

} // namespace urbanrl::agents
