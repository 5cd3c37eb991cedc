#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "urbanrl/agents.hpp"
#include "urbanrl/analysis.hpp"
#include "urbanrl/data.hpp"
#include "urbanrl/env.hpp"
#include "urbanrl/policy_io.hpp"

namespace urbanrl::train {

/// Maps an observation to raw setpoints; the form every evaluation path
/// (default controller, Q-table, DQN, SAC artifact) reduces to.
using Controller = std::function<env::SetpointCommand(const env::Observation&)>;

Controller make_default_controller(const std::string& city);
Controller make_qtable_controller(agents::QTable table);
Controller make_dqn_controller(nn::Mlp q_network);
Controller make_policy_controller(policy_io::PolicyArtifact artifact);

struct RunConfig {
    std::string agent_kind;      // qlearning | dqn | sac
    std::string city;            // preset name; forcing paths override when set
    std::string forcing_path;
    std::string eval_forcing_path;
    int episodes = 50;
    int eval_episodes = 3;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool deterministic_eval = true;

    env::RewardConfig reward;
    bem::BuildingParams building;
    agents::QLearningConfig qlearning;
    agents::DqnConfig dqn;
    agents::SacConfig sac;

    void validate() const;
};

struct EpisodeLog {
    int episode = 0;          // 1-based
    double episode_return = 0.0; // undiscounted sum
    double mean_reward = 0.0;
    long steps = 0; // cumulative global steps
    double seconds = 0.0; // wall time of the episode
};

struct RunLog {
    std::vector<EpisodeLog> episodes;
    double eval_mean = 0.0;
    double eval_std = 0.0;
    long total_steps = 0;
    double wall_seconds = 0.0;
    std::string checkpoint_path;
    std::string artifact_path; // SAC only
};

struct EvalResult {
    double mean_reward = 0.0;
    double std_reward = 0.0;
    std::vector<double> episode_means;
    analysis::TermTrace trace; // per-step terms of the first episode
    std::vector<double> rewards; // per-step rewards of the first episode
};

/// Deterministic rollouts of a controller; mean/std of per-step mean reward
/// across episodes plus the term traces the analysis module consumes.
EvalResult evaluate(const Controller& controller, const data::ForcingSeries& forcing,
                    const bem::BuildingParams& building, const env::RewardConfig& reward,
                    int episodes);

/// Trains the configured agent, writes runlog.csv, the checkpoint (plus the
/// policy artifact for SAC) and eval.csv into out_dir, and returns the log.
RunLog train_run(const RunConfig& config);

/// runlog.csv: '#' metadata line, then episode,return,mean_reward,steps,seconds.
void write_runlog_csv(const std::string& path, const RunConfig& config, const RunLog& log);

} // namespace urbanrl::train
