#include "urbanrl/train.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>

#include "urbanrl/errors.hpp"
#include "urbanrl/numfmt.hpp"

namespace urbanrl::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

data::ForcingSeriesPtr resolve_forcing(const RunConfig& cfg, bool eval) {
    const std::string& path = eval ? cfg.eval_forcing_path : cfg.forcing_path;
    if (!path.empty())
        return std::make_shared<data::ForcingSeries>(data::load_forcing_csv(path));
    const auto& city = data::find_city(cfg.city);
    const auto steps = static_cast<std::size_t>(cfg.reward.episode_steps);
    return std::make_shared<data::ForcingSeries>(eval ? data::city_eval_forcing(city, steps)
                                                      : data::city_train_forcing(city, steps));
}

agents::Transition make_transition(const env::Observation& obs,
                                   const std::array<double, 3>& action, int action_index,
                                   const env::StepOutcome& outcome) {
    agents::Transition t;
    t.obs = obs.as_array();
    t.action = action;
    t.action_index = action_index;
    t.reward = outcome.reward;
    t.next_obs = outcome.observation.as_array();
    t.done = outcome.done;
    return t;
}

struct EpisodeStats {
    double sum_reward = 0.0;
    long steps = 0;
};

} // namespace

Controller make_default_controller(const std::string& city) {
    const env::SetpointCommand cmd = env::default_controller(city);
    return [cmd](const env::Observation&) { return cmd; };
}

Controller make_qtable_controller(agents::QTable table) {
    return [table = std::move(table)](const env::Observation& obs) {
        return env::decode_discrete(table.greedy_action(agents::encode_state(obs)));
    };
}

Controller make_dqn_controller(nn::Mlp q_network) {
    return [net = std::move(q_network)](const env::Observation& obs) {
        const auto arr = obs.as_array();
        const Eigen::VectorXd q = forward(net, Eigen::Map<const Eigen::VectorXd>(arr.data(), 5));
        Eigen::Index best = 0;
        q.maxCoeff(&best);
        return env::decode_discrete(static_cast<int>(best));
    };
}

Controller make_policy_controller(policy_io::PolicyArtifact artifact) {
    return [artifact = std::move(artifact)](const env::Observation& obs) {
        const env::ContinuousAction a = policy_io::matmul_inference(artifact, obs);
        return env::SetpointCommand{a.ac_setpoint_c + 273.15, a.heat_setpoint_c + 273.15, a.vent};
    };
}

void RunConfig::validate() const {
    if (agent_kind != "qlearning" && agent_kind != "dqn" && agent_kind != "sac")
        throw ConfigError("unknown agent '" + agent_kind + "' (valid: qlearning, dqn, sac)");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
    if (city.empty() && forcing_path.empty())
        throw ConfigError("either a city preset or a forcing file is required");
    reward.validate();
    building.validate();
}

EvalResult evaluate(const Controller& controller, const data::ForcingSeries& forcing,
                    const bem::BuildingParams& building, const env::RewardConfig& reward,
                    int episodes) {
    if (episodes < 1) throw ConfigError("evaluate: episodes must be >= 1");
    auto forcing_ptr = std::make_shared<data::ForcingSeries>(forcing);
    env::Environment environment(forcing_ptr, building, reward);

    EvalResult out;
    for (int ep = 0; ep < episodes; ++ep) {
        env::Observation obs = environment.reset();
        double sum = 0.0;
        long steps = 0;
        const bool record = (ep == 0);
        while (!environment.done()) {
            const env::StepOutcome outcome = environment.step(controller(obs));
            obs = outcome.observation;
            sum += outcome.reward;
            ++steps;
            if (record) {
                out.trace.energy.push_back(outcome.energy_term);
                out.trace.comfort.push_back(outcome.comfort_term);
                out.rewards.push_back(outcome.reward);
            }
        }
        out.episode_means.push_back(sum / static_cast<double>(steps));
    }
    double mean = 0.0;
    for (const double m : out.episode_means) mean += m;
    mean /= static_cast<double>(out.episode_means.size());
    double var = 0.0;
    for (const double m : out.episode_means) var += (m - mean) * (m - mean);
    var /= static_cast<double>(out.episode_means.size());
    out.mean_reward = mean;
    out.std_reward = std::sqrt(var);
    return out;
}

RunLog train_run(const RunConfig& config) {
    config.validate();
    const auto t0 = Clock::now();

    auto train_forcing = resolve_forcing(config, /*eval=*/false);
    auto eval_forcing = resolve_forcing(config, /*eval=*/true);
    env::Environment environment(train_forcing, config.building, config.reward);

    std::unique_ptr<agents::QLearningAgent> qagent;
    std::unique_ptr<agents::DqnAgent> dqn;
    std::unique_ptr<agents::SacAgent> sac;
    if (config.agent_kind == "qlearning") {
        qagent = std::make_unique<agents::QLearningAgent>(config.qlearning, config.seed);
    } else if (config.agent_kind == "dqn") {
        agents::DqnConfig c = config.dqn;
        c.total_steps = static_cast<long>(config.episodes) * config.reward.episode_steps;
        dqn = std::make_unique<agents::DqnAgent>(c, config.seed);
    } else {
        sac = std::make_unique<agents::SacAgent>(config.sac, config.seed);
    }

    RunLog log;
    long global_step = 0;
    for (int ep = 0; ep < config.episodes; ++ep) {
        const auto ep_t0 = Clock::now();
        env::Observation obs = environment.reset();
        EpisodeStats stats;
        while (!environment.done()) {
            env::StepOutcome outcome;
            if (qagent) {
                const int a = qagent->act(obs, ep);
                outcome = environment.step(env::DiscreteAction{a});
                qagent->observe(obs, a, outcome.reward, outcome.observation, outcome.done);
            } else if (dqn) {
                const int a = dqn->act(obs, global_step);
                outcome = environment.step(env::DiscreteAction{a});
                dqn->observe(make_transition(obs, {}, a, outcome));
                dqn->train_step(global_step);
            } else {
                const env::ContinuousAction a = sac->act(obs, /*deterministic=*/false);
                outcome = environment.step(a);
                sac->observe(make_transition(obs, a.as_array(), 0, outcome));
                sac->train_step(global_step);
            }
            obs = outcome.observation;
            stats.sum_reward += outcome.reward;
            ++stats.steps;
            ++global_step;
        }
        EpisodeLog el;
        el.episode = ep + 1;
        el.episode_return = stats.sum_reward;
        el.mean_reward = stats.sum_reward / static_cast<double>(stats.steps);
        el.steps = global_step;
        el.seconds = seconds_since(ep_t0);
        log.episodes.push_back(el);
    }
    log.total_steps = global_step;

    // Checkpoints
    std::filesystem::create_directories(config.out_dir);
    Controller eval_controller;
    if (qagent) {
        log.checkpoint_path = config.out_dir + "/qtable.txt";
        qagent->table().save(log.checkpoint_path);
        eval_controller = make_qtable_controller(qagent->table());
    } else if (dqn) {
        log.checkpoint_path = config.out_dir + "/dqn_qnet.txt";
        dqn->save(log.checkpoint_path);
        eval_controller = make_dqn_controller(dqn->q_network());
    } else {
        const auto artifact = policy_io::make_artifact(*sac);
        log.artifact_path = config.out_dir + "/policy.sacpolicy";
        log.checkpoint_path = log.artifact_path;
        policy_io::save_policy(artifact, log.artifact_path);
        // Deterministic mean action; shares the agent's forward path.
        agents::SacAgent* raw = sac.get();
        eval_controller = [raw](const env::Observation& o) {
            const env::ContinuousAction a = raw->act(o, /*deterministic=*/true);
            return env::SetpointCommand{a.ac_setpoint_c + 273.15, a.heat_setpoint_c + 273.15,
                                        a.vent};
        };
    }

    const EvalResult eval =
        evaluate(eval_controller, *eval_forcing, config.building, config.reward,
                 config.eval_episodes);
    log.eval_mean = eval.mean_reward;
    log.eval_std = eval.std_reward;
    log.wall_seconds = seconds_since(t0);

    write_runlog_csv(config.out_dir + "/runlog.csv", config, log);
    {
        std::ofstream out(config.out_dir + "/eval.csv", std::ios::binary);
        if (!out) throw IoError("cannot open '" + config.out_dir + "/eval.csv' for writing");
        out << "episode,mean_reward\n";
        for (std::size_t i = 0; i < eval.episode_means.size(); ++i)
            out << (i + 1) << ',' << format_double(eval.episode_means[i]) << "\n";
    }
    return log;
}

void write_runlog_csv(const std::string& path, const RunConfig& config, const RunLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    // Timestamps live only on this metadata line; the seconds column below
    // is wall time and is excluded from byte-identity comparisons.
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# agent=" << config.agent_kind << " city=" << config.city
        << " seed=" << config.seed << " episodes=" << config.episodes
        << " eval_mean=" << format_double(log.eval_mean)
        << " eval_std=" << format_double(log.eval_std) << " written=" << stamp << "\n";
    out << "episode,return,mean_reward,steps,seconds\n";
    for (const auto& e : log.episodes) {
        char secs[32];
        std::snprintf(secs, sizeof(secs), "%.3f", e.seconds);
        out << e.episode << ',' << format_double(e.episode_return) << ','
            << format_double(e.mean_reward) << ',' << e.steps << ',' << secs << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace urbanrl::train
