#include "urbanrl/dqn.hpp"

#include <algorithm>
#include <fstream>

#include "urbanrl/errors.hpp"
#include "urbanrl/numfmt.hpp"
#include "urbanrl/policy_io.hpp"

namespace urbanrl::agents {

double epsilon_linear(long step, long total_steps, double start, double end, double fraction) {
    const double horizon = fraction * static_cast<double>(total_steps);
    if (horizon <= 0.0) return end;
    const double slope = (end - start) / horizon;
    return std::max(end, start + slope * static_cast<double>(step));
}

namespace {

nn::Mlp make_q_net(const DqnConfig& cfg, Rng& rng) {
    return nn::Mlp::make({cfg.obs_dim, cfg.hidden, cfg.hidden, cfg.n_actions},
                         {nn::Activation::relu, nn::Activation::relu, nn::Activation::identity},
                         rng);
}

Eigen::MatrixXd stack_obs(const std::vector<const Transition*>& batch, bool next) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(batch.size()), 5);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& o = next ? batch[i]->next_obs : batch[i]->obs;
        for (int d = 0; d < 5; ++d) x(static_cast<Eigen::Index>(i), d) = o[d];
    }
    return x;
}

} // namespace

std::vector<double> dqn_td_target(const std::vector<const Transition*>& batch,
                                  const nn::Mlp& target_net, double gamma) {
    if (batch.empty()) throw ConfigError("dqn_td_target: empty batch");
    nn::BatchCache cache;
    const Eigen::MatrixXd x = stack_obs(batch, /*next=*/true); // cache borrows this
    forward_batch(target_net, x, cache);
    const Eigen::MatrixXd& q_next = cache.output();
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = *batch[i];
        y[i] = t.done ? t.reward
                      : t.reward + gamma * q_next.row(static_cast<Eigen::Index>(i)).maxCoeff();
    }
    return y;
}

DqnAgent::DqnAgent(DqnConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      rng_(seed),
      q_(make_q_net(cfg_, rng_)),
      target_(q_),
      opt_(nn::AdamState::for_mlp(q_, {cfg.lr})),
      buffer_(cfg.buffer_capacity) {
    // Initialization consumed part of the stream; reseed so the behaviour
    // stream does not depend on the network size.
    rng_ = Rng(seed ^ 0x9e3779b97f4a7c15ULL);
}

int DqnAgent::act(const env::Observation& obs, long global_step) {
    if (global_step < cfg_.learning_start) return static_cast<int>(rng_.uniform_int(cfg_.n_actions));
    const double eps = epsilon_linear(global_step, cfg_.total_steps, cfg_.eps_start, cfg_.eps_end,
                                      cfg_.exploration_fraction);
    if (rng_.uniform() < eps) return static_cast<int>(rng_.uniform_int(cfg_.n_actions));
    return greedy_action(obs);
}

int DqnAgent::greedy_action(const env::Observation& obs) const {
    const auto arr = obs.as_array();
    const Eigen::VectorXd q = forward(q_, Eigen::Map<const Eigen::VectorXd>(arr.data(), 5));
    Eigen::Index best = 0;
    q.maxCoeff(&best); // Eigen returns the first (lowest-index) maximum
    return static_cast<int>(best);
}

double DqnAgent::train_on_batch(const std::vector<const Transition*>& batch,
                                const std::vector<double>& targets) {
    const auto m = static_cast<Eigen::Index>(batch.size());
    nn::BatchCache cache;
    const Eigen::MatrixXd x = stack_obs(batch, /*next=*/false); // cache borrows this
    forward_batch(q_, x, cache);
    const Eigen::MatrixXd& q_all = cache.output();

    // L = (1/M) sum (y_i - Q(s_i, a_i))^2, gradient only on the taken action.
    Eigen::MatrixXd dy = Eigen::MatrixXd::Zero(m, cfg_.n_actions);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const int a = batch[static_cast<std::size_t>(i)]->action_index;
        const double err = q_all(i, a) - targets[static_cast<std::size_t>(i)];
        loss += err * err;
        dy(i, a) = 2.0 * err / static_cast<double>(m);
    }
    loss /= static_cast<double>(m);

    nn::Gradients grads;
    backward_batch(q_, cache, dy, &grads);
    adam_step(q_, grads, opt_);
    return loss;
}

std::optional<double> DqnAgent::train_step(long global_step) {
    if (global_step < cfg_.learning_start) {
        skip_reason_ = "before learning start";
        return std::nullopt;
    }
    if (global_step % cfg_.train_every == 0) {
        if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) {
            skip_reason_ = "buffer holds " + std::to_string(buffer_.size()) + " < batch " +
                           std::to_string(cfg_.batch_size);
            return std::nullopt;
        }
        buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_, batch_);
        const auto targets = dqn_td_target(batch_, target_, cfg_.gamma);
        const double loss = train_on_batch(batch_, targets);
        if (global_step % cfg_.target_update_every == 0) polyak_update(target_, q_, cfg_.tau);
        skip_reason_.clear();
        return loss;
    }
    skip_reason_ = "off schedule";
    return std::nullopt;
}

void DqnAgent::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "DQNQNET 1\n";
    policy_io::write_mlp_body(out, q_);
    if (!out) throw IoError("write failed for '" + path + "'");
}

DqnAgent DqnAgent::load(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open DQN checkpoint '" + path + "'");
    std::string magic;
    std::getline(in, magic);
    if (std::string(trim(magic)) != "DQNQNET 1")
        throw IoError(path + ": expected header 'DQNQNET 1'");
    nn::Mlp net = policy_io::read_mlp_body(in, path);

    DqnConfig cfg;
    cfg.obs_dim = static_cast<int>(net.input_dim());
    cfg.n_actions = static_cast<int>(net.output_dim());
    cfg.hidden = static_cast<int>(net.layers.front().out_dim());
    DqnAgent agent(cfg, seed);
    agent.q_ = net;
    agent.target_ = std::move(net);
    agent.opt_ = nn::AdamState::for_mlp(agent.q_, {cfg.lr});
    return agent;
}

} // namespace urbanrl::agents
