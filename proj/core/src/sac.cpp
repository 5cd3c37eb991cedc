#include "urbanrl/sac.hpp"

#include <cmath>

#include "urbanrl/errors.hpp"
#include "urbanrl/parallel.hpp"

namespace urbanrl::agents {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727; // 0.5 * log(2*pi)
} // namespace

// Reusable buffers for the batched training path; everything resizes once
// and stays put across steps. The twin critics are independent, so their
// passes run on two lanes with identical results to sequential execution.
struct SacScratch {
    Eigen::MatrixXd obs, obs_cur, x;        // M x 5 stacks and M x (5 + dim)
    Eigen::MatrixXd actions, u, mean, log_std; // M x dim head samples
    Eigen::VectorXd logp;                   // M
    Eigen::MatrixXd dy1, dy2, dx1, dx2, d_trunk;
    nn::BatchCache pol_cache, c1, c2, t1, t2;
    nn::Gradients q1_grads, q2_grads, policy_grads;
    std::vector<double> y;
    TwinRunner twin;
};

namespace {

void stack_obs_into(const std::vector<const Transition*>& batch, bool next, Eigen::MatrixXd& out) {
    out.resize(static_cast<Eigen::Index>(batch.size()), 5);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& o = next ? batch[i]->next_obs : batch[i]->obs;
        for (int d = 0; d < 5; ++d) out(static_cast<Eigen::Index>(i), d) = o[d];
    }
}

// Batched reparameterized sampling from the squashed-Gaussian head. Noise
// draws are sample-major, dimension-minor, matching sample_head.
void sample_batch_into(const GaussianHead& head, const Eigen::MatrixXd& trunk, Rng& rng,
                       SacScratch& s) {
    const Eigen::Index m = trunk.rows();
    const int dim = head.dim();
    s.actions.resize(m, dim);
    s.u.resize(m, dim);
    s.mean.resize(m, dim);
    s.log_std.resize(m, dim);
    s.logp.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double lp = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double mean = trunk(i, d);
            const double log_std = head.squash_log_std(trunk(i, dim + d));
            const double std = std::exp(log_std);
            const double xi = rng.normal();
            const double u = mean + std * xi;
            const double t = std::tanh(u);
            s.mean(i, d) = mean;
            s.log_std(i, d) = log_std;
            s.u(i, d) = u;
            s.actions(i, d) = head.scale(d) * t + head.bias(d);
            lp += -0.5 * xi * xi - log_std - kHalfLog2Pi -
                  std::log(head.scale(d) * (1.0 - t * t) + kSquashEps);
        }
        s.logp(i) = lp;
    }
}

void targets_into(const std::vector<const Transition*>& batch, const nn::Mlp& q1_target,
                  const nn::Mlp& q2_target, const nn::Mlp& policy, const GaussianHead& head,
                  double alpha, double gamma, Rng& rng, SacScratch& s) {
    if (batch.empty()) throw ConfigError("sac_targets: empty batch");
    const auto m = static_cast<Eigen::Index>(batch.size());
    const int dim = head.dim();

    stack_obs_into(batch, /*next=*/true, s.obs);
    forward_batch(policy, s.obs, s.pol_cache, &s.twin);
    sample_batch_into(head, s.pol_cache.output(), rng, s);

    s.x.resize(m, 5 + dim);
    s.x.leftCols(5) = s.obs;
    s.x.rightCols(dim) = s.actions;
    s.twin.run([&] { forward_batch(q1_target, s.x, s.t1); },
               [&] { forward_batch(q2_target, s.x, s.t2); });

    s.y.resize(batch.size());
    for (Eigen::Index i = 0; i < m; ++i) {
        const Transition& t = *batch[static_cast<std::size_t>(i)];
        if (t.done) {
            s.y[static_cast<std::size_t>(i)] = t.reward;
        } else {
            const double min_q = std::min(s.t1.output()(i, 0), s.t2.output()(i, 0));
            s.y[static_cast<std::size_t>(i)] = t.reward + gamma * (min_q - alpha * s.logp(i));
        }
    }
}

} // namespace

double GaussianHead::squash_log_std(double raw) const {
    // Smooth rescale of the raw head output into the configured band.
    return log_std_min + 0.5 * (log_std_max - log_std_min) * (std::tanh(raw) + 1.0);
}

GaussianHead hvac_action_head() {
    GaussianHead head;
    const auto lo = env::action_lower_bounds();
    const auto hi = env::action_upper_bounds();
    head.low.assign(lo.begin(), lo.end());
    head.high.assign(hi.begin(), hi.end());
    return head;
}

SampledAction sample_head(const GaussianHead& head, std::span<const double> trunk_out, Rng* rng,
                          bool deterministic) {
    const int dim = head.dim();
    if (static_cast<int>(trunk_out.size()) != 2 * dim)
        throw ConfigError("sample_head: trunk output size " + std::to_string(trunk_out.size()) +
                          " != 2 * " + std::to_string(dim));
    if (!deterministic && rng == nullptr)
        throw ConfigError("sample_head: stochastic sampling needs an rng");

    SampledAction s;
    s.action.resize(dim);
    s.pre_tanh.resize(dim);
    s.mean.resize(dim);
    s.log_std.resize(dim);
    s.noise.assign(dim, 0.0);
    s.log_prob = 0.0;
    for (int d = 0; d < dim; ++d) {
        const double mean = trunk_out[d];
        const double log_std = head.squash_log_std(trunk_out[dim + d]);
        const double std = std::exp(log_std);
        const double xi = deterministic ? 0.0 : rng->normal();
        const double u = mean + std * xi;
        const double t = std::tanh(u);
        s.mean[d] = mean;
        s.log_std[d] = log_std;
        s.noise[d] = xi;
        s.pre_tanh[d] = u;
        s.action[d] = head.scale(d) * t + head.bias(d);
        // log N(u; mean, std) minus the log-Jacobian of the squash+rescale
        s.log_prob += -0.5 * xi * xi - log_std - kHalfLog2Pi -
                      std::log(head.scale(d) * (1.0 - t * t) + kSquashEps);
    }
    return s;
}

SampledAction sac_sample_action(const nn::Mlp& policy, const env::Observation& obs, Rng& rng,
                                bool deterministic) {
    const auto arr = obs.as_array();
    const Eigen::VectorXd out =
        forward(policy, Eigen::Map<const Eigen::VectorXd>(arr.data(), 5));
    return sample_head(hvac_action_head(), std::span<const double>(out.data(),
                                                                   static_cast<std::size_t>(out.size())),
                       &rng, deterministic);
}

std::vector<double> sac_targets(const std::vector<const Transition*>& batch,
                                const nn::Mlp& q1_target, const nn::Mlp& q2_target,
                                const nn::Mlp& policy, const GaussianHead& head, double alpha,
                                double gamma, Rng& rng) {
    SacScratch scratch;
    targets_into(batch, q1_target, q2_target, policy, head, alpha, gamma, rng, scratch);
    return scratch.y;
}

SacAgent::SacAgent(SacConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      head_(hvac_action_head()),
      rng_(seed),
      q1_(nn::Mlp::make({cfg.obs_dim + cfg.action_dim, cfg.hidden, cfg.hidden, 1},
                        {nn::Activation::relu, nn::Activation::relu, nn::Activation::identity},
                        rng_)),
      q2_(nn::Mlp::make({cfg.obs_dim + cfg.action_dim, cfg.hidden, cfg.hidden, 1},
                        {nn::Activation::relu, nn::Activation::relu, nn::Activation::identity},
                        rng_)),
      q1_target_(q1_),
      q2_target_(q2_),
      policy_(nn::Mlp::make({cfg.obs_dim, cfg.hidden, cfg.hidden, 2 * cfg.action_dim},
                            {nn::Activation::relu, nn::Activation::relu,
                             nn::Activation::identity},
                            rng_)),
      q1_opt_(nn::AdamState::for_mlp(q1_, {cfg.q_lr})),
      q2_opt_(nn::AdamState::for_mlp(q2_, {cfg.q_lr})),
      policy_opt_(nn::AdamState::for_mlp(policy_, {cfg.policy_lr})),
      log_alpha_(std::log(cfg.alpha_init)),
      alpha_opt_{{cfg.q_lr}},
      buffer_(cfg.buffer_capacity),
      scratch_(std::make_unique<SacScratch>()) {
    head_.log_std_min = cfg.log_std_min;
    head_.log_std_max = cfg.log_std_max;
}

SacAgent::~SacAgent() = default;
SacAgent::SacAgent(SacAgent&&) noexcept = default;
SacAgent& SacAgent::operator=(SacAgent&&) noexcept = default;

double SacAgent::alpha() const { return std::exp(log_alpha_); }

env::ContinuousAction SacAgent::act(const env::Observation& obs, bool deterministic) {
    const SampledAction s = sac_sample_action(policy_, obs, rng_, deterministic);
    return {s.action[0], s.action[1], s.action[2]};
}

double SacAgent::q_train_on_batch(const std::vector<const Transition*>& batch,
                                  const std::vector<double>& targets) {
    return critics_update(batch, targets, /*with_policy_forward=*/false);
}

double SacAgent::critics_update(const std::vector<const Transition*>& batch,
                                const std::vector<double>& targets, bool with_policy_forward) {
    SacScratch& s = *scratch_;
    const auto m = static_cast<Eigen::Index>(batch.size());
    s.x.resize(m, cfg_.obs_dim + cfg_.action_dim);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Transition& t = *batch[static_cast<std::size_t>(i)];
        for (int d = 0; d < 5; ++d) s.x(i, d) = t.obs[d];
        for (int d = 0; d < cfg_.action_dim; ++d) s.x(i, 5 + d) = t.action[d];
    }
    if (with_policy_forward) stack_obs_into(batch, /*next=*/false, s.obs_cur);

    const double inv_m = 1.0 / static_cast<double>(m);
    double loss1 = 0.0, loss2 = 0.0;
    auto critic_pass = [&](nn::Mlp& net, nn::AdamState& opt, nn::BatchCache& cache,
                           nn::Gradients& grads, Eigen::MatrixXd& dy, double& loss) {
        forward_batch(net, s.x, cache);
        dy.resize(m, 1);
        loss = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double err = cache.output()(i, 0) - targets[static_cast<std::size_t>(i)];
            loss += err * err;
            dy(i, 0) = 2.0 * err * inv_m;
        }
        loss *= inv_m;
        backward_batch(net, cache, dy, &grads);
        adam_step(net, grads, opt);
    };
    // The upcoming policy update's trunk pass shares the idle lane time.
    s.twin.run(
        [&] {
            critic_pass(q1_, q1_opt_, s.c1, s.q1_grads, s.dy1, loss1);
            if (with_policy_forward) forward_batch(policy_, s.obs_cur, s.pol_cache);
        },
        [&] { critic_pass(q2_, q2_opt_, s.c2, s.q2_grads, s.dy2, loss2); });
    return loss1 + loss2;
}

void SacAgent::policy_and_alpha_update(const std::vector<const Transition*>& batch, Losses& out) {
    // critics_update already ran the policy trunk on the current
    // observations (s.obs_cur -> s.pol_cache).
    SacScratch& s = *scratch_;
    const auto m = static_cast<Eigen::Index>(batch.size());
    const int dim = cfg_.action_dim;
    const double a_cur = alpha();
    const double inv_m = 1.0 / static_cast<double>(m);

    const Eigen::MatrixXd& trunk = s.pol_cache.output();
    sample_batch_into(head_, trunk, rng_, s);

    s.x.resize(m, 5 + dim);
    s.x.leftCols(5) = s.obs_cur;
    s.x.rightCols(dim) = s.actions;
    s.twin.run([&] { forward_batch(q1_, s.x, s.c1); }, [&] { forward_batch(q2_, s.x, s.c2); });

    // J = mean(alpha * log pi - min_j Q_j); route the Q gradient through the
    // argmin network per sample.
    s.dy1.setZero(m, 1);
    s.dy2.setZero(m, 1);
    double policy_loss = 0.0;
    double mean_logp = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double q1v = s.c1.output()(i, 0), q2v = s.c2.output()(i, 0);
        policy_loss += a_cur * s.logp(i) - std::min(q1v, q2v);
        mean_logp += s.logp(i);
        if (q1v <= q2v)
            s.dy1(i, 0) = -inv_m;
        else
            s.dy2(i, 0) = -inv_m;
    }
    policy_loss *= inv_m;
    mean_logp *= inv_m;

    s.twin.run([&] { backward_batch(q1_, s.c1, s.dy1, nullptr, &s.dx1); },
               [&] { backward_batch(q2_, s.c2, s.dy2, nullptr, &s.dx2); });

    // Reparameterized gradient through a = scale * tanh(u) + bias,
    // u = mean + exp(log_std) * noise, log_std = squash(raw).
    s.d_trunk.resize(m, 2 * dim);
    const double ls_span = 0.5 * (head_.log_std_max - head_.log_std_min);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (int d = 0; d < dim; ++d) {
            const double t = std::tanh(s.u(i, d));
            const double sc = head_.scale(d);
            const double jac = sc * (1.0 - t * t);
            const double dlogp_du = 2.0 * sc * t * (1.0 - t * t) / (jac + kSquashEps);
            const double dq_da = s.dx1(i, 5 + d) + s.dx2(i, 5 + d); // one of the two is zero
            const double g_u = a_cur * inv_m * dlogp_du + dq_da * jac;
            const double g_log_std = g_u * (s.u(i, d) - s.mean(i, d)) - a_cur * inv_m;
            const double raw = trunk(i, dim + d);
            const double th = std::tanh(raw);
            s.d_trunk(i, d) = g_u;
            s.d_trunk(i, dim + d) = g_log_std * ls_span * (1.0 - th * th);
        }
    }

    backward_batch(policy_, s.pol_cache, s.d_trunk, &s.policy_grads, nullptr, &s.twin);
    adam_step(policy_, s.policy_grads, policy_opt_);

    out.policy_loss = policy_loss;
    out.policy_updated = true;

    if (cfg_.autotune_alpha) {
        // L_alpha = -exp(log_alpha) * mean(log pi + H_target), optimized in
        // log space to keep the temperature positive.
        const double mean_term = mean_logp + cfg_.target_entropy;
        const double grad_log_alpha = -a_cur * mean_term;
        log_alpha_ = nn::adam_step(log_alpha_, grad_log_alpha, alpha_opt_);
        out.alpha_loss = -a_cur * mean_term;
    }
}

std::optional<SacAgent::Losses> SacAgent::train_step(long global_step) {
    if (global_step < cfg_.learning_start) return std::nullopt;
    if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) return std::nullopt;

    buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_, batch_);

    Losses out;
    targets_into(batch_, q1_target_, q2_target_, policy_, head_, alpha(), cfg_.gamma, rng_,
                 *scratch_);
    const bool update_policy = (global_step % cfg_.policy_update_every == 0);
    out.q_loss = critics_update(batch_, scratch_->y, update_policy);
    if (update_policy) policy_and_alpha_update(batch_, out);

    if (global_step % cfg_.target_update_every == 0) {
        polyak_update(q1_target_, q1_, cfg_.tau);
        polyak_update(q2_target_, q2_, cfg_.tau);
    }
    return out;
}

} // namespace urbanrl::agents
