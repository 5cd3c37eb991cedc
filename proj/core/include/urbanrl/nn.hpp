#pragma once

#include <Eigen/Dense>
#include <vector>

#include "urbanrl/random.hpp"

namespace urbanrl {
class TwinRunner;
}

namespace urbanrl::nn {

enum class Activation { relu, identity };

struct Layer {
    Eigen::MatrixXd w; // out x in
    Eigen::VectorXd b; // out
    Activation act = Activation::identity;

    Eigen::Index in_dim() const { return w.cols(); }
    Eigen::Index out_dim() const { return w.rows(); }
};

// Fixed feed-forward MLP in 64-bit floats. Plain value type: copy to
// snapshot (target networks), mutate from one thread only.
struct Mlp {
    std::vector<Layer> layers;

    /// dims = {in, h1, ..., out}; acts.size() == dims.size() - 1.
    /// Weights and biases drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    static Mlp make(const std::vector<Eigen::Index>& dims, const std::vector<Activation>& acts,
                    Rng& rng);

    Eigen::Index input_dim() const { return layers.front().in_dim(); }
    Eigen::Index output_dim() const { return layers.back().out_dim(); }
    Eigen::Index param_count() const;
};

/// Pure single-vector forward pass.
Eigen::VectorXd forward(const Mlp& mlp, const Eigen::VectorXd& x);

// Post-activation outputs per layer plus backward scratch, all reused
// across steps. The input batch is borrowed, not copied: it must stay
// alive and unchanged until the matching backward_batch call.
struct BatchCache {
    const Eigen::MatrixXd* input = nullptr;
    std::vector<Eigen::MatrixXd> act; // act[l] = output of layer l
    std::vector<Eigen::MatrixXd> dz;  // backward scratch

    const Eigen::MatrixXd& output() const { return act.back(); }
    const Eigen::MatrixXd& layer_input(std::size_t l) const {
        return l == 0 ? *input : act[l - 1];
    }
};

/// x: batch_size x input_dim (borrowed by the cache). With a twin runner,
/// each layer computes its top and bottom row blocks on two lanes; the
/// blocks are disjoint, so results are identical to the sequential pass.
void forward_batch(const Mlp& mlp, const Eigen::MatrixXd& x, BatchCache& cache,
                   urbanrl::TwinRunner* twin = nullptr);

struct Gradients {
    std::vector<Eigen::MatrixXd> dw;
    std::vector<Eigen::VectorXd> db;

    static Gradients zeros_like(const Mlp& mlp);
};

/// Reverse-mode gradients of the batch forward. dy: batch_size x output_dim.
/// grads may be null when only the input gradient is wanted (and vice versa).
/// With a twin runner, the per-layer weight-gradient and delta products run
/// on two lanes (independent outputs, identical results).
void backward_batch(const Mlp& mlp, BatchCache& cache, const Eigen::MatrixXd& dy,
                    Gradients* grads, Eigen::MatrixXd* dx = nullptr,
                    urbanrl::TwinRunner* twin = nullptr);

/// Single-sample convenience wrapper; returns parameter gradients, and the
/// input gradient through dx when non-null.
Gradients backward(const Mlp& mlp, const Eigen::VectorXd& input, const Eigen::VectorXd& upstream,
                   Eigen::VectorXd* dx = nullptr);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;

    static AdamState for_mlp(const Mlp& mlp, AdamConfig cfg);
};

/// One bias-corrected Adam update of every parameter in the network.
void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state);

// Scalar variant (used for the entropy temperature).
struct ScalarAdam {
    AdamConfig cfg;
    long step = 0;
    double m = 0.0, v = 0.0;
};

double adam_step(double param, double grad, ScalarAdam& state);

/// Polyak averaging: target <- tau * source + (1 - tau) * target.
void polyak_update(Mlp& target, const Mlp& source, double tau);

} // namespace urbanrl::nn
