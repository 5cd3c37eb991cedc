#include "urbanrl/nn.hpp"

#include <cmath>

#include "urbanrl/errors.hpp"
#include "urbanrl/parallel.hpp"

namespace urbanrl::nn {

Mlp Mlp::make(const std::vector<Eigen::Index>& dims, const std::vector<Activation>& acts,
              Rng& rng) {
    if (dims.size() < 2) throw ConfigError("mlp: need at least input and output dimensions");
    if (acts.size() != dims.size() - 1)
        throw ConfigError("mlp: activation count must equal layer count");
    Mlp mlp;
    mlp.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer& layer = mlp.layers[l];
        const Eigen::Index in = dims[l], out = dims[l + 1];
        if (in < 1 || out < 1) throw ConfigError("mlp: layer dimensions must be >= 1");
        layer.w.resize(out, in);
        layer.b.resize(out);
        layer.act = acts[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        // Draw order pinned: weight rows in order, then the bias.
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c) layer.w(r, c) = rng.uniform(-bound, bound);
        for (Eigen::Index r = 0; r < out; ++r) layer.b(r) = rng.uniform(-bound, bound);
    }
    return mlp;
}

Eigen::Index Mlp::param_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

Eigen::VectorXd forward(const Mlp& mlp, const Eigen::VectorXd& x) {
    if (x.size() != mlp.input_dim())
        throw ConfigError("mlp forward: input dimension " + std::to_string(x.size()) +
                          " != " + std::to_string(mlp.input_dim()));
    Eigen::VectorXd h = x;
    for (const auto& layer : mlp.layers) {
        Eigen::VectorXd z = layer.w * h + layer.b;
        if (layer.act == Activation::relu) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

void forward_batch(const Mlp& mlp, const Eigen::MatrixXd& x, BatchCache& cache,
                   urbanrl::TwinRunner* twin) {
    if (x.cols() != mlp.input_dim())
        throw ConfigError("mlp forward_batch: input dimension " + std::to_string(x.cols()) +
                          " != " + std::to_string(mlp.input_dim()));
    const std::size_t n = mlp.layers.size();
    const Eigen::Index m = x.rows();
    cache.input = &x;
    cache.act.resize(n);

    auto layer_rows = [&](std::size_t l, Eigen::Index row0, Eigen::Index rows) {
        const Layer& layer = mlp.layers[l];
        Eigen::MatrixXd& out = cache.act[l];
        auto block = out.middleRows(row0, rows);
        block.noalias() = cache.layer_input(l).middleRows(row0, rows) * layer.w.transpose();
        if (layer.act == Activation::relu)
            block = (block.rowwise() + layer.b.transpose()).cwiseMax(0.0); // fused, in place
        else
            block.rowwise() += layer.b.transpose();
    };

    const bool split = twin != nullptr && m >= 64;
    const Eigen::Index half = m / 2;
    for (std::size_t l = 0; l < n; ++l) {
        cache.act[l].resize(m, mlp.layers[l].out_dim());
        if (split) {
            twin->run([&] { layer_rows(l, 0, half); }, [&] { layer_rows(l, half, m - half); });
        } else {
            layer_rows(l, 0, m);
        }
    }
}

Gradients Gradients::zeros_like(const Mlp& mlp) {
    Gradients g;
    g.dw.reserve(mlp.layers.size());
    g.db.reserve(mlp.layers.size());
    for (const auto& l : mlp.layers) {
        g.dw.emplace_back(Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()));
        g.db.emplace_back(Eigen::VectorXd::Zero(l.b.size()));
    }
    return g;
}

void backward_batch(const Mlp& mlp, BatchCache& cache, const Eigen::MatrixXd& dy,
                    Gradients* grads, Eigen::MatrixXd* dx, urbanrl::TwinRunner* twin) {
    const std::size_t n = mlp.layers.size();
    if (cache.act.size() != n || cache.input == nullptr)
        throw ConfigError("mlp backward: stale forward cache");
    if (dy.rows() != cache.input->rows() || dy.cols() != mlp.output_dim())
        throw ConfigError("mlp backward: upstream gradient shape mismatch");
    if (grads && grads->dw.size() != n) *grads = Gradients::zeros_like(mlp);
    cache.dz.resize(n);

    // dz[l] doubles as the delta buffer flowing into layer l-1. The relu
    // mask comes from the stored outputs (zero output == inactive unit).
    for (std::size_t l = n; l-- > 0;) {
        const Layer& layer = mlp.layers[l];
        const Eigen::MatrixXd& grad_out = (l == n - 1) ? dy : cache.dz[l];
        Eigen::MatrixXd& dz = cache.dz[l];
        if (layer.act == Activation::relu) {
            if (&dz != &grad_out) dz.resize(grad_out.rows(), grad_out.cols());
            dz = (cache.act[l].array() > 0.0).select(grad_out, 0.0);
        } else if (&dz != &grad_out) {
            dz = grad_out;
        }
        const auto weight_grads = [&] {
            if (!grads) return;
            grads->dw[l].noalias() = dz.transpose() * cache.layer_input(l);
            grads->db[l] = dz.colwise().sum().transpose();
        };
        const auto input_grads = [&] {
            if (l > 0) {
                cache.dz[l - 1].resize(dz.rows(), layer.w.cols());
                cache.dz[l - 1].noalias() = dz * layer.w;
            } else if (dx) {
                dx->resize(dz.rows(), layer.w.cols());
                dx->noalias() = dz * layer.w;
            }
        };
        if (twin && grads && (l > 0 || dx)) {
            twin->run(weight_grads, input_grads);
        } else {
            weight_grads();
            input_grads();
        }
    }
}

Gradients backward(const Mlp& mlp, const Eigen::VectorXd& input, const Eigen::VectorXd& upstream,
                   Eigen::VectorXd* dx) {
    BatchCache cache;
    const Eigen::MatrixXd x = input.transpose(); // cache borrows this
    forward_batch(mlp, x, cache);
    Gradients grads = Gradients::zeros_like(mlp);
    Eigen::MatrixXd dxm;
    backward_batch(mlp, cache, upstream.transpose(), &grads, dx ? &dxm : nullptr);
    if (dx) *dx = dxm.row(0).transpose();
    return grads;
}

AdamState AdamState::for_mlp(const Mlp& mlp, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    for (const auto& l : mlp.layers) {
        s.mw.emplace_back(Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()));
        s.vw.emplace_back(Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()));
        s.mb.emplace_back(Eigen::VectorXd::Zero(l.b.size()));
        s.vb.emplace_back(Eigen::VectorXd::Zero(l.b.size()));
    }
    return s;
}

namespace {

// Single fused pass over the contiguous parameter block.
void adam_update(double* param, const double* grad, double* m, double* v, Eigen::Index n,
                 const AdamConfig& cfg, double bc1, double bc2) {
    const double one_m_b1 = 1.0 - cfg.beta1;
    const double one_m_b2 = 1.0 - cfg.beta2;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double g = grad[i];
        const double mi = cfg.beta1 * m[i] + one_m_b1 * g;
        const double vi = cfg.beta2 * v[i] + one_m_b2 * g * g;
        m[i] = mi;
        v[i] = vi;
        param[i] -= cfg.lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps);
    }
}

} // namespace

void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state) {
    if (grads.dw.size() != mlp.layers.size() || state.mw.size() != mlp.layers.size())
        throw ConfigError("adam: gradient/state shape mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, double(state.step));
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        adam_update(mlp.layers[l].w.data(), grads.dw[l].data(), state.mw[l].data(),
                    state.vw[l].data(), mlp.layers[l].w.size(), state.cfg, bc1, bc2);
        adam_update(mlp.layers[l].b.data(), grads.db[l].data(), state.mb[l].data(),
                    state.vb[l].data(), mlp.layers[l].b.size(), state.cfg, bc1, bc2);
    }
}

double adam_step(double param, double grad, ScalarAdam& state) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, double(state.step));
    state.m = state.cfg.beta1 * state.m + (1.0 - state.cfg.beta1) * grad;
    state.v = state.cfg.beta2 * state.v + (1.0 - state.cfg.beta2) * grad * grad;
    return param - state.cfg.lr * (state.m / bc1) / (std::sqrt(state.v / bc2) + state.cfg.eps);
}

void polyak_update(Mlp& target, const Mlp& source, double tau) {
    if (target.layers.size() != source.layers.size())
        throw ConfigError("polyak: network shape mismatch");
    for (std::size_t l = 0; l < target.layers.size(); ++l) {
        target.layers[l].w = tau * source.layers[l].w + (1.0 - tau) * target.layers[l].w;
        target.layers[l].b = tau * source.layers[l].b + (1.0 - tau) * target.layers[l].b;
    }
}

} // namespace urbanrl::nn
