#include "urbanrl/policy_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "urbanrl/errors.hpp"
#include "urbanrl/numfmt.hpp"
#include "urbanrl/sac.hpp"

namespace urbanrl::policy_io {

namespace {

std::string next_line(std::istream& in, const std::string& context) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(context + ": unexpected end of file");
    return line;
}

std::vector<double> parse_row(const std::string& line, std::size_t expected,
                              const std::string& context) {
    auto tokens = split(trim(line), ' ');
    if (tokens.size() != expected) {
        throw IoError(context + ": expected " + std::to_string(expected) + " values, got " +
                      std::to_string(tokens.size()));
    }
    std::vector<double> out(expected);
    for (std::size_t i = 0; i < expected; ++i) out[i] = parse_double(tokens[i], context);
    return out;
}

} // namespace

void PolicyArtifact::validate() const {
    if (version != 1) throw IoError("policy artifact: unsupported version " + std::to_string(version));
    if (dims.size() < 2 || layers.size() != dims.size() - 1)
        throw IoError("policy artifact: layer list does not chain");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].w.rows() != dims[l + 1] || layers[l].w.cols() != dims[l])
            throw IoError("policy artifact: layer " + std::to_string(l) + " shape mismatch");
        if (layers[l].b.size() != dims[l + 1])
            throw IoError("policy artifact: layer " + std::to_string(l) + " bias size mismatch");
    }
    if (action_low.size() != action_high.size() || action_low.empty())
        throw IoError("policy artifact: malformed action bounds");
    if (dims.back() != 2 * static_cast<int>(action_low.size()))
        throw IoError("policy artifact: output dim must be 2 * action dim");
    for (std::size_t d = 0; d < action_low.size(); ++d)
        if (!(action_low[d] < action_high[d]))
            throw IoError("policy artifact: bounds must satisfy low < high");
}

PolicyArtifact make_artifact(const nn::Mlp& policy, const std::vector<double>& low,
                             const std::vector<double>& high) {
    PolicyArtifact a;
    a.dims.push_back(static_cast<int>(policy.input_dim()));
    for (const auto& l : policy.layers) a.dims.push_back(static_cast<int>(l.out_dim()));
    a.layers = policy.layers;
    a.action_low = low;
    a.action_high = high;
    a.validate();
    return a;
}

PolicyArtifact make_artifact(const agents::SacAgent& agent) {
    return make_artifact(agent.policy(), agent.head().low, agent.head().high);
}

void write_mlp_body(std::ostream& out, const nn::Mlp& mlp) {
    out << mlp.input_dim();
    for (const auto& l : mlp.layers) out << ' ' << l.out_dim();
    out << "\n";
    for (const auto& l : mlp.layers) {
        for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.w.cols(); ++c) {
                if (c) out << ' ';
                out << format_double(l.w(r, c));
            }
            out << "\n";
        }
        for (Eigen::Index r = 0; r < l.b.size(); ++r) {
            if (r) out << ' ';
            out << format_double(l.b(r));
        }
        out << "\n";
    }
}

nn::Mlp read_mlp_body(std::istream& in, const std::string& context) {
    const std::string size_line = next_line(in, context);
    const auto size_tokens = split(trim(size_line), ' ');
    if (size_tokens.size() < 2) throw IoError(context + ": malformed layer size line");
    std::vector<Eigen::Index> dims;
    for (const auto& t : size_tokens) {
        const long long v = parse_int(t, context + " layer sizes");
        if (v < 1) throw IoError(context + ": layer sizes must be >= 1");
        dims.push_back(static_cast<Eigen::Index>(v));
    }

    nn::Mlp mlp;
    mlp.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        nn::Layer& layer = mlp.layers[l];
        const auto in_dim = dims[l], out_dim = dims[l + 1];
        layer.w.resize(out_dim, in_dim);
        layer.b.resize(out_dim);
        layer.act = (l + 2 < dims.size()) ? nn::Activation::relu : nn::Activation::identity;
        for (Eigen::Index r = 0; r < out_dim; ++r) {
            const auto row = parse_row(next_line(in, context), static_cast<std::size_t>(in_dim),
                                       context + " layer " + std::to_string(l) + " row " +
                                           std::to_string(r));
            for (Eigen::Index c = 0; c < in_dim; ++c) layer.w(r, c) = row[static_cast<std::size_t>(c)];
        }
        const auto bias = parse_row(next_line(in, context), static_cast<std::size_t>(out_dim),
                                    context + " layer " + std::to_string(l) + " bias");
        for (Eigen::Index r = 0; r < out_dim; ++r) layer.b(r) = bias[static_cast<std::size_t>(r)];
    }
    return mlp;
}

void save_policy(const PolicyArtifact& artifact, const std::string& path) {
    artifact.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "SACPOLICY " << artifact.version << "\n";
    nn::Mlp view;
    view.layers = artifact.layers;
    write_mlp_body(out, view);
    for (std::size_t d = 0; d < artifact.action_low.size(); ++d)
        out << (d ? " " : "") << format_double(artifact.action_low[d]);
    out << "\n";
    for (std::size_t d = 0; d < artifact.action_high.size(); ++d)
        out << (d ? " " : "") << format_double(artifact.action_high[d]);
    out << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

PolicyArtifact load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open policy file '" + path + "'");
    const std::string magic = std::string(trim(next_line(in, path)));
    if (magic.rfind("SACPOLICY ", 0) != 0)
        throw IoError(path + ": expected 'SACPOLICY <version>' header");
    PolicyArtifact a;
    a.version = static_cast<int>(parse_int(magic.substr(10), path + " header"));
    if (a.version != 1) throw IoError(path + ": unsupported version " + std::to_string(a.version));

    nn::Mlp mlp = read_mlp_body(in, path);
    a.dims.push_back(static_cast<int>(mlp.input_dim()));
    for (const auto& l : mlp.layers) a.dims.push_back(static_cast<int>(l.out_dim()));
    a.layers = std::move(mlp.layers);

    const int action_dim = a.dims.back() / 2;
    a.action_low = parse_row(next_line(in, path), static_cast<std::size_t>(action_dim),
                             path + " action lower bounds");
    a.action_high = parse_row(next_line(in, path), static_cast<std::size_t>(action_dim),
                              path + " action upper bounds");
    a.validate();
    return a;
}

env::ContinuousAction matmul_inference(const PolicyArtifact& artifact,
                                       const env::Observation& obs) {
    const auto arr = obs.as_array();
    std::vector<double> h(arr.begin(), arr.end());
    if (static_cast<int>(h.size()) != artifact.dims.front())
        throw ConfigError("matmul_inference: observation dimension mismatch");

    // Plain matrix-vector products and adds; final layer left linear.
    std::vector<double> z;
    for (std::size_t l = 0; l < artifact.layers.size(); ++l) {
        const nn::Layer& layer = artifact.layers[l];
        const auto out_dim = static_cast<std::size_t>(layer.w.rows());
        const auto in_dim = static_cast<std::size_t>(layer.w.cols());
        z.assign(out_dim, 0.0);
        for (std::size_t r = 0; r < out_dim; ++r) {
            double acc = layer.b(static_cast<Eigen::Index>(r));
            for (std::size_t c = 0; c < in_dim; ++c)
                acc += layer.w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * h[c];
            z[r] = acc;
        }
        if (l + 1 < artifact.layers.size())
            for (auto& v : z) v = v > 0.0 ? v : 0.0;
        h = z;
    }

    const int dim = artifact.action_dim();
    std::vector<double> action(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        const double t = std::tanh(h[static_cast<std::size_t>(d)]); // mean head only
        const double scale = 0.5 * (artifact.action_high[d] - artifact.action_low[d]);
        const double bias = 0.5 * (artifact.action_high[d] + artifact.action_low[d]);
        action[static_cast<std::size_t>(d)] = scale * t + bias;
    }
    return {action[0], action[1], action[2]};
}

} // namespace urbanrl::policy_io
