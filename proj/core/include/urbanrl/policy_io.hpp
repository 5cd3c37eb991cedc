#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "urbanrl/env.hpp"
#include "urbanrl/nn.hpp"

namespace urbanrl::agents {
class SacAgent;
}

namespace urbanrl::policy_io {

// Portable policy snapshot: layer sizes, row-major weights, biases and the
// action rescale bounds. Hidden layers are ReLU, the output layer identity.
struct PolicyArtifact {
    int version = 1;
    std::vector<int> dims; // {in, hidden..., 2 * action_dim}
    std::vector<nn::Layer> layers;
    std::vector<double> action_low, action_high;
    bool deterministic_mode = true;

    int action_dim() const { return static_cast<int>(action_low.size()); }
    void validate() const;
};

PolicyArtifact make_artifact(const agents::SacAgent& agent);
PolicyArtifact make_artifact(const nn::Mlp& policy, const std::vector<double>& low,
                             const std::vector<double>& high);

// Text format, bit-exact round trip:
//   SACPOLICY 1
//   <layer sizes>
//   per layer: one line per weight row, then the bias line
//   <action lower bounds>
//   <action upper bounds>
void save_policy(const PolicyArtifact& artifact, const std::string& path);
PolicyArtifact load_policy(const std::string& path);

/// Deterministic action from the artifact using only matrix-vector
/// products, adds, tanh and the affine rescale. Independent of the agent
/// modules.
env::ContinuousAction matmul_inference(const PolicyArtifact& artifact,
                                       const env::Observation& obs);

// Shared layer-block text helpers (also used by the DQN checkpoint).
void write_mlp_body(std::ostream& out, const nn::Mlp& mlp);
nn::Mlp read_mlp_body(std::istream& in, const std::string& context);

} // namespace urbanrl::policy_io
