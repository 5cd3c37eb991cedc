#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "urbanrl/random.hpp"

namespace urbanrl::agents {

// Shared experience record. Discrete agents use action_index, SAC the
// continuous action triple.
struct Transition {
    std::array<double, 5> obs{};
    std::array<double, 3> action{};
    int action_index = 0;
    double reward = 0.0;
    std::array<double, 5> next_obs{};
    bool done = false;
};

// Fixed-capacity ring buffer, uniform sampling without replacement
// within a batch.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t);

    /// Draws `batch` distinct slot indices uniformly; requires batch <= size().
    void sample(std::size_t batch, Rng& rng, std::vector<const Transition*>& out) const;

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return storage_[i]; }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::size_t size_ = 0;
    std::vector<Transition> storage_;
    mutable std::vector<unsigned char> picked_; // scratch for rejection sampling
};

} // namespace urbanrl::agents
