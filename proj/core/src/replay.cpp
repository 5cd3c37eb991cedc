#include "urbanrl/replay.hpp"

#include "urbanrl/errors.hpp"

namespace urbanrl::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(t);
    } else {
        storage_[cursor_] = t;
    }
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

void ReplayBuffer::sample(std::size_t batch, Rng& rng,
                          std::vector<const Transition*>& out) const {
    if (batch > size_)
        throw ConfigError("replay sample: batch " + std::to_string(batch) + " > buffer size " +
                          std::to_string(size_));
    out.clear();
    out.reserve(batch);
    picked_.assign(size_, 0);
    std::size_t drawn = 0;
    while (drawn < batch) {
        const auto idx = static_cast<std::size_t>(rng.uniform_int(static_cast<long>(size_)));
        if (picked_[idx]) continue;
        picked_[idx] = 1;
        out.push_back(&storage_[idx]);
        ++drawn;
    }
}

} // namespace urbanrl::agents
