#include "urbanrl/parallel.hpp"

namespace urbanrl {

TwinRunner::TwinRunner() {
    worker_ = std::thread([this] { worker_loop(); });
}

TwinRunner::~TwinRunner() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    cv_.notify_all();
    worker_.join();
}

void TwinRunner::worker_loop() {
    std::unique_lock lock(mutex_);
    while (true) {
        cv_.wait(lock, [this] { return stop_ || task_ != nullptr; });
        if (stop_) return;
        const auto* task = task_;
        task_ = nullptr;
        lock.unlock();
        try {
            (*task)();
        } catch (...) {
            lock.lock();
            worker_error_ = std::current_exception();
            done_ = true;
            cv_.notify_all();
            continue;
        }
        lock.lock();
        done_ = true;
        cv_.notify_all();
    }
}

void TwinRunner::run(const std::function<void()>& a, const std::function<void()>& b) {
    {
        std::lock_guard lock(mutex_);
        task_ = &b;
        done_ = false;
        worker_error_ = nullptr;
    }
    cv_.notify_all();
    a();
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return done_; });
    if (worker_error_) std::rethrow_exception(worker_error_);
}

} // namespace urbanrl
