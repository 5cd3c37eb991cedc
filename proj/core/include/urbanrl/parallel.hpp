#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

namespace urbanrl {

// Runs two independent closures concurrently on one persistent worker plus
// the calling thread. The closures must not share mutable state, which also
// makes the results identical to running them back to back. run() must not
// be re-entered from inside one of its own closures.
class TwinRunner {
public:
    TwinRunner();
    ~TwinRunner();
    TwinRunner(const TwinRunner&) = delete;
    TwinRunner& operator=(const TwinRunner&) = delete;

    void run(const std::function<void()>& a, const std::function<void()>& b);

private:
    void worker_loop();

    std::thread worker_;
    std::mutex mutex_;
    std::condition_variable cv_;
    const std::function<void()>* task_ = nullptr;
    std::exception_ptr worker_error_;
    bool done_ = true;
    bool stop_ = false;
};

} // namespace urbanrl
