#pragma once

#include <atomic>
#include <mutex>
#include <thread>

namespace dce {

// A std::mutex that remembers its owner, so condition-variable calls can
// check that the caller really holds the lock it claims to hold.
class Mutex {
  public:
    Mutex() = default;
    Mutex(const Mutex&) = delete;
    Mutex& operator=(const Mutex&) = delete;

    void lock();
    bool try_lock();
    void unlock();

    bool held_by_current_thread() const noexcept
    {
        return owner_.load(std::memory_order_relaxed) == std::this_thread::get_id();
    }

  private:
    std::mutex mutex_;
    std::atomic<std::thread::id> owner_{};
};

}  // namespace dce
