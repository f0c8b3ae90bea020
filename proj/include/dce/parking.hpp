#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>

namespace dce {

enum class ParkState : std::uint8_t { kEmpty, kNotified, kParked };

// One-shot block/unblock channel owned by a single thread.
//
// unpark() either releases the parked owner or leaves one pending
// notification behind; pending notifications coalesce, so the token behaves
// like a binary semaphore. Only the owning thread may call park().
//
// unpark() touches the token only while holding its internal mutex, and
// park() cannot return before that mutex is released. The owner may
// therefore destroy the token as soon as park() returns true.
class ParkToken {
  public:
    ParkToken() = default;
    ParkToken(const ParkToken&) = delete;
    ParkToken& operator=(const ParkToken&) = delete;

    // Returns true after consuming a notification, false on a spurious
    // return forced by the test hook (nothing consumed).
    bool park();
    void unpark();

    ParkState state() const;

  private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    ParkState state_ = ParkState::kEmpty;
};

namespace testing {

// Called at the top of every park(). Returning true makes that park() return
// false immediately (an injected spurious wakeup). The hook may also block to
// hold a thread at the park point. nullptr disables it.
using ParkHook = bool (*)();
void set_park_hook(ParkHook hook) noexcept;

// Number of threads currently blocked inside park().
int blocked_parkers() noexcept;

}  // namespace testing

}  // namespace dce
