#include "dce/parking.hpp"

#include <atomic>
#include <cassert>

namespace dce {

namespace {

std::atomic<testing::ParkHook> g_park_hook{nullptr};
std::atomic<int> g_blocked{0};

}  // namespace

bool ParkToken::park()
{
    if (auto hook = g_park_hook.load(std::memory_order_acquire); hook && hook())
        return false;

    std::unique_lock<std::mutex> lk(mutex_);
    assert(state_ != ParkState::kParked && "two threads parked on one token");
    if (state_ == ParkState::kNotified) {
        state_ = ParkState::kEmpty;
        return true;
    }
    state_ = ParkState::kParked;
    g_blocked.fetch_add(1, std::memory_order_relaxed);
    cv_.wait(lk, [this] { return state_ != ParkState::kParked; });
    g_blocked.fetch_sub(1, std::memory_order_relaxed);
    return true;
}

void ParkToken::unpark()
{
    std::lock_guard<std::mutex> lk(mutex_);
    if (state_ == ParkState::kParked) {
        state_ = ParkState::kEmpty;
        // Notify under the mutex: the parker may destroy the token right
        // after it reacquires the mutex.
        cv_.notify_one();
    } else {
        state_ = ParkState::kNotified;
    }
}

ParkState ParkToken::state() const
{
    std::lock_guard<std::mutex> lk(mutex_);
    return state_;
}

namespace testing {

void set_park_hook(ParkHook hook) noexcept
{
    g_park_hook.store(hook, std::memory_order_release);
}

int blocked_parkers() noexcept
{
    return g_blocked.load(std::memory_order_relaxed);
}

}  // namespace testing

}  // namespace dce
