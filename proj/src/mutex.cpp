#include "dce/mutex.hpp"

#include <cassert>

namespace dce {

void Mutex::lock()
{
    assert(!held_by_current_thread() && "dce::Mutex is not recursive");
    mutex_.lock();
    owner_.store(std::this_thread::get_id(), std::memory_order_relaxed);
}

bool Mutex::try_lock()
{
    if (!mutex_.try_lock())
        return false;
    owner_.store(std::this_thread::get_id(), std::memory_order_relaxed);
    return true;
}

void Mutex::unlock()
{
    assert(held_by_current_thread());
    owner_.store(std::thread::id{}, std::memory_order_relaxed);
    mutex_.unlock();
}

}  // namespace dce
