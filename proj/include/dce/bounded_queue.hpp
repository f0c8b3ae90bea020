#pragma once

#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <utility>

#include "dce/condvar.hpp"
#include "dce/mutex.hpp"

namespace dce {

// Capacity-bounded FIFO queue guarded by one lock and a single condition
// variable shared by producers and consumers. Producers wait for "not full",
// consumers for "not empty", and every mutation hands the wakeup to one
// eligible peer.
template <class T>
class BoundedQueue {
  public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity)
    {
        if (capacity == 0)
            throw std::invalid_argument("BoundedQueue capacity must be positive");
    }

    void enq(T value)
    {
        std::unique_lock<Mutex> lk(mutex_);
        cv_.wait_dce(lk, [this] { return items_.size() < capacity_; });
        items_.push_back(std::move(value));
        cv_.signal_dce(lk);
    }

    T deq()
    {
        std::unique_lock<Mutex> lk(mutex_);
        cv_.wait_dce(lk, [this] { return !items_.empty(); });
        T value = std::move(items_.front());
        items_.pop_front();
        cv_.signal_dce(lk);
        return value;
    }

    // Returns false instead of blocking when the queue is full.
    bool try_enq(T value)
    {
        std::unique_lock<Mutex> lk(mutex_);
        if (items_.size() >= capacity_)
            return false;
        items_.push_back(std::move(value));
        cv_.signal_dce(lk);
        return true;
    }

    std::optional<T> try_deq()
    {
        std::unique_lock<Mutex> lk(mutex_);
        if (items_.empty())
            return std::nullopt;
        std::optional<T> value(std::move(items_.front()));
        items_.pop_front();
        cv_.signal_dce(lk);
        return value;
    }

    std::size_t size() const
    {
        std::lock_guard<Mutex> lk(mutex_);
        return items_.size();
    }

    std::size_t capacity() const noexcept { return capacity_; }

    CondVarStats cv_stats() const { return cv_.stats(); }

  private:
    const std::size_t capacity_;
    mutable Mutex mutex_;
    DceCondVar cv_;
    std::deque<T> items_;
};

}  // namespace dce
