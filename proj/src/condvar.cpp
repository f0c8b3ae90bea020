#include "dce/condvar.hpp"

namespace dce {

using detail::NodeMode;
using detail::NodeStatus;

namespace {

// Unparks a chain of claimed nodes linked through `next`. A node may be
// destroyed by its owner as soon as it is unparked, so `next` is read first.
void wake_chain(detail::WaitNode* chain)
{
    while (chain) {
        detail::WaitNode* next = chain->next;
        chain->token.unpark();
        chain = next;
    }
}

}  // namespace

DceCondVar::~DceCondVar()
{
    assert(head_ == nullptr && "condition variable destroyed with waiters");
}

void DceCondVar::enqueue(Node& node)
{
    std::lock_guard<std::mutex> g(guard_);
    node.status.store(NodeStatus::kWaiting, std::memory_order_relaxed);
    node.next = nullptr;
    node.prev = tail_;
    if (tail_)
        tail_->next = &node;
    else
        head_ = &node;
    tail_ = &node;
    ++count_;
}

void DceCondVar::unlink(Node& node)
{
    if (node.prev)
        node.prev->next = node.next;
    else
        head_ = node.next;
    if (node.next)
        node.next->prev = node.prev;
    else
        tail_ = node.prev;
    node.prev = node.next = nullptr;
    --count_;
}

void DceCondVar::claim(Node& node, bool run_action)
{
    if (run_action && node.mode == NodeMode::kRcv) {
        try {
            node.action();
        } catch (...) {
            node.action_error = std::current_exception();
        }
        node.status.store(NodeStatus::kActionDone, std::memory_order_release);
    } else {
        node.status.store(NodeStatus::kSignaled, std::memory_order_release);
    }
    ++stats_.signals_sent;
}

SignalResult DceCondVar::scan_one()
{
    std::unique_lock<std::mutex> g(guard_);
    if (!head_)
        return {SignalOutcome::kEmpty, {}};
    for (Node* n = head_; n; n = n->next) {
        bool ready = true;
        if (n->mode != NodeMode::kLegacy) {
            ++stats_.predicates_evaluated;
            ready = n->predicate();
        }
        if (ready) {
            unlink(*n);
            claim(*n, true);
            std::thread::id woken = n->owner;
            g.unlock();
            n->token.unpark();
            return {SignalOutcome::kWoke, woken};
        }
    }
    return {SignalOutcome::kNoneReady, {}};
}

SignalResult DceCondVar::signal_dce(const Mutex& held)
{
    assert(held.held_by_current_thread() && "signal_dce requires the user lock");
    (void)held;
    return scan_one();
}

std::size_t DceCondVar::broadcast_dce(const Mutex& held)
{
    assert(held.held_by_current_thread() && "broadcast_dce requires the user lock");
    (void)held;

    Node* chain = nullptr;
    Node* chain_tail = nullptr;
    std::size_t woken = 0;
    std::unique_lock<std::mutex> g(guard_);
    ++stats_.broadcasts;
    try {
        for (Node* n = head_; n;) {
            Node* next = n->next;
            bool ready = true;
            if (n->mode != NodeMode::kLegacy) {
                ++stats_.predicates_evaluated;
                ready = n->predicate();
            }
            if (ready) {
                unlink(*n);
                claim(*n, true);
                (chain_tail ? chain_tail->next : chain) = n;
                chain_tail = n;
                ++woken;
            }
            n = next;
        }
    } catch (...) {
        g.unlock();
        wake_chain(chain);
        throw;
    }
    g.unlock();
    wake_chain(chain);
    return woken;
}

std::size_t DceCondVar::broadcast_all(const Mutex& held)
{
    assert(held.held_by_current_thread() && "broadcast_all requires the user lock");
    (void)held;

    std::unique_lock<std::mutex> g(guard_);
    ++stats_.broadcasts;
    Node* chain = head_;
    std::size_t woken = count_;
    for (Node* n = head_; n; n = n->next)
        claim(*n, false);
    head_ = tail_ = nullptr;
    count_ = 0;
    g.unlock();
    wake_chain(chain);
    return woken;
}

void DceCondVar::await_wakeup(Node& node)
{
    if (node.mode == NodeMode::kLegacy) {
        if (node.token.park())
            return;
        {
            std::lock_guard<std::mutex> g(guard_);
            if (node.status.load(std::memory_order_relaxed) == NodeStatus::kWaiting) {
                unlink(node);
                node.status.store(NodeStatus::kSignaled, std::memory_order_relaxed);
                return;
            }
        }
        // Claimed concurrently: the unpark is on its way and must be
        // consumed before the node goes out of scope.
    }
    while (!node.token.park()) {
    }
    assert(node.status.load(std::memory_order_acquire) != NodeStatus::kWaiting);
}

void DceCondVar::record_futile()
{
    std::lock_guard<std::mutex> g(guard_);
    ++stats_.futile_wakeups;
}

unsigned DceCondVar::wait_dce(std::unique_lock<Mutex>& lk, PredicateRef pred)
{
    assert(lk.owns_lock() && lk.mutex()->held_by_current_thread());
    if (pred())
        return 0;

    Node node{NodeMode::kDce, pred};
    unsigned futile = 0;
    for (;;) {
        enqueue(node);
        lk.unlock();
        await_wakeup(node);
        lk.lock();
        if (pred())
            return futile;
        // The state changed between the wakeup and reacquiring the lock.
        // Pass the consumed wakeup on and queue again at the tail.
        ++futile;
        record_futile();
        scan_one();
    }
}

void DceCondVar::wait_legacy(std::unique_lock<Mutex>& lk)
{
    assert(lk.owns_lock() && lk.mutex()->held_by_current_thread());
    Node node{NodeMode::kLegacy};
    enqueue(node);
    lk.unlock();
    await_wakeup(node);
    lk.lock();
}

void DceCondVar::wait_rcv(std::unique_lock<Mutex>& lk, PredicateRef pred, ActionRef action)
{
    assert(lk.owns_lock() && lk.mutex()->held_by_current_thread());
    auto run_inline = [&] {
        try {
            action();
        } catch (...) {
            lk.unlock();
            throw;
        }
        lk.unlock();
    };
    if (pred()) {
        run_inline();
        return;
    }

    Node node{NodeMode::kRcv, pred, action};
    for (;;) {
        enqueue(node);
        lk.unlock();
        await_wakeup(node);
        if (node.status.load(std::memory_order_acquire) == NodeStatus::kActionDone) {
            if (node.action_error)
                std::rethrow_exception(node.action_error);
            return;
        }
        // Woken by broadcast_all without the action having run.
        lk.lock();
        if (pred()) {
            run_inline();
            return;
        }
        record_futile();
        scan_one();
    }
}

CondVarStats DceCondVar::stats() const
{
    std::lock_guard<std::mutex> g(guard_);
    return stats_;
}

std::size_t DceCondVar::waiter_count() const
{
    std::lock_guard<std::mutex> g(guard_);
    return count_;
}

}  // namespace dce
