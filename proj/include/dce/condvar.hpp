#pragma once

#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <utility>

#include "dce/mutex.hpp"
#include "dce/parking.hpp"

namespace dce {

// Non-owning reference to a predicate: a function pointer plus its argument,
// the same shape a C caller passes.
struct PredicateRef {
    bool (*fn)(void*) = nullptr;
    void* arg = nullptr;

    bool operator()() const { return fn(arg); }
};

// Non-owning reference to a delegated action. The callee stores any result
// through `arg`; exceptions escaping `fn` are captured by the executor.
struct ActionRef {
    void (*fn)(void*) = nullptr;
    void* arg = nullptr;

    void operator()() const { fn(arg); }
};

template <class F>
PredicateRef make_predicate_ref(F& f)
{
    return {[](void* p) -> bool { return static_cast<bool>((*static_cast<F*>(p))()); }, &f};
}

struct CondVarStats {
    std::uint64_t signals_sent = 0;          // wakeups delivered to waiters
    std::uint64_t predicates_evaluated = 0;  // by scanning threads
    std::uint64_t futile_wakeups = 0;
    std::uint64_t broadcasts = 0;
};

enum class SignalOutcome { kWoke, kNoneReady, kEmpty };

struct SignalResult {
    SignalOutcome outcome = SignalOutcome::kEmpty;
    std::thread::id woken{};  // the thread whose node was woken, for kWoke
};

namespace detail {

enum class NodeMode : std::uint8_t { kDce, kLegacy, kRcv };
enum class NodeStatus : std::uint8_t { kWaiting, kSignaled, kActionDone };

struct WaitNode {
    NodeMode mode;
    PredicateRef predicate{};
    ActionRef action{};
    std::exception_ptr action_error{};
    ParkToken token{};
    std::atomic<NodeStatus> status{NodeStatus::kWaiting};
    std::thread::id owner = std::this_thread::get_id();
    WaitNode* prev = nullptr;
    WaitNode* next = nullptr;
};

}  // namespace detail

// Condition variable with delegated condition evaluation.
//
// Waiters register the predicate they wait for. Signalers evaluate the
// registered predicates under the user lock and wake only waiters whose
// predicate holds. The legacy operations (wait_legacy, broadcast_all) keep
// the usual semantics for comparison and for barrier-style broadcasts.
//
// Every signal/broadcast must be issued while holding the user lock that the
// waiters passed to their wait calls. Predicates and delegated actions run on
// whichever thread performs the scan.
class DceCondVar {
  public:
    DceCondVar() = default;
    DceCondVar(const DceCondVar&) = delete;
    DceCondVar& operator=(const DceCondVar&) = delete;
    ~DceCondVar();

    // Blocks until `pred` holds; returns with `lk` held and `pred` true.
    // The return value is the number of futile wakeups absorbed by this call
    // (a wakeup after which the predicate was found false again).
    unsigned wait_dce(std::unique_lock<Mutex>& lk, PredicateRef pred);

    template <class Pred>
    unsigned wait_dce(std::unique_lock<Mutex>& lk, Pred pred)
    {
        return wait_dce(lk, make_predicate_ref(pred));
    }

    // Blocks once and returns after any wakeup, including a spurious one.
    // The caller re-checks its own condition.
    void wait_legacy(std::unique_lock<Mutex>& lk);

    // Delegates `action` to run under the lock at a moment `pred` holds.
    // Returns with `lk` released. Faults raised by the action are rethrown
    // here, on the waiting thread.
    void wait_rcv(std::unique_lock<Mutex>& lk, PredicateRef pred, ActionRef action);

    template <class Pred, class Action>
    std::invoke_result_t<Action&> wait_rcv(std::unique_lock<Mutex>& lk, Pred pred, Action action)
    {
        using Result = std::invoke_result_t<Action&>;
        if constexpr (std::is_void_v<Result>) {
            wait_rcv(lk, make_predicate_ref(pred),
                     ActionRef{[](void* a) { (*static_cast<Action*>(a))(); }, &action});
        } else {
            struct Slot {
                Action* action;
                std::optional<Result> result;
            } slot{&action, std::nullopt};
            wait_rcv(lk, make_predicate_ref(pred), ActionRef{[](void* s) {
                         auto* sl = static_cast<Slot*>(s);
                         sl->result.emplace((*sl->action)());
                     }, &slot});
            return std::move(*slot.result);
        }
    }

    // Wakes the earliest waiter whose predicate holds.
    SignalResult signal_dce(const Mutex& held);
    SignalResult signal_dce(const std::unique_lock<Mutex>& held) { return signal_dce(*held.mutex()); }

    // Wakes every waiter whose predicate holds; returns how many.
    std::size_t broadcast_dce(const Mutex& held);
    std::size_t broadcast_dce(const std::unique_lock<Mutex>& held) { return broadcast_dce(*held.mutex()); }

    // Wakes every waiter without evaluating predicates.
    std::size_t broadcast_all(const Mutex& held);
    std::size_t broadcast_all(const std::unique_lock<Mutex>& held) { return broadcast_all(*held.mutex()); }

    CondVarStats stats() const;
    std::size_t waiter_count() const;

  private:
    using Node = detail::WaitNode;

    void enqueue(Node& node);
    void unlink(Node& node);
    // Marks `node` as woken (running its action first for RCV nodes when
    // `run_action`); guard_ must be held.
    void claim(Node& node, bool run_action);
    SignalResult scan_one();
    void await_wakeup(Node& node);
    void record_futile();

    mutable std::mutex guard_;
    Node* head_ = nullptr;
    Node* tail_ = nullptr;
    std::size_t count_ = 0;
    CondVarStats stats_;
};

}  // namespace dce
