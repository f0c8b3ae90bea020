#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dce/condvar.hpp"
#include "sched.hpp"
#include "staged.hpp"

using dce::DceCondVar;
using dce::Mutex;
using dce::SignalOutcome;
using dce_test::wait_until;
using Lock = std::unique_lock<Mutex>;

namespace {

// Starts `body` on a new thread and waits until it is parked on `cv`.
std::thread start_parked(DceCondVar& cv, std::function<void()> body)
{
    auto listed = cv.waiter_count();
    auto parked = dce::testing::blocked_parkers();
    std::thread t(std::move(body));
    REQUIRE(wait_until(
        [&] { return cv.waiter_count() == listed + 1 && dce::testing::blocked_parkers() == parked + 1; }));
    return t;
}

}  // namespace

TEST_CASE("fresh condition variable has zero counters")
{
    DceCondVar cv;
    auto s = cv.stats();
    CHECK(s.signals_sent == 0);
    CHECK(s.predicates_evaluated == 0);
    CHECK(s.futile_wakeups == 0);
    CHECK(s.broadcasts == 0);
    CHECK(cv.waiter_count() == 0);
}

TEST_CASE("wait_dce returns immediately when the predicate already holds")
{
    Mutex m;
    DceCondVar cv;
    Lock lk(m);
    CHECK(cv.wait_dce(lk, [] { return true; }) == 0);
    CHECK(lk.owns_lock());
    CHECK(m.held_by_current_thread());
    CHECK(cv.waiter_count() == 0);
    CHECK(cv.stats().predicates_evaluated == 0);
}

TEST_CASE("flag waiter returns once another thread sets the flag and signals")
{
    Mutex m;
    DceCondVar cv;
    int flag = 0;
    int seen = -1;
    auto t = start_parked(cv, [&] {
        Lock lk(m);
        cv.wait_dce(lk, [&] { return flag == 1; });
        CHECK(m.held_by_current_thread());
        seen = flag;
    });
    {
        Lock lk(m);
        flag = 1;
        CHECK(cv.signal_dce(lk).outcome == SignalOutcome::kWoke);
    }
    t.join();
    CHECK(seen == 1);
}

TEST_CASE("signal wakes only the waiter whose flag was set")
{
    Mutex m;
    DceCondVar cv;
    bool flag_a = false, flag_b = false;
    std::atomic<bool> a_done{false}, b_done{false};
    auto ta = start_parked(cv, [&] {
        Lock lk(m);
        cv.wait_dce(lk, [&] { return flag_a; });
        a_done = true;
    });
    auto tb = start_parked(cv, [&] {
        Lock lk(m);
        cv.wait_dce(lk, [&] { return flag_b; });
        b_done = true;
    });
    {
        Lock lk(m);
        flag_b = true;
        auto r = cv.signal_dce(lk);
        CHECK(r.outcome == SignalOutcome::kWoke);
        CHECK(r.woken == tb.get_id());
    }
    tb.join();
    CHECK(b_done);
    CHECK_FALSE(a_done);
    CHECK(cv.waiter_count() == 1);

    {
        Lock lk(m);
        flag_a = true;
        cv.signal_dce(lk);
    }
    ta.join();
    CHECK(a_done);
}

TEST_CASE("signal over [false, true, true] wakes the first true waiter only")
{
    Mutex m;
    DceCondVar cv;
    std::array<bool, 3> flags{};
    std::array<std::atomic<bool>, 3> done{};
    std::vector<std::thread> ts;
    for (int i = 0; i < 3; ++i) {
        ts.push_back(start_parked(cv, [&, i] {
            Lock lk(m);
            cv.wait_dce(lk, [&] { return flags[i]; });
            done[i] = true;
        }));
    }
    {
        Lock lk(m);
        flags[1] = flags[2] = true;
        auto before = cv.stats();
        auto r = cv.signal_dce(lk);
        auto after = cv.stats();
        CHECK(r.outcome == SignalOutcome::kWoke);
        CHECK(r.woken == ts[1].get_id());
        CHECK(after.predicates_evaluated - before.predicates_evaluated == 2);
        CHECK(after.signals_sent == 1);
        CHECK(after.predicates_evaluated == 2);
    }
    ts[1].join();
    CHECK_FALSE(done[0]);
    CHECK(done[1]);
    CHECK_FALSE(done[2]);
    CHECK(cv.waiter_count() == 2);
    {
        Lock lk(m);
        flags[0] = true;
        CHECK(cv.broadcast_dce(lk) == 2);
    }
    ts[0].join();
    ts[2].join();
}

TEST_CASE("signal on an empty wait list reports EMPTY")
{
    Mutex m;
    DceCondVar cv;
    Lock lk(m);
    CHECK(cv.signal_dce(lk).outcome == SignalOutcome::kEmpty);
    CHECK(cv.stats().signals_sent == 0);
}

TEST_CASE("signal with no true predicate wakes nobody and reports NONE_READY")
{
    Mutex m;
    DceCondVar cv;
    bool flag = false;
    std::vector<std::thread> ts;
    for (int i = 0; i < 2; ++i)
        ts.push_back(start_parked(cv, [&] {
            Lock lk(m);
            cv.wait_dce(lk, [&] { return flag; });
        }));
    {
        Lock lk(m);
        CHECK(cv.signal_dce(lk).outcome == SignalOutcome::kNoneReady);
        CHECK(cv.stats().predicates_evaluated == 2);
        CHECK(cv.stats().signals_sent == 0);
    }
    CHECK(cv.waiter_count() == 2);
    CHECK(dce::testing::blocked_parkers() == 2);
    {
        Lock lk(m);
        flag = true;
        CHECK(cv.broadcast_dce(lk) == 2);
    }
    for (auto& t : ts)
        t.join();
}

TEST_CASE("broadcast_dce wakes exactly the waiters whose predicate holds")
{
    Mutex m;
    DceCondVar cv;
    std::array<bool, 3> flags{};
    std::vector<std::thread> ts;
    for (int i = 0; i < 3; ++i)
        ts.push_back(start_parked(cv, [&, i] {
            Lock lk(m);
            cv.wait_dce(lk, [&] { return flags[i]; });
        }));

    SUBCASE("mixed")
    {
        Lock lk(m);
        flags[1] = flags[2] = true;
        CHECK(cv.broadcast_dce(lk) == 2);
        CHECK(cv.stats().predicates_evaluated == 3);
        lk.unlock();
        ts[1].join();
        ts[2].join();
        CHECK(cv.waiter_count() == 1);
    }
    SUBCASE("all false")
    {
        Lock lk(m);
        CHECK(cv.broadcast_dce(lk) == 0);
        CHECK(cv.waiter_count() == 3);
        CHECK(cv.stats().signals_sent == 0);
    }
    SUBCASE("all true behaves like broadcast_all")
    {
        Lock lk(m);
        flags = {true, true, true};
        CHECK(cv.broadcast_dce(lk) == 3);
        lk.unlock();
        for (auto& t : ts)
            t.join();
        CHECK(cv.waiter_count() == 0);
        CHECK(cv.stats().futile_wakeups == 0);
    }

    {
        Lock lk(m);
        flags = {true, true, true};
        cv.broadcast_dce(lk);
    }
    for (auto& t : ts)
        if (t.joinable())
            t.join();
}

TEST_CASE("broadcast_all wakes every legacy waiter")
{
    Mutex m;
    DceCondVar cv;
    std::atomic<int> returned{0};
    std::vector<std::thread> ts;
    for (int i = 0; i < 5; ++i)
        ts.push_back(start_parked(cv, [&] {
            Lock lk(m);
            cv.wait_legacy(lk);
            CHECK(m.held_by_current_thread());
            returned.fetch_add(1);
        }));
    {
        Lock lk(m);
        CHECK(cv.broadcast_all(lk) == 5);
    }
    for (auto& t : ts)
        t.join();
    CHECK(returned == 5);
    CHECK(cv.stats().broadcasts == 1);
    CHECK(cv.stats().signals_sent == 5);
}

TEST_CASE("broadcast_all over false DCE predicates produces one futile wakeup each")
{
    Mutex m;
    DceCondVar cv;
    bool flag = false;
    std::vector<std::thread> ts;
    for (int i = 0; i < 3; ++i)
        ts.push_back(start_parked(cv, [&] {
            Lock lk(m);
            cv.wait_dce(lk, [&] { return flag; });
        }));
    {
        Lock lk(m);
        CHECK(cv.broadcast_all(lk) == 3);
    }
    // All three re-check, find the flag clear, and queue again.
    REQUIRE(wait_until([&] {
        return cv.stats().futile_wakeups == 3 && cv.waiter_count() == 3 && dce::testing::blocked_parkers() == 3;
    }));
    auto s = cv.stats();
    CHECK(s.futile_wakeups <= s.signals_sent);
    {
        Lock lk(m);
        flag = true;
        cv.broadcast_dce(lk);
    }
    for (auto& t : ts)
        t.join();
    CHECK(cv.stats().futile_wakeups == 3);
}

TEST_CASE("broadcast_all as a barrier evaluates no predicates")
{
    Mutex m;
    DceCondVar cv;
    bool released = false;
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i)
        ts.push_back(start_parked(cv, [&] {
            Lock lk(m);
            cv.wait_dce(lk, [&] { return released; });
        }));
    {
        Lock lk(m);
        released = true;
        CHECK(cv.broadcast_all(lk) == 4);
        CHECK(cv.stats().predicates_evaluated == 0);
    }
    for (auto& t : ts)
        t.join();
    CHECK(cv.stats().futile_wakeups == 0);
}

TEST_CASE("signal_dce wakes the first legacy waiter in FIFO order")
{
    Mutex m;
    DceCondVar cv;
    std::array<std::atomic<bool>, 2> done{};
    std::vector<std::thread> ts;
    for (int i = 0; i < 2; ++i)
        ts.push_back(start_parked(cv, [&, i] {
            Lock lk(m);
            cv.wait_legacy(lk);
            done[i] = true;
        }));
    {
        Lock lk(m);
        auto r = cv.signal_dce(lk);
        CHECK(r.outcome == SignalOutcome::kWoke);
        CHECK(r.woken == ts[0].get_id());
    }
    ts[0].join();
    CHECK_FALSE(done[1]);
    {
        Lock lk(m);
        cv.signal_dce(lk);
    }
    ts[1].join();
}

TEST_CASE("signal_dce picks the earliest-enqueued among true predicates")
{
    Mutex m;
    DceCondVar cv;
    bool go = false;
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i)
        ts.push_back(start_parked(cv, [&] {
            Lock lk(m);
            cv.wait_dce(lk, [&] { return go; });
        }));
    for (int i = 0; i < 4; ++i) {
        Lock lk(m);
        go = true;
        auto r = cv.signal_dce(lk);
        CHECK(r.woken == ts[i].get_id());
        lk.unlock();
        ts[i].join();
    }
}

TEST_CASE("an injected spurious wakeup makes wait_legacy return")
{
    Mutex m;
    DceCondVar cv;
    static std::atomic<bool> inject{false};
    dce::testing::set_park_hook([] { return inject.exchange(false); });
    inject = true;
    {
        Lock lk(m);
        cv.wait_legacy(lk);
        CHECK(lk.owns_lock());
    }
    CHECK(cv.waiter_count() == 0);
    dce::testing::set_park_hook(nullptr);
}

TEST_CASE("an injected spurious wakeup does not make wait_dce return")
{
    Mutex m;
    DceCondVar cv;
    static std::atomic<int> injected{0};
    dce::testing::set_park_hook([] { return injected.fetch_add(1) < 3; });
    bool flag = false;
    std::atomic<bool> done{false};
    std::thread t([&] {
        Lock lk(m);
        cv.wait_dce(lk, [&] { return flag; });
        done = true;
    });
    REQUIRE(wait_until([&] { return injected.load() > 3 && dce::testing::blocked_parkers() == 1; }));
    CHECK_FALSE(done);
    CHECK(cv.waiter_count() == 1);
    {
        Lock lk(m);
        flag = true;
        cv.signal_dce(lk);
    }
    t.join();
    CHECK(done);
    dce::testing::set_park_hook(nullptr);
}

TEST_CASE("a throwing predicate propagates to the signaler and leaves the waiter queued")
{
    Mutex m;
    DceCondVar cv;
    int state = 0;  // 0 wait, 1 throw, 2 proceed
    auto t = start_parked(cv, [&] {
        Lock lk(m);
        cv.wait_dce(lk, [&] {
            if (state == 1)
                throw std::runtime_error("bad predicate");
            return state == 2;
        });
    });
    {
        Lock lk(m);
        state = 1;
        CHECK_THROWS_AS(cv.signal_dce(lk), std::runtime_error);
        CHECK_THROWS_AS(cv.broadcast_dce(lk), std::runtime_error);
        CHECK(m.held_by_current_thread());
    }
    CHECK(cv.waiter_count() == 1);
    {
        Lock lk(m);
        state = 2;
        cv.signal_dce(lk);
    }
    t.join();
}

TEST_CASE("legacy and DCE waiters coexist on one condition variable")
{
    Mutex m;
    DceCondVar cv;
    bool flag = false;
    std::atomic<int> legacy_returns{0};
    auto dce_waiter = start_parked(cv, [&] {
        Lock lk(m);
        cv.wait_dce(lk, [&] { return flag; });
    });
    auto legacy_waiter = start_parked(cv, [&] {
        Lock lk(m);
        cv.wait_legacy(lk);
        legacy_returns.fetch_add(1);
    });
    {
        // The DCE waiter is first but false, so the legacy waiter is chosen.
        Lock lk(m);
        auto r = cv.signal_dce(lk);
        CHECK(r.woken == legacy_waiter.get_id());
    }
    legacy_waiter.join();
    CHECK(legacy_returns == 1);
    {
        Lock lk(m);
        flag = true;
        cv.signal_dce(lk);
    }
    dce_waiter.join();
}

TEST_CASE("canonical staged schedules produce the documented wake sets")
{
    dce_test::GateScope gate;
    // A, B, C register and park, then the controller sets B and C and scans.
    const std::vector<int> canonical{0, 0, 1, 1, 2, 2, 3, 3};

    dce_test::TargetedModel model;
    auto r = dce_test::run_targeted(canonical, dce_test::ScanKind::kSignal, &model);
    CHECK_MESSAGE(r.ok, r.failure);
    CHECK(model.signaled == 1);
    CHECK(model.evaluated == 2);
    CHECK(model.list == std::vector<int>{0, 2});

    r = dce_test::run_targeted(canonical, dce_test::ScanKind::kBroadcast, &model);
    CHECK_MESSAGE(r.ok, r.failure);
    CHECK(model.woken == 2);
    CHECK(model.list == std::vector<int>{0});
}

TEST_CASE("staged signal scenario matches the model in every interleaving")
{
    dce_test::GateScope gate;
    int failures = 0;
    auto n = dce_test::for_each_interleaving({0, 0, 1, 1, 2, 2, 3, 3}, [&](const std::vector<int>& seq) {
        auto r = dce_test::run_targeted(seq, dce_test::ScanKind::kSignal);
        if (!r.ok && failures++ < 5)
            FAIL_CHECK(r.failure);
    });
    CHECK(n == 2520);
    CHECK(failures == 0);
}

TEST_CASE("predicate holds on return and counters stay consistent under stress")
{
    // Threads pass a token around a ring; thread i proceeds when turn == i.
    constexpr int kThreads = 6;
    constexpr int kRounds = 2000;
    Mutex m;
    DceCondVar cv;
    int turn = 0;
    std::atomic<int> violations{0};
    std::atomic<bool> counter_bad{false};
    std::vector<std::thread> ts;
    for (int id = 0; id < kThreads; ++id) {
        ts.emplace_back([&, id] {
            for (int r = 0; r < kRounds; ++r) {
                Lock lk(m);
                cv.wait_dce(lk, [&] { return turn % kThreads == id; });
                if (turn % kThreads != id)
                    violations.fetch_add(1);
                ++turn;
                auto before = cv.stats();
                cv.signal_dce(lk);
                auto after = cv.stats();
                if (after.signals_sent - before.signals_sent > 1 || after.futile_wakeups > after.signals_sent)
                    counter_bad = true;
            }
        });
    }
    for (auto& t : ts)
        t.join();
    CHECK(violations == 0);
    CHECK_FALSE(counter_bad);
    CHECK(turn == kThreads * kRounds);
    // Every turn is falsified only by the thread that owned it.
    CHECK(cv.stats().futile_wakeups == 0);
}
