#include "dce/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <latch>
#include <new>
#include <numeric>
#include <stdexcept>
#include <system_error>
#include <thread>

namespace dce::bench {

std::string_view to_string(Mode mode) noexcept
{
    return mode == Mode::kLegacy ? "legacy" : "dce";
}

std::optional<Mode> parse_mode(std::string_view text) noexcept
{
    if (text == "legacy")
        return Mode::kLegacy;
    if (text == "dce")
        return Mode::kDce;
    return std::nullopt;
}

void validate(const Config& config)
{
    if (config.consumers < 1)
        throw std::invalid_argument("consumers must be at least 1");
    if (config.runs < 1)
        throw std::invalid_argument("runs must be at least 1");
    if (!(config.duration_s > 0) || !std::isfinite(config.duration_s))
        throw std::invalid_argument("duration must be a positive number of seconds");
    if (config.pad_bytes < sizeof(std::atomic<int>) || (config.pad_bytes & (config.pad_bytes - 1)) != 0)
        throw std::invalid_argument("pad_bytes must be a power of two no smaller than an int");
}

// ---------------------------------------------------------------------------
// SlotArray

SlotArray::SlotArray(std::size_t count, std::size_t pad_bytes)
    : count_(count),
      stride_(std::max(pad_bytes, sizeof(std::atomic<int>))),
      align_(std::max(pad_bytes, alignof(std::atomic<int>))),
      storage_(static_cast<std::byte*>(::operator new(count * stride_, std::align_val_t{align_})))
{
    for (std::size_t i = 0; i < count_; ++i)
        new (storage_ + i * stride_) std::atomic<int>(0);
}

SlotArray::~SlotArray()
{
    for (std::size_t i = 0; i < count_; ++i)
        (*this)[i].~atomic();
    ::operator delete(storage_, std::align_val_t{align_});
}

std::atomic<int>& SlotArray::operator[](std::size_t i) noexcept
{
    return *std::launder(reinterpret_cast<std::atomic<int>*>(storage_ + i * stride_));
}

// ---------------------------------------------------------------------------
// Workload

Workload::Workload(std::uint64_t seed, std::size_t slots, std::uint32_t max_work_iters)
    : rng_(seed), slot_dist_(0, slots - 1), max_work_iters_(max_work_iters)
{
}

std::size_t Workload::next_slot()
{
    return slot_dist_(rng_);
}

std::uint32_t Workload::next_work_length()
{
    if (max_work_iters_ == 0)
        return 0;
    return std::uniform_int_distribution<std::uint32_t>(0, max_work_iters_ - 1)(rng_);
}

std::uint64_t local_work(std::uint32_t iterations, std::uint64_t seed) noexcept
{
    std::minstd_rand gen(static_cast<std::minstd_rand::result_type>(seed | 1));
    std::uint64_t acc = 0;
    for (std::uint32_t i = 0; i < iterations; ++i)
        acc += gen();
    return acc;
}

// ---------------------------------------------------------------------------
// Threads

std::uint64_t run_producer(SlotArray& slots, Sync& sync, Mode mode, const std::atomic<bool>& stop,
                           Workload& workload)
{
    std::uint64_t produced = 0;
    std::uint64_t sink = 0;
    while (!stop.load(std::memory_order_relaxed)) {
        std::atomic<int>& slot = slots[workload.next_slot()];
        std::uint32_t work = workload.next_work_length();

        // The consumer has not taken the previous item yet. Spin outside
        // the lock so the consumer can get in.
        while (slot.load(std::memory_order_acquire) != 0) {
            if (stop.load(std::memory_order_relaxed))
                return produced;
            std::this_thread::yield();
        }

        {
            std::unique_lock<Mutex> lk(sync.lock);
            slot.store(1, std::memory_order_release);
            if (mode == Mode::kLegacy)
                sync.cv.broadcast_all(lk);
            else
                sync.cv.signal_dce(lk);
        }
        ++produced;
        sink += local_work(work, produced);
    }
    // Keep the work loop observable.
    static std::atomic<std::uint64_t> g_sink{0};
    g_sink.fetch_add(sink, std::memory_order_relaxed);
    return produced;
}

ConsumerResult run_consumer_legacy(std::atomic<int>& slot, DceCondVar& cv, Mutex& lock,
                                   const std::atomic<bool>& stop)
{
    ConsumerResult result;
    std::unique_lock<Mutex> lk(lock);
    for (;;) {
        while (slot.load(std::memory_order_relaxed) == 0 && !stop.load(std::memory_order_relaxed)) {
            cv.wait_legacy(lk);
            if (slot.load(std::memory_order_relaxed) == 0 && !stop.load(std::memory_order_relaxed))
                ++result.futile_wakeups;
        }
        if (slot.load(std::memory_order_relaxed) == 0)
            break;
        slot.store(0, std::memory_order_release);
        ++result.processed;
    }
    return result;
}

ConsumerResult run_consumer_dce(std::atomic<int>& slot, DceCondVar& cv, Mutex& lock,
                                const std::atomic<bool>& stop)
{
    ConsumerResult result;
    std::unique_lock<Mutex> lk(lock);
    for (;;) {
        result.futile_wakeups += cv.wait_dce(lk, [&] {
            return slot.load(std::memory_order_relaxed) != 0 || stop.load(std::memory_order_relaxed);
        });
        if (slot.load(std::memory_order_relaxed) == 0)
            break;
        slot.store(0, std::memory_order_release);
        ++result.processed;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Runs

RunRecord run_once(const Config& config, std::uint32_t run_index)
{
    SlotArray slots(config.consumers, config.pad_bytes);
    Sync sync;
    std::atomic<bool> stop_producer{false};
    std::vector<ConsumerResult> results(config.consumers);
    std::latch ready(config.consumers);

    std::vector<std::thread> consumers;
    consumers.reserve(config.consumers);

    auto stop_consumers = [&] {
        {
            std::unique_lock<Mutex> lk(sync.lock);
            sync.stop_consumers.store(true, std::memory_order_relaxed);
            if (config.mode == Mode::kLegacy)
                sync.cv.broadcast_all(lk);
            else
                sync.cv.broadcast_dce(lk);
        }
        for (auto& t : consumers)
            t.join();
    };

    try {
        for (std::uint32_t i = 0; i < config.consumers; ++i) {
            consumers.emplace_back([&, i] {
                ready.count_down();
                results[i] = config.mode == Mode::kLegacy
                                 ? run_consumer_legacy(slots[i], sync.cv, sync.lock, sync.stop_consumers)
                                 : run_consumer_dce(slots[i], sync.cv, sync.lock, sync.stop_consumers);
            });
        }
    } catch (...) {
        // The unstarted consumers never count down; nobody waits on the latch.
        stop_consumers();
        throw;
    }
    ready.wait();

    RunRecord record;
    record.run = run_index;
    Workload workload(config.seed, config.consumers, config.max_work_iters);

    auto start = std::chrono::steady_clock::now();
    std::thread producer;
    try {
        producer = std::thread([&] {
            record.produced_items = run_producer(slots, sync, config.mode, stop_producer, workload);
        });
    } catch (...) {
        stop_consumers();
        throw;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(config.duration_s));
    stop_producer.store(true, std::memory_order_relaxed);
    producer.join();
    record.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    stop_consumers();
    for (const auto& r : results) {
        record.consumed_items += r.processed;
        record.futile_wakeups += r.futile_wakeups;
    }
    return record;
}

Report run_benchmark(const Config& config)
{
    validate(config);
    Report report;
    report.mode = config.mode;
    report.consumers = config.consumers;
    for (std::uint32_t run = 0; run < config.runs; ++run) {
        try {
            report.runs.push_back(run_once(config, run));
        } catch (const std::system_error& e) {
            report.errors.push_back("run " + std::to_string(run) + ": " + e.what());
            break;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Aggregates

namespace {

template <class F>
double mean_of(const std::vector<RunRecord>& runs, F field)
{
    if (runs.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto& r : runs)
        sum += field(r);
    return sum / static_cast<double>(runs.size());
}

}  // namespace

double Report::throughput_mean() const
{
    return mean_of(runs, [](const RunRecord& r) { return r.throughput(); });
}

double Report::throughput_stddev() const
{
    if (runs.size() < 2)
        return 0.0;
    double m = throughput_mean();
    double ss = 0.0;
    for (const auto& r : runs)
        ss += (r.throughput() - m) * (r.throughput() - m);
    return std::sqrt(ss / static_cast<double>(runs.size() - 1));
}

double Report::futile_mean() const
{
    return mean_of(runs, [](const RunRecord& r) { return static_cast<double>(r.futile_wakeups); });
}

double Report::produced_mean() const
{
    return mean_of(runs, [](const RunRecord& r) { return static_cast<double>(r.produced_items); });
}

double Report::duration_mean() const
{
    return mean_of(runs, [](const RunRecord& r) { return r.duration_s; });
}

}  // namespace dce::bench
