#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dce/condvar.hpp"
#include "dce/mutex.hpp"

// Producer/consumer microbenchmark comparing broadcast-based legacy
// signaling with delegated condition evaluation.
//
// One producer fills randomly chosen per-consumer slots; each consumer waits
// for its own slot and clears it. In legacy mode the producer broadcasts
// after every write and consumers re-check in a loop. In DCE mode consumers
// register "my slot is set" and the producer wakes exactly that consumer.
namespace dce::bench {

enum class Mode { kLegacy, kDce };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;

struct Config {
    Mode mode = Mode::kDce;
    std::uint32_t consumers = 1;
    double duration_s = 5.0;  // per run
    std::uint32_t runs = 7;
    std::uint32_t max_work_iters = 512;
    std::uint64_t seed = 1;
    std::size_t pad_bytes = 64;
};

// Throws std::invalid_argument describing the first bad field.
void validate(const Config& config);

// One int cell per consumer, each on its own padded line.
class SlotArray {
  public:
    SlotArray(std::size_t count, std::size_t pad_bytes);
    ~SlotArray();
    SlotArray(const SlotArray&) = delete;
    SlotArray& operator=(const SlotArray&) = delete;

    std::size_t size() const noexcept { return count_; }
    std::size_t stride() const noexcept { return stride_; }
    std::atomic<int>& operator[](std::size_t i) noexcept;

  private:
    std::size_t count_;
    std::size_t stride_;
    std::size_t align_;
    std::byte* storage_;
};

// Seeded source of the producer's slot picks and local-work lengths.
class Workload {
  public:
    Workload(std::uint64_t seed, std::size_t slots, std::uint32_t max_work_iters);

    std::size_t next_slot();
    // Uniform in [0, max_work_iters); always 0 when max_work_iters is 0.
    std::uint32_t next_work_length();

  private:
    std::mt19937_64 rng_;
    std::uniform_int_distribution<std::size_t> slot_dist_;
    std::uint32_t max_work_iters_;
};

// Steps a small PRNG `iterations` times and returns its final state.
std::uint64_t local_work(std::uint32_t iterations, std::uint64_t seed) noexcept;

struct Sync {
    Mutex lock;
    DceCondVar cv;
    std::atomic<bool> stop_consumers{false};  // written under `lock`
};

std::uint64_t run_producer(SlotArray& slots, Sync& sync, Mode mode, const std::atomic<bool>& stop,
                           Workload& workload);

struct ConsumerResult {
    std::uint64_t processed = 0;
    std::uint64_t futile_wakeups = 0;
};

ConsumerResult run_consumer_legacy(std::atomic<int>& slot, DceCondVar& cv, Mutex& lock,
                                   const std::atomic<bool>& stop);
ConsumerResult run_consumer_dce(std::atomic<int>& slot, DceCondVar& cv, Mutex& lock,
                                const std::atomic<bool>& stop);

struct RunRecord {
    std::uint32_t run = 0;
    std::uint64_t produced_items = 0;
    std::uint64_t consumed_items = 0;
    std::uint64_t futile_wakeups = 0;
    double duration_s = 0.0;

    double throughput() const noexcept { return duration_s > 0 ? produced_items / duration_s : 0.0; }
};

struct Report {
    Mode mode = Mode::kDce;
    std::uint32_t consumers = 0;
    std::vector<RunRecord> runs;
    std::vector<std::string> errors;

    double throughput_mean() const;
    double throughput_stddev() const;  // sample standard deviation
    double futile_mean() const;
    double produced_mean() const;
    double duration_mean() const;
};

// One run with fresh state. Throws std::system_error if threads cannot be
// spawned; every thread that did start is stopped and joined first.
RunRecord run_once(const Config& config, std::uint32_t run_index);

// Validates, then performs config.runs runs. A failed run is recorded in
// Report::errors and ends the series; completed runs are kept.
Report run_benchmark(const Config& config);

enum class Format { kCsv, kJson };

std::string emit_report(const Report& report, Format format, bool include_header = true);

// Inverse of emit_report(..., Format::kJson). Throws on malformed input.
Report parse_report_json(std::string_view text);

}  // namespace dce::bench
