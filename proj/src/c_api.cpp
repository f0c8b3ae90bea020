#include "dce/dce.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <system_error>

#include "dce/bench.hpp"
#include "dce/bounded_queue.hpp"
#include "dce/condvar.hpp"
#include "dce/mutex.hpp"

struct dce_mutex {
    dce::Mutex impl;
};

struct dce_cond {
    dce::DceCondVar impl;
};

struct dce_queue {
    explicit dce_queue(std::size_t capacity) : impl(capacity) {}
    dce::BoundedQueue<std::int64_t> impl;
};

struct dce_bench_report {
    dce::bench::Report impl;
};

namespace {

thread_local std::string t_last_error;

struct ActionFault : std::runtime_error {
    ActionFault() : std::runtime_error("delegated action reported a fault") {}
};

dce_status fail(dce_status status, const char* message)
{
    t_last_error = message;
    return status;
}

template <class F>
dce_status guarded(F&& body)
{
    try {
        return body();
    } catch (const ActionFault& e) {
        return fail(DCE_EACTION, e.what());
    } catch (const std::bad_alloc&) {
        return fail(DCE_ENOMEM, "out of memory");
    } catch (const std::invalid_argument& e) {
        return fail(DCE_EINVAL, e.what());
    } catch (const std::system_error& e) {
        return fail(DCE_ERESOURCE, e.what());
    } catch (const std::exception& e) {
        return fail(DCE_EINTERNAL, e.what());
    } catch (...) {
        return fail(DCE_EINTERNAL, "unknown error");
    }
}

dce_status check_held(const dce_cond* cv, const dce_mutex* m)
{
    if (!cv || !m)
        return fail(DCE_EINVAL, "null condition variable or mutex");
    if (!m->impl.held_by_current_thread())
        return fail(DCE_ELOCK, "mutex is not held by the calling thread");
    return DCE_OK;
}

}  // namespace

extern "C" {

const char* dce_last_error(void)
{
    return t_last_error.c_str();
}

// ---------------------------------------------------------------------------
// Mutex

dce_status dce_mutex_create(dce_mutex** out)
{
    if (!out)
        return fail(DCE_EINVAL, "null output pointer");
    return guarded([&] {
        *out = new dce_mutex;
        return DCE_OK;
    });
}

dce_status dce_mutex_destroy(dce_mutex* m)
{
    delete m;
    return DCE_OK;
}

dce_status dce_mutex_lock(dce_mutex* m)
{
    if (!m)
        return fail(DCE_EINVAL, "null mutex");
    if (m->impl.held_by_current_thread())
        return fail(DCE_ELOCK, "mutex already held by the calling thread");
    m->impl.lock();
    return DCE_OK;
}

dce_status dce_mutex_trylock(dce_mutex* m, int* acquired)
{
    if (!m || !acquired)
        return fail(DCE_EINVAL, "null mutex or output pointer");
    *acquired = !m->impl.held_by_current_thread() && m->impl.try_lock();
    return DCE_OK;
}

dce_status dce_mutex_unlock(dce_mutex* m)
{
    if (!m)
        return fail(DCE_EINVAL, "null mutex");
    if (!m->impl.held_by_current_thread())
        return fail(DCE_ELOCK, "mutex is not held by the calling thread");
    m->impl.unlock();
    return DCE_OK;
}

// ---------------------------------------------------------------------------
// Condition variable

dce_status dce_cond_create(dce_cond** out)
{
    if (!out)
        return fail(DCE_EINVAL, "null output pointer");
    return guarded([&] {
        *out = new dce_cond;
        return DCE_OK;
    });
}

dce_status dce_cond_destroy(dce_cond* cv)
{
    if (cv && cv->impl.waiter_count() != 0)
        return fail(DCE_EINVAL, "condition variable still has waiters");
    delete cv;
    return DCE_OK;
}

dce_status dce_cond_wait(dce_cond* cv, dce_mutex* m)
{
    if (auto st = check_held(cv, m); st != DCE_OK)
        return st;
    return guarded([&] {
        std::unique_lock<dce::Mutex> lk(m->impl, std::adopt_lock);
        cv->impl.wait_legacy(lk);
        lk.release();
        return DCE_OK;
    });
}

dce_status dce_cond_wait_dce(dce_cond* cv, dce_mutex* m, dce_predicate_fn pred, void* pred_arg)
{
    if (auto st = check_held(cv, m); st != DCE_OK)
        return st;
    if (!pred)
        return fail(DCE_EINVAL, "null predicate");
    return guarded([&] {
        std::unique_lock<dce::Mutex> lk(m->impl, std::adopt_lock);
        cv->impl.wait_dce(lk, [&] { return pred(pred_arg) != 0; });
        lk.release();
        return DCE_OK;
    });
}

dce_status dce_cond_wait_rcv(dce_cond* cv, dce_mutex* m, dce_predicate_fn pred, void* pred_arg,
                             dce_action_fn action, void* action_arg, void** result)
{
    if (auto st = check_held(cv, m); st != DCE_OK)
        return st;
    if (!pred || !action)
        return fail(DCE_EINVAL, "null predicate or action");
    return guarded([&] {
        std::unique_lock<dce::Mutex> lk(m->impl, std::adopt_lock);
        void* value = cv->impl.wait_rcv(lk, [&] { return pred(pred_arg) != 0; }, [&] {
            void* r = nullptr;
            if (action(action_arg, &r) != 0)
                throw ActionFault();
            return r;
        });
        if (result)
            *result = value;
        return DCE_OK;
    });
}

dce_status dce_cond_signal_dce(dce_cond* cv, dce_mutex* m, dce_signal_outcome* outcome)
{
    if (auto st = check_held(cv, m); st != DCE_OK)
        return st;
    return guarded([&] {
        auto r = cv->impl.signal_dce(m->impl);
        if (outcome) {
            switch (r.outcome) {
            case dce::SignalOutcome::kWoke: *outcome = DCE_SIGNAL_WOKE; break;
            case dce::SignalOutcome::kNoneReady: *outcome = DCE_SIGNAL_NONE_READY; break;
            case dce::SignalOutcome::kEmpty: *outcome = DCE_SIGNAL_EMPTY; break;
            }
        }
        return DCE_OK;
    });
}

dce_status dce_cond_broadcast_dce(dce_cond* cv, dce_mutex* m, size_t* woken)
{
    if (auto st = check_held(cv, m); st != DCE_OK)
        return st;
    return guarded([&] {
        std::size_t n = cv->impl.broadcast_dce(m->impl);
        if (woken)
            *woken = n;
        return DCE_OK;
    });
}

dce_status dce_cond_broadcast_all(dce_cond* cv, dce_mutex* m, size_t* woken)
{
    if (auto st = check_held(cv, m); st != DCE_OK)
        return st;
    return guarded([&] {
        std::size_t n = cv->impl.broadcast_all(m->impl);
        if (woken)
            *woken = n;
        return DCE_OK;
    });
}

dce_status dce_cond_stats_get(const dce_cond* cv, dce_cond_stats* out)
{
    if (!cv || !out)
        return fail(DCE_EINVAL, "null condition variable or output pointer");
    auto s = cv->impl.stats();
    out->signals_sent = s.signals_sent;
    out->predicates_evaluated = s.predicates_evaluated;
    out->futile_wakeups = s.futile_wakeups;
    out->broadcasts = s.broadcasts;
    return DCE_OK;
}

// ---------------------------------------------------------------------------
// Queue

dce_status dce_queue_create(size_t capacity, dce_queue** out)
{
    if (!out)
        return fail(DCE_EINVAL, "null output pointer");
    return guarded([&] {
        *out = new dce_queue(capacity);
        return DCE_OK;
    });
}

dce_status dce_queue_destroy(dce_queue* q)
{
    delete q;
    return DCE_OK;
}

dce_status dce_queue_enq(dce_queue* q, int64_t value)
{
    if (!q)
        return fail(DCE_EINVAL, "null queue");
    return guarded([&] {
        q->impl.enq(value);
        return DCE_OK;
    });
}

dce_status dce_queue_deq(dce_queue* q, int64_t* value)
{
    if (!q || !value)
        return fail(DCE_EINVAL, "null queue or output pointer");
    return guarded([&] {
        *value = q->impl.deq();
        return DCE_OK;
    });
}

dce_status dce_queue_try_enq(dce_queue* q, int64_t value)
{
    if (!q)
        return fail(DCE_EINVAL, "null queue");
    return guarded([&] { return q->impl.try_enq(value) ? DCE_OK : DCE_EWOULDBLOCK; });
}

dce_status dce_queue_try_deq(dce_queue* q, int64_t* value)
{
    if (!q || !value)
        return fail(DCE_EINVAL, "null queue or output pointer");
    return guarded([&] {
        auto v = q->impl.try_deq();
        if (!v)
            return DCE_EWOULDBLOCK;
        *value = *v;
        return DCE_OK;
    });
}

dce_status dce_queue_size(const dce_queue* q, size_t* size)
{
    if (!q || !size)
        return fail(DCE_EINVAL, "null queue or output pointer");
    *size = q->impl.size();
    return DCE_OK;
}

// ---------------------------------------------------------------------------
// Benchmark

void dce_bench_config_init(dce_bench_config* config)
{
    if (!config)
        return;
    dce::bench::Config d;
    config->mode = DCE_BENCH_DCE;
    config->consumers = d.consumers;
    config->runs = d.runs;
    config->duration_s = d.duration_s;
    config->max_work_iters = d.max_work_iters;
    config->seed = d.seed;
    config->pad_bytes = static_cast<uint32_t>(d.pad_bytes);
}

dce_status dce_bench_run(const dce_bench_config* config, dce_bench_report** out)
{
    if (!config || !out)
        return fail(DCE_EINVAL, "null configuration or output pointer");
    if (config->mode != DCE_BENCH_LEGACY && config->mode != DCE_BENCH_DCE)
        return fail(DCE_EINVAL, "unknown benchmark mode");
    return guarded([&] {
        dce::bench::Config c;
        c.mode = config->mode == DCE_BENCH_LEGACY ? dce::bench::Mode::kLegacy : dce::bench::Mode::kDce;
        c.consumers = config->consumers;
        c.runs = config->runs;
        c.duration_s = config->duration_s;
        c.max_work_iters = config->max_work_iters;
        c.seed = config->seed;
        c.pad_bytes = config->pad_bytes;
        auto report = std::make_unique<dce_bench_report>();
        report->impl = dce::bench::run_benchmark(c);
        *out = report.release();
        return DCE_OK;
    });
}

dce_status dce_bench_report_destroy(dce_bench_report* report)
{
    delete report;
    return DCE_OK;
}

dce_status dce_bench_report_run_count(const dce_bench_report* report, size_t* count)
{
    if (!report || !count)
        return fail(DCE_EINVAL, "null report or output pointer");
    *count = report->impl.runs.size();
    return DCE_OK;
}

dce_status dce_bench_report_run(const dce_bench_report* report, size_t index, dce_bench_run_record* out)
{
    if (!report || !out)
        return fail(DCE_EINVAL, "null report or output pointer");
    if (index >= report->impl.runs.size())
        return fail(DCE_EINVAL, "run index out of range");
    const auto& r = report->impl.runs[index];
    out->run = r.run;
    out->produced_items = r.produced_items;
    out->consumed_items = r.consumed_items;
    out->futile_wakeups = r.futile_wakeups;
    out->duration_s = r.duration_s;
    out->throughput = r.throughput();
    return DCE_OK;
}

dce_status dce_bench_report_summary(const dce_bench_report* report, dce_bench_summary* out)
{
    if (!report || !out)
        return fail(DCE_EINVAL, "null report or output pointer");
    out->throughput_mean = report->impl.throughput_mean();
    out->throughput_stddev = report->impl.throughput_stddev();
    out->futile_wakeups_mean = report->impl.futile_mean();
    out->error_count = report->impl.errors.size();
    return DCE_OK;
}

dce_status dce_bench_report_error(const dce_bench_report* report, size_t index, const char** message)
{
    if (!report || !message)
        return fail(DCE_EINVAL, "null report or output pointer");
    if (index >= report->impl.errors.size())
        return fail(DCE_EINVAL, "error index out of range");
    *message = report->impl.errors[index].c_str();
    return DCE_OK;
}

dce_status dce_bench_report_emit(const dce_bench_report* report, dce_report_format format, int include_header,
                                 char** text)
{
    if (!report || !text)
        return fail(DCE_EINVAL, "null report or output pointer");
    if (format != DCE_FORMAT_CSV && format != DCE_FORMAT_JSON)
        return fail(DCE_EINVAL, "unknown report format");
    return guarded([&] {
        std::string s = dce::bench::emit_report(
            report->impl, format == DCE_FORMAT_CSV ? dce::bench::Format::kCsv : dce::bench::Format::kJson,
            include_header != 0);
        char* buf = static_cast<char*>(std::malloc(s.size() + 1));
        if (!buf)
            throw std::bad_alloc();
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *text = buf;
        return DCE_OK;
    });
}

void dce_string_free(char* text)
{
    std::free(text);
}

}  // extern "C"
