/*
 * C interface to the delegated-condition-evaluation library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every call returns a dce_status; on failure dce_last_error() describes
 * the problem for the calling thread.
 */
#ifndef DCE_DCE_H
#define DCE_DCE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DCE_API __declspec(dllexport)
#else
#define DCE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dce_status {
    DCE_OK = 0,
    DCE_EINVAL = 1,          /* null handle or bad argument */
    DCE_ENOMEM = 2,
    DCE_ELOCK = 3,           /* the calling thread does not hold the mutex */
    DCE_EACTION = 4,         /* a delegated action reported a fault */
    DCE_EWOULDBLOCK = 5,     /* non-blocking queue operation could not proceed */
    DCE_ERESOURCE = 6,       /* threads could not be created */
    DCE_EINTERNAL = 7
} dce_status;

typedef struct dce_mutex dce_mutex;
typedef struct dce_cond dce_cond;
typedef struct dce_queue dce_queue;
typedef struct dce_bench_report dce_bench_report;

/* Predicates read lock-protected state only; nonzero means "proceed". */
typedef int (*dce_predicate_fn)(void* arg);

/* Delegated action. Runs under the lock; stores its result in *result and
 * returns 0, or returns nonzero to report a fault to the waiter. */
typedef int (*dce_action_fn)(void* arg, void** result);

typedef enum dce_signal_outcome {
    DCE_SIGNAL_WOKE = 0,
    DCE_SIGNAL_NONE_READY = 1,
    DCE_SIGNAL_EMPTY = 2
} dce_signal_outcome;

typedef struct dce_cond_stats {
    uint64_t signals_sent;
    uint64_t predicates_evaluated;
    uint64_t futile_wakeups;
    uint64_t broadcasts;
} dce_cond_stats;

DCE_API const char* dce_last_error(void);

/* Mutex */
DCE_API dce_status dce_mutex_create(dce_mutex** out);
DCE_API dce_status dce_mutex_destroy(dce_mutex* m);
DCE_API dce_status dce_mutex_lock(dce_mutex* m);
DCE_API dce_status dce_mutex_trylock(dce_mutex* m, int* acquired);
DCE_API dce_status dce_mutex_unlock(dce_mutex* m);

/* Condition variable. Wait and signal calls require `m` to be held by the
 * caller and return DCE_ELOCK otherwise. */
DCE_API dce_status dce_cond_create(dce_cond** out);
DCE_API dce_status dce_cond_destroy(dce_cond* cv);
DCE_API dce_status dce_cond_wait(dce_cond* cv, dce_mutex* m);
DCE_API dce_status dce_cond_wait_dce(dce_cond* cv, dce_mutex* m, dce_predicate_fn pred, void* pred_arg);
/* Returns with `m` released. On DCE_EACTION *result is left untouched. */
DCE_API dce_status dce_cond_wait_rcv(dce_cond* cv, dce_mutex* m, dce_predicate_fn pred, void* pred_arg,
                                     dce_action_fn action, void* action_arg, void** result);
DCE_API dce_status dce_cond_signal_dce(dce_cond* cv, dce_mutex* m, dce_signal_outcome* outcome);
DCE_API dce_status dce_cond_broadcast_dce(dce_cond* cv, dce_mutex* m, size_t* woken);
DCE_API dce_status dce_cond_broadcast_all(dce_cond* cv, dce_mutex* m, size_t* woken);
DCE_API dce_status dce_cond_stats_get(const dce_cond* cv, dce_cond_stats* out);

/* Bounded queue of int64_t values */
DCE_API dce_status dce_queue_create(size_t capacity, dce_queue** out);
DCE_API dce_status dce_queue_destroy(dce_queue* q);
DCE_API dce_status dce_queue_enq(dce_queue* q, int64_t value);
DCE_API dce_status dce_queue_deq(dce_queue* q, int64_t* value);
DCE_API dce_status dce_queue_try_enq(dce_queue* q, int64_t value);
DCE_API dce_status dce_queue_try_deq(dce_queue* q, int64_t* value);
DCE_API dce_status dce_queue_size(const dce_queue* q, size_t* size);

/* Benchmark */
typedef enum dce_bench_mode { DCE_BENCH_LEGACY = 0, DCE_BENCH_DCE = 1 } dce_bench_mode;
typedef enum dce_report_format { DCE_FORMAT_CSV = 0, DCE_FORMAT_JSON = 1 } dce_report_format;

typedef struct dce_bench_config {
    dce_bench_mode mode;
    uint32_t consumers;
    uint32_t runs;
    double duration_s;
    uint32_t max_work_iters;
    uint64_t seed;
    uint32_t pad_bytes;
} dce_bench_config;

typedef struct dce_bench_run_record {
    uint32_t run;
    uint64_t produced_items;
    uint64_t consumed_items;
    uint64_t futile_wakeups;
    double duration_s;
    double throughput;
} dce_bench_run_record;

typedef struct dce_bench_summary {
    double throughput_mean;
    double throughput_stddev;
    double futile_wakeups_mean;
    size_t error_count;
} dce_bench_summary;

/* Fills in the defaults: DCE mode, 1 consumer, 7 runs of 5 s, 512 max work
 * iterations, seed 1, 64-byte padding. */
DCE_API void dce_bench_config_init(dce_bench_config* config);
/* DCE_EINVAL for a bad configuration. A run that fails to spawn threads is
 * recorded in the report's errors and still yields DCE_OK with the partial
 * report. */
DCE_API dce_status dce_bench_run(const dce_bench_config* config, dce_bench_report** out);
DCE_API dce_status dce_bench_report_destroy(dce_bench_report* report);
DCE_API dce_status dce_bench_report_run_count(const dce_bench_report* report, size_t* count);
DCE_API dce_status dce_bench_report_run(const dce_bench_report* report, size_t index, dce_bench_run_record* out);
DCE_API dce_status dce_bench_report_summary(const dce_bench_report* report, dce_bench_summary* out);
/* *message stays valid until the report is destroyed. */
DCE_API dce_status dce_bench_report_error(const dce_bench_report* report, size_t index, const char** message);
/* *text is allocated by the library; free it with dce_string_free. */
DCE_API dce_status dce_bench_report_emit(const dce_bench_report* report, dce_report_format format,
                                         int include_header, char** text);
DCE_API void dce_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* DCE_DCE_H */
