// Producer/consumer condition-variable benchmark.
//
//   bench --mode dce --consumers 8 --runs 7 --duration 5 --format csv
//   bench --mode legacy --sweep 1:16:1 --runs 3 --duration 1
//
// Results go to stdout; configuration errors exit with status 2.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dce/dce.h"

namespace {

struct Sweep {
    unsigned first = 0, last = 0, step = 1;
};

bool parse_sweep(const std::string& text, Sweep& out)
{
    unsigned a = 0, b = 0, s = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%u:%u:%u%c", &a, &b, &s, &tail) != 3)
        return false;
    if (a < 1 || b < a || s < 1)
        return false;
    out = {a, b, s};
    return true;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Futile-wakeup and throughput benchmark for delegated condition evaluation"};

    dce_bench_config config;
    dce_bench_config_init(&config);

    std::string mode = "dce";
    std::string format = "csv";
    std::string sweep_text;
    app.add_option("--mode", mode, "Signaling mode")->check(CLI::IsMember({"legacy", "dce"}));
    app.add_option("--consumers", config.consumers, "Number of consumer threads")->check(CLI::Range(1u, 1u << 16));
    app.add_option("--runs", config.runs, "Repetitions per configuration")->check(CLI::Range(1u, 1u << 16));
    app.add_option("--duration", config.duration_s, "Seconds per run")->check(CLI::PositiveNumber);
    app.add_option("--max-work", config.max_work_iters, "Upper bound (exclusive) on local work iterations");
    app.add_option("--seed", config.seed, "Producer PRNG seed");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--sweep", sweep_text, "Consumer counts FIRST:LAST:STEP (overrides --consumers)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    config.mode = mode == "legacy" ? DCE_BENCH_LEGACY : DCE_BENCH_DCE;
    const dce_report_format fmt = format == "json" ? DCE_FORMAT_JSON : DCE_FORMAT_CSV;

    std::vector<uint32_t> counts;
    if (!sweep_text.empty()) {
        Sweep sweep;
        if (!parse_sweep(sweep_text, sweep)) {
            std::cerr << "bench: --sweep expects FIRST:LAST:STEP with 1 <= FIRST <= LAST and STEP >= 1\n";
            return 2;
        }
        for (unsigned c = sweep.first; c <= sweep.last; c += sweep.step)
            counts.push_back(c);
    } else {
        counts.push_back(config.consumers);
    }

    const bool json_array = fmt == DCE_FORMAT_JSON && counts.size() > 1;
    if (json_array)
        std::cout << "[\n";
    int exit_code = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        config.consumers = counts[i];
        dce_bench_report* report = nullptr;
        dce_status st = dce_bench_run(&config, &report);
        if (st != DCE_OK) {
            std::cerr << "bench: " << dce_last_error() << '\n';
            return st == DCE_EINVAL ? 2 : 1;
        }

        char* text = nullptr;
        st = dce_bench_report_emit(report, fmt, i == 0, &text);
        if (st == DCE_OK) {
            if (json_array && i > 0)
                std::cout << ",\n";
            std::cout << text << std::flush;
            dce_string_free(text);
        } else {
            std::cerr << "bench: " << dce_last_error() << '\n';
            exit_code = 1;
        }

        dce_bench_summary summary{};
        dce_bench_report_summary(report, &summary);
        for (std::size_t e = 0; e < summary.error_count; ++e) {
            const char* message = nullptr;
            if (dce_bench_report_error(report, e, &message) == DCE_OK)
                std::cerr << "bench: " << message << '\n';
            exit_code = 1;
        }
        dce_bench_report_destroy(report);
    }
    if (json_array)
        std::cout << "]\n";
    return exit_code;
}
