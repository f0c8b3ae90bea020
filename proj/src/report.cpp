#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dce/bench.hpp"

namespace dce::bench {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string emit_csv(const Report& report, bool include_header)
{
    std::ostringstream out;
    out << std::fixed;
    if (include_header)
        out << "mode,consumers,run,produced_items,futile_wakeups,duration_s\n";
    const auto mode = to_string(report.mode);
    for (const auto& r : report.runs) {
        out << mode << ',' << report.consumers << ',' << r.run << ',' << r.produced_items << ','
            << r.futile_wakeups << ',' << std::setprecision(6) << r.duration_s << '\n';
    }
    if (!report.runs.empty()) {
        out << mode << ',' << report.consumers << ",mean," << std::setprecision(3) << report.produced_mean()
            << ',' << report.futile_mean() << ',' << std::setprecision(6) << report.duration_mean() << '\n';
    }
    return out.str();
}

std::string emit_json(const Report& report)
{
    ordered_json j;
    j["mode"] = std::string(to_string(report.mode));
    j["consumers"] = report.consumers;
    j["runs"] = ordered_json::array();
    for (const auto& r : report.runs) {
        ordered_json row;
        row["run"] = r.run;
        row["produced_items"] = r.produced_items;
        row["consumed_items"] = r.consumed_items;
        row["futile_wakeups"] = r.futile_wakeups;
        row["duration_s"] = r.duration_s;
        row["throughput"] = r.throughput();
        j["runs"].push_back(std::move(row));
    }
    j["summary"] = {
        {"throughput_mean", report.throughput_mean()},
        {"throughput_stddev", report.throughput_stddev()},
        {"futile_wakeups_mean", report.futile_mean()},
    };
    j["errors"] = report.errors;
    return j.dump(2) + "\n";
}

}  // namespace

std::string emit_report(const Report& report, Format format, bool include_header)
{
    return format == Format::kCsv ? emit_csv(report, include_header) : emit_json(report);
}

Report parse_report_json(std::string_view text)
{
    auto j = ordered_json::parse(text);
    Report report;
    auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode)
        throw std::invalid_argument("unknown benchmark mode in report");
    report.mode = *mode;
    report.consumers = j.at("consumers").get<std::uint32_t>();
    for (const auto& row : j.at("runs")) {
        RunRecord r;
        r.run = row.at("run").get<std::uint32_t>();
        r.produced_items = row.at("produced_items").get<std::uint64_t>();
        r.consumed_items = row.at("consumed_items").get<std::uint64_t>();
        r.futile_wakeups = row.at("futile_wakeups").get<std::uint64_t>();
        r.duration_s = row.at("duration_s").get<double>();
        report.runs.push_back(r);
    }
    report.errors = j.at("errors").get<std::vector<std::string>>();
    return report;
}

}  // namespace dce::bench
