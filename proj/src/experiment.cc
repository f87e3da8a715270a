#include "ovsched/experiment.h"

#include "ovsched/error.h"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ovsched {

namespace {

SweepRow
MakeRow(TimeSpan window,
        Strategy strategy,
        std::uint64_t seed,
        const ScheduleResult& result,
        const SimReport& report)
{
    SweepRow row;
    row.window_us = window.Us();
    row.scheduler = strategy;
    row.seed = seed;
    row.pdr = report.pdr;
    row.cost_us = result.cost.Us();
    row.candidate_evals = result.candidate_evaluations;
    double delay_sum = 0.0;
    for (const auto& c : report.connections)
    {
        row.collisions.push_back(c.collided);
        row.received.push_back(c.received);
        delay_sum += c.mean_delay_us * static_cast<double>(c.sent);
    }
    row.mean_delay_us =
        report.total_sent > 0 ? delay_sum / static_cast<double>(report.total_sent) : 0.0;
    return row;
}

AggregateRow
Aggregate(std::span<const SweepRow> cell)
{
    AggregateRow agg;
    agg.window_us = cell.front().window_us;
    agg.scheduler = cell.front().scheduler;
    agg.seed_count = cell.size();
    const std::size_t n = cell.front().collisions.size();
    agg.collisions.assign(n, 0.0);
    agg.received.assign(n, 0.0);
    for (const SweepRow& r : cell)
    {
        agg.pdr += r.pdr;
        agg.cost_us += static_cast<double>(r.cost_us);
        agg.candidate_evals += static_cast<double>(r.candidate_evals);
        agg.mean_delay_us += r.mean_delay_us;
        for (std::size_t c = 0; c < n; ++c)
        {
            agg.collisions[c] += static_cast<double>(r.collisions[c]);
            agg.received[c] += static_cast<double>(r.received[c]);
        }
    }
    const auto k = static_cast<double>(cell.size());
    agg.pdr /= k;
    agg.cost_us /= k;
    agg.candidate_evals /= k;
    agg.mean_delay_us /= k;
    for (std::size_t c = 0; c < n; ++c)
    {
        agg.collisions[c] /= k;
        agg.received[c] /= k;
    }
    return agg;
}

std::string
Fixed(double v)
{
    return fmt::format("{:.6f}", v);
}

} // namespace

SweepTable
RunExperiment(const ScenarioSpec& spec)
{
    ValidateScenario(spec);
    const TimeSpan margin = spec.scheduler_config.margin;

    std::vector<std::optional<TimeSpan>> points;
    if (spec.sweep)
    {
        for (TimeSpan w : spec.sweep->Points())
        {
            points.emplace_back(w);
        }
    }
    else
    {
        points.emplace_back(std::nullopt);
    }

    SweepTable table;
    for (const auto& r : spec.requests)
    {
        table.sent.push_back(r.packet_count);
    }

    for (const auto& point : points)
    {
        const std::vector<TransmissionRequest> requests =
            point ? WithWindow(spec.requests, *point, margin) : spec.requests;
        const TimeSpan window = point ? *point : Window(requests.front(), margin);

        for (Strategy strategy : spec.schedulers)
        {
            std::optional<ScheduleResult> fixed;
            if (strategy != Strategy::Random)
            {
                fixed = RunScheduler(strategy, requests, spec.scheduler_config, 0);
            }
            const std::size_t first = table.rows.size();
            for (std::uint64_t seed : spec.seeds)
            {
                const ScheduleResult result =
                    fixed ? *fixed : RandomSchedule(requests, spec.scheduler_config, seed);
                const SimReport report = Simulate(requests, result.schedule, spec.channel, seed);
                table.rows.push_back(MakeRow(window, strategy, seed, result, report));
            }
            table.aggregates.push_back(
                Aggregate(std::span<const SweepRow>(table.rows).subspan(first)));
        }
    }
    return table;
}

std::optional<OutputFormat>
ParseOutputFormat(std::string_view text)
{
    if (text == "csv")
    {
        return OutputFormat::Csv;
    }
    if (text == "json")
    {
        return OutputFormat::Json;
    }
    return std::nullopt;
}

std::vector<std::string>
CsvHeader(std::size_t connections)
{
    std::vector<std::string> cols{"window_us", "scheduler", "seed", "pdr", "cost_us",
                                  "candidate_evals"};
    for (std::size_t c = 0; c < connections; ++c)
    {
        cols.push_back("collisions_c" + std::to_string(c));
    }
    for (std::size_t c = 0; c < connections; ++c)
    {
        cols.push_back("received_c" + std::to_string(c));
    }
    cols.push_back("mean_delay_us");
    return cols;
}

void
WriteCsv(const SweepTable& table, std::ostream& out)
{
    const auto header = CsvHeader(table.Connections());
    for (std::size_t i = 0; i < header.size(); ++i)
    {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (const SweepRow& r : table.rows)
    {
        out << r.window_us << ',' << ToString(r.scheduler) << ',' << r.seed << ',' << Fixed(r.pdr)
            << ',' << r.cost_us << ',' << r.candidate_evals;
        for (auto v : r.collisions)
        {
            out << ',' << v;
        }
        for (auto v : r.received)
        {
            out << ',' << v;
        }
        out << ',' << Fixed(r.mean_delay_us) << '\n';
    }
    // Aggregates carry "mean" in the seed column.
    for (const AggregateRow& a : table.aggregates)
    {
        out << a.window_us << ',' << ToString(a.scheduler) << ",mean," << Fixed(a.pdr) << ','
            << Fixed(a.cost_us) << ',' << Fixed(a.candidate_evals);
        for (auto v : a.collisions)
        {
            out << ',' << Fixed(v);
        }
        for (auto v : a.received)
        {
            out << ',' << Fixed(v);
        }
        out << ',' << Fixed(a.mean_delay_us) << '\n';
    }
}

void
WriteJson(const SweepTable& table, std::ostream& out)
{
    using nlohmann::ordered_json;
    const std::size_t n = table.Connections();
    ordered_json j;
    j["format"] = "ovsched-sweep/1";
    j["sent"] = table.sent;
    auto per_conn = [n](ordered_json& o, const char* prefix, const auto& values) {
        for (std::size_t c = 0; c < n; ++c)
        {
            o[std::string(prefix) + std::to_string(c)] = values[c];
        }
    };
    ordered_json rows = ordered_json::array();
    for (const SweepRow& r : table.rows)
    {
        ordered_json o;
        o["window_us"] = r.window_us;
        o["scheduler"] = ToString(r.scheduler);
        o["seed"] = r.seed;
        o["pdr"] = r.pdr;
        o["cost_us"] = r.cost_us;
        o["candidate_evals"] = r.candidate_evals;
        per_conn(o, "collisions_c", r.collisions);
        per_conn(o, "received_c", r.received);
        o["mean_delay_us"] = r.mean_delay_us;
        rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    ordered_json aggs = ordered_json::array();
    for (const AggregateRow& a : table.aggregates)
    {
        ordered_json o;
        o["window_us"] = a.window_us;
        o["scheduler"] = ToString(a.scheduler);
        o["seed"] = "mean";
        o["seed_count"] = a.seed_count;
        o["pdr"] = a.pdr;
        o["cost_us"] = a.cost_us;
        o["candidate_evals"] = a.candidate_evals;
        per_conn(o, "collisions_c", a.collisions);
        per_conn(o, "received_c", a.received);
        o["mean_delay_us"] = a.mean_delay_us;
        aggs.push_back(std::move(o));
    }
    j["aggregates"] = std::move(aggs);
    out << j.dump(2) << '\n';
}

void
Emit(const SweepTable& table, OutputFormat format, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
    }
    if (format == OutputFormat::Csv)
    {
        WriteCsv(table, out);
    }
    else
    {
        WriteJson(table, out);
    }
    out.flush();
    if (!out)
    {
        throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
    }
}

SweepTable
ReadJson(std::istream& in)
{
    try
    {
        const nlohmann::json j = nlohmann::json::parse(in);
        if (j.at("format") != "ovsched-sweep/1")
        {
            throw Error(ErrorKind::ParseError, "not an ovsched-sweep/1 document");
        }
        SweepTable table;
        table.sent = j.at("sent").get<std::vector<std::int64_t>>();
        const std::size_t n = table.Connections();
        auto strategy = [](const nlohmann::json& o) {
            const auto s = ParseStrategy(o.at("scheduler").get<std::string>());
            if (!s)
            {
                throw Error(ErrorKind::ParseError, "unknown scheduler in table");
            }
            return *s;
        };
        for (const auto& o : j.at("rows"))
        {
            SweepRow r;
            r.window_us = o.at("window_us").get<std::int64_t>();
            r.scheduler = strategy(o);
            r.seed = o.at("seed").get<std::uint64_t>();
            r.pdr = o.at("pdr").get<double>();
            r.cost_us = o.at("cost_us").get<std::int64_t>();
            r.candidate_evals = o.at("candidate_evals").get<std::uint64_t>();
            for (std::size_t c = 0; c < n; ++c)
            {
                r.collisions.push_back(o.at("collisions_c" + std::to_string(c)).get<std::int64_t>());
            }
            for (std::size_t c = 0; c < n; ++c)
            {
                r.received.push_back(o.at("received_c" + std::to_string(c)).get<std::int64_t>());
            }
            r.mean_delay_us = o.at("mean_delay_us").get<double>();
            table.rows.push_back(std::move(r));
        }
        for (const auto& o : j.at("aggregates"))
        {
            AggregateRow a;
            a.window_us = o.at("window_us").get<std::int64_t>();
            a.scheduler = strategy(o);
            a.seed_count = o.at("seed_count").get<std::uint64_t>();
            a.pdr = o.at("pdr").get<double>();
            a.cost_us = o.at("cost_us").get<double>();
            a.candidate_evals = o.at("candidate_evals").get<double>();
            for (std::size_t c = 0; c < n; ++c)
            {
                a.collisions.push_back(o.at("collisions_c" + std::to_string(c)).get<double>());
            }
            for (std::size_t c = 0; c < n; ++c)
            {
                a.received.push_back(o.at("received_c" + std::to_string(c)).get<double>());
            }
            a.mean_delay_us = o.at("mean_delay_us").get<double>();
            table.aggregates.push_back(std::move(a));
        }
        return table;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorKind::ParseError, std::string("malformed sweep table: ") + e.what());
    }
}

SweepTable
LoadJson(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
    }
    return ReadJson(in);
}

ComparisonSummary
ReportComparison(const SweepTable& table)
{
    std::vector<Strategy> order;
    std::map<Strategy, SchedulerSummary> by;
    for (const SweepRow& r : table.rows)
    {
        auto [it, inserted] = by.try_emplace(r.scheduler);
        if (inserted)
        {
            order.push_back(r.scheduler);
            it->second.scheduler = r.scheduler;
        }
        SchedulerSummary& s = it->second;
        ++s.rows;
        s.mean_pdr += r.pdr;
        s.mean_collisions +=
            static_cast<double>(std::accumulate(r.collisions.begin(), r.collisions.end(), 0LL));
        s.mean_delay_us += r.mean_delay_us;
    }
    if (order.size() < 2)
    {
        throw Error(ErrorKind::MissingScheduler,
                    "comparison needs rows from at least two schedulers, found " +
                        std::to_string(order.size()));
    }

    ComparisonSummary out;
    for (Strategy s : order)
    {
        SchedulerSummary& v = by.at(s);
        const auto k = static_cast<double>(v.rows);
        v.mean_pdr /= k;
        v.mean_collisions /= k;
        v.mean_delay_us /= k;
        out.schedulers.push_back(v);
    }
    if (by.contains(Strategy::Tsgs) && by.contains(Strategy::Random))
    {
        out.tsgs_minus_random_pdr = by.at(Strategy::Tsgs).mean_pdr - by.at(Strategy::Random).mean_pdr;
    }
    return out;
}

void
WriteSummary(const ComparisonSummary& summary, std::ostream& out)
{
    out << fmt::format("{:<12}{:>8}{:>12}{:>16}{:>16}\n", "scheduler", "rows", "mean_pdr",
                       "mean_collisions", "mean_delay_us");
    for (const auto& s : summary.schedulers)
    {
        out << fmt::format("{:<12}{:>8}{:>12.6f}{:>16.6f}{:>16.6f}\n", ToString(s.scheduler),
                           s.rows, s.mean_pdr, s.mean_collisions, s.mean_delay_us);
    }
    if (summary.tsgs_minus_random_pdr)
    {
        out << fmt::format("tsgs - random PDR: {:+.6f}\n", *summary.tsgs_minus_random_pdr);
    }
}

} // namespace ovsched
