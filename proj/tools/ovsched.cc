// Command-line front end: validate scenarios, run sweeps, dump event traces.

#include "ovsched/error.h"
#include "ovsched/experiment.h"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

ovsched::TimeSpan
TimeArg(const std::string& name, const std::string& text)
{
    const auto t = ovsched::ParseTime(text);
    if (!t)
    {
        throw ovsched::Error(ovsched::ErrorKind::ValidationError,
                             "--" + name + ": '" + text + "' is not a time such as 3280us");
    }
    return *t;
}

ovsched::OutputFormat
FormatArg(const std::string& text)
{
    const auto f = ovsched::ParseOutputFormat(text);
    if (!f)
    {
        throw ovsched::Error(ovsched::ErrorKind::ValidationError,
                             "--format must be csv or json, got '" + text + "'");
    }
    return *f;
}

void
WriteTable(const ovsched::SweepTable& table, const std::string& out, const std::string& format)
{
    const auto f = FormatArg(format);
    if (out.empty() || out == "-")
    {
        f == ovsched::OutputFormat::Csv ? ovsched::WriteCsv(table, std::cout)
                                        : ovsched::WriteJson(table, std::cout);
    }
    else
    {
        ovsched::Emit(table, f, out);
    }
}

int
Trace(const std::string& path,
      const std::string& window_text,
      const std::string& scheduler_text,
      std::optional<std::uint64_t> seed_arg,
      const std::string& out)
{
    using namespace ovsched;
    const ScenarioSpec spec = LoadScenario(path);

    Strategy strategy = spec.schedulers.front();
    if (!scheduler_text.empty())
    {
        const auto s = ParseStrategy(scheduler_text);
        if (!s)
        {
            throw Error(ErrorKind::ValidationError, "unknown scheduler '" + scheduler_text + "'");
        }
        strategy = *s;
    }
    const std::uint64_t seed = seed_arg.value_or(spec.seeds.front());

    std::vector<TransmissionRequest> requests = spec.requests;
    if (!window_text.empty())
    {
        requests = WithWindow(spec.requests, TimeArg("window", window_text),
                              spec.scheduler_config.margin);
    }
    else if (spec.sweep)
    {
        requests = WithWindow(spec.requests, spec.sweep->start, spec.scheduler_config.margin);
    }

    const ScheduleResult result = RunScheduler(strategy, requests, spec.scheduler_config, seed);

    std::ofstream file;
    std::ostream* sink = &std::cout;
    if (!out.empty() && out != "-")
    {
        file.open(out, std::ios::binary | std::ios::trunc);
        if (!file)
        {
            throw Error(ErrorKind::IoError, "cannot open '" + out + "' for writing");
        }
        sink = &file;
    }

    *sink << "# scheduler=" << ToString(strategy) << " seed=" << seed
          << " cost_us=" << result.cost.Us() << '\n';
    for (std::size_t i = 0; i < requests.size(); ++i)
    {
        *sink << "# c" << i << " start_us=" << result.schedule[i].Us()
              << " deadline_us=" << requests[i].deadline.Us() << '\n';
    }
    const SimReport report = Simulate(requests, result.schedule, spec.channel, seed, *sink);
    *sink << "# pdr=" << report.pdr << " collided=" << report.total_collided
          << " backoff_activations=" << report.backoff_activations << '\n';
    return 0;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Overlap-minimizing transmission scheduling over a shared CSMA/CA channel"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out;
    std::string format = "csv";
    bool summary = false;

    auto* validate = app.add_subcommand("validate", "Check a scenario file and exit");
    validate->add_option("scenario", scenario, "Scenario file")->required();

    auto* run = app.add_subcommand("run", "Run a scenario and write its sweep table");
    run->add_option("scenario", scenario, "Scenario file")->required();
    run->add_option("--out,-o", out, "Output path ('-' for stdout)");
    run->add_option("--format,-f", format, "csv or json");
    run->add_flag("--summary", summary, "Also print the per-scheduler comparison");

    std::string start;
    std::string stop;
    std::string step;
    auto* sweep = app.add_subcommand("sweep", "Run a scenario over a window range and compare");
    sweep->add_option("scenario", scenario, "Scenario file")->required();
    sweep->add_option("--start", start, "First window, e.g. 3280us")->required();
    sweep->add_option("--stop", stop, "Last window")->required();
    sweep->add_option("--step", step, "Window increment")->required();
    sweep->add_option("--out,-o", out, "Also write the table here");
    sweep->add_option("--format,-f", format, "csv or json");

    std::string window;
    std::string scheduler;
    std::optional<std::uint64_t> seed;
    auto* trace = app.add_subcommand("trace", "Print the channel event trace of one row");
    trace->add_option("scenario", scenario, "Scenario file")->required();
    trace->add_option("--window", window, "Window to schedule in (default: first sweep point)");
    trace->add_option("--scheduler", scheduler, "tsgs, exhaustive or random");
    trace->add_option("--seed", seed, "Seed (default: first in the scenario)");
    trace->add_option("--out,-o", out, "Output path ('-' for stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e) == 0 ? 0 : kExitValidation;
    }

    try
    {
        if (*validate)
        {
            const auto spec = ovsched::LoadScenario(scenario);
            std::cout << scenario << ": ok (" << spec.requests.size() << " requests, "
                      << spec.seeds.size() << " seeds)\n";
            return 0;
        }
        if (*run)
        {
            (void)FormatArg(format);
            const auto table = ovsched::RunExperiment(ovsched::LoadScenario(scenario));
            WriteTable(table, out, format);
            if (summary)
            {
                ovsched::WriteSummary(ovsched::ReportComparison(table), std::cerr);
            }
            return 0;
        }
        if (*sweep)
        {
            auto spec = ovsched::LoadScenario(scenario);
            spec.sweep = ovsched::WindowSweep{TimeArg("start", start), TimeArg("stop", stop),
                                              TimeArg("step", step)};
            const auto table = ovsched::RunExperiment(spec);
            if (!out.empty())
            {
                WriteTable(table, out, format);
            }
            ovsched::WriteSummary(ovsched::ReportComparison(table), std::cout);
            return 0;
        }
        return Trace(scenario, window, scheduler, seed, out);
    }
    catch (const ovsched::Error& e)
    {
        std::cerr << "error (" << ovsched::ToString(e.Kind()) << "): " << e.what() << '\n';
        const bool invalid = e.Kind() == ovsched::ErrorKind::ParseError ||
                             e.Kind() == ovsched::ErrorKind::ValidationError;
        return invalid ? kExitValidation : kExitRuntime;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
