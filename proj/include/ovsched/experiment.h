#pragma once

#include "ovsched/scenario.h"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ovsched {

/// Outcome of one (window, scheduler, seed) simulation.
struct SweepRow
{
    std::int64_t window_us = 0;
    Strategy scheduler = Strategy::Tsgs;
    std::uint64_t seed = 0;
    double pdr = 0.0;
    std::int64_t cost_us = 0;
    std::uint64_t candidate_evals = 0;
    std::vector<std::int64_t> collisions;
    std::vector<std::int64_t> received;
    double mean_delay_us = 0.0;

    bool operator==(const SweepRow&) const = default;
};

/// Mean over the seeds of one (window, scheduler) cell.
struct AggregateRow
{
    std::int64_t window_us = 0;
    Strategy scheduler = Strategy::Tsgs;
    std::uint64_t seed_count = 0;
    double pdr = 0.0;
    double cost_us = 0.0;
    double candidate_evals = 0.0;
    std::vector<double> collisions;
    std::vector<double> received;
    double mean_delay_us = 0.0;

    bool operator==(const AggregateRow&) const = default;
};

struct SweepTable
{
    /// Packets each connection sends in every row.
    std::vector<std::int64_t> sent;
    /// Ordered by window, then scheduler as listed, then seed as listed.
    std::vector<SweepRow> rows;
    std::vector<AggregateRow> aggregates;

    std::size_t Connections() const { return sent.size(); }
    bool operator==(const SweepTable&) const = default;
};

/**
 * \brief Runs every (window, scheduler, seed) combination of a scenario.
 *
 * With a sweep, each point moves every deadline so all connections get that
 * window. Without one, the scenario's own deadlines are used and the window
 * column reports request 0's window. Deterministic schedulers are computed
 * once per window; the random baseline redraws per seed. Every schedule is
 * simulated once per seed.
 */
SweepTable RunExperiment(const ScenarioSpec& spec);

enum class OutputFormat
{
    Csv,
    Json,
};

std::optional<OutputFormat> ParseOutputFormat(std::string_view text);

/// Column names in CSV order.
std::vector<std::string> CsvHeader(std::size_t connections);

void WriteCsv(const SweepTable& table, std::ostream& out);
void WriteJson(const SweepTable& table, std::ostream& out);

/// Writes `table` to `path`. Throws IoError when the file cannot be written.
void Emit(const SweepTable& table, OutputFormat format, const std::filesystem::path& path);

/// Reads a table written by WriteJson. Throws ParseError on malformed input.
SweepTable ReadJson(std::istream& in);
SweepTable LoadJson(const std::filesystem::path& path);

struct SchedulerSummary
{
    Strategy scheduler = Strategy::Tsgs;
    std::size_t rows = 0;
    double mean_pdr = 0.0;
    /// Mean over rows of the collided packets summed across connections.
    double mean_collisions = 0.0;
    double mean_delay_us = 0.0;
};

struct ComparisonSummary
{
    std::vector<SchedulerSummary> schedulers;
    /// tsgs mean PDR minus random mean PDR, when both are present.
    std::optional<double> tsgs_minus_random_pdr;
};

/// Throws MissingScheduler unless the table holds rows of two or more
/// schedulers.
ComparisonSummary ReportComparison(const SweepTable& table);

void WriteSummary(const ComparisonSummary& summary, std::ostream& out);

} // namespace ovsched
