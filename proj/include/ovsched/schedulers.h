#pragma once

#include "ovsched/core.h"

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ovsched {

enum class Ordering
{
    InputOrder,
    DeadlineAscending,
};

enum class Strategy
{
    Tsgs,
    Exhaustive,
    Random,
};

std::string_view ToString(Ordering ordering);
std::string_view ToString(Strategy strategy);
std::optional<Ordering> ParseOrdering(std::string_view text);
std::optional<Strategy> ParseStrategy(std::string_view text);

struct SchedulerConfig
{
    /// Search granularity; candidate starts are multiples of it.
    TimeSpan step{1};
    /// Extra slack every connection must keep before its deadline.
    TimeSpan margin;
    Ordering ordering = Ordering::InputOrder;
    /// Largest Cartesian grid the exhaustive search agrees to enumerate.
    std::uint64_t enumeration_cap = 10'000'000;

    bool operator==(const SchedulerConfig&) const = default;
};

/// Candidate starts {0, step, ..., sigma * step} of one connection, where
/// sigma = floor(window / step).
struct CandidateGrid
{
    TimeSpan step{1};
    std::int64_t sigma = 0;

    std::uint64_t Size() const { return static_cast<std::uint64_t>(sigma) + 1; }
    TimePoint At(std::int64_t k) const { return TimePoint{} + step * k; }
};

CandidateGrid MakeCandidateGrid(const TransmissionRequest& request, const SchedulerConfig& config);

struct ScheduleResult
{
    Schedule schedule;
    TimeSpan cost;
    /// Work done by the strategy: pairwise overlap evaluations for TSGS, full
    /// cost evaluations for exhaustive search, zero for random draws.
    std::uint64_t candidate_evaluations = 0;
    /// Fingerprint of (requests, config) the result was computed for.
    std::uint64_t instance = 0;

    bool operator==(const ScheduleResult&) const = default;
};

std::uint64_t InstanceFingerprint(std::span<const TransmissionRequest> requests,
                                  const SchedulerConfig& config);

/// Positions of the requests in the order the greedy search fixes them.
std::vector<std::size_t> ProcessingOrder(std::span<const TransmissionRequest> requests,
                                         Ordering ordering);

/**
 * \brief Greedy overlap-minimizing start assignment.
 *
 * Connections are fixed one at a time in ProcessingOrder(). Each scans its
 * whole CandidateGrid, scoring a candidate by its summed overlap with every
 * connection fixed before it, and keeps the earliest minimizer. Fixed
 * connections are never revisited.
 */
ScheduleResult TsgsSchedule(std::span<const TransmissionRequest> requests,
                            const SchedulerConfig& config);

/// Minimum-cost schedule over the full product of candidate grids, ties
/// broken toward the lexicographically smallest start vector. Throws
/// InstanceTooLarge when the product exceeds config.enumeration_cap.
ScheduleResult ExhaustiveSchedule(std::span<const TransmissionRequest> requests,
                                  const SchedulerConfig& config);

/// Independent uniform draw from each connection's grid.
ScheduleResult RandomSchedule(std::span<const TransmissionRequest> requests,
                              const SchedulerConfig& config,
                              std::uint64_t seed);

/// Dispatch by strategy; `seed` only matters for Strategy::Random.
ScheduleResult RunScheduler(Strategy strategy,
                            std::span<const TransmissionRequest> requests,
                            const SchedulerConfig& config,
                            std::uint64_t seed);

/// Orders two results by cost. Throws MismatchedInstance when they were
/// computed for different inputs.
std::strong_ordering CompareCost(const ScheduleResult& a, const ScheduleResult& b);

} // namespace ovsched
