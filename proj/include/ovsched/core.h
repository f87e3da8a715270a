#pragma once

#include "ovsched/time.h"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ovsched {

/**
 * \brief What one connection asks of the scheduler.
 *
 * The sender wants to push `packet_count` back-to-back packets and have the
 * last one finished by `deadline`. `per_packet_overhead` is the nominal gap
 * that accompanies every packet (e.g. AIFS) when estimating the duration.
 */
struct TransmissionRequest
{
    std::size_t id = 0;
    TimePoint deadline;
    std::int64_t packet_count = 1;
    TimeSpan packet_airtime{1};
    TimeSpan per_packet_overhead;

    bool operator==(const TransmissionRequest&) const = default;
};

/// Half-open interval [start, start + length).
struct Interval
{
    TimePoint start;
    TimeSpan length;

    TimePoint End() const { return start + length; }
    bool operator==(const Interval&) const = default;
};

/// Start-sending time per connection; index i belongs to request i.
struct Schedule
{
    std::vector<TimePoint> starts;

    std::size_t Size() const { return starts.size(); }
    TimePoint operator[](std::size_t i) const { return starts[i]; }
    bool operator==(const Schedule&) const = default;
};

/// Checks packet_count >= 1 and packet_airtime > 0. Throws InadmissibleRequest.
void ValidateRequest(const TransmissionRequest& request);

/// packet_count * (airtime + overhead), without looking at the deadline.
TimeSpan NominalDuration(const TransmissionRequest& request);

/// NominalDuration, rejecting requests that cannot finish by their deadline
/// even when started at time 0.
TimeSpan ComputeDuration(const TransmissionRequest& request);

/// Latest admissible start: deadline - duration - margin. Candidate starts
/// live in [0, Window()].
TimeSpan Window(const TransmissionRequest& request, TimeSpan margin = TimeSpan{});

TimeSpan Overlap(const Interval& a, const Interval& b);

/// The interval request i occupies when started at schedule[i].
std::vector<Interval> Occupancy(const Schedule& schedule,
                                std::span<const TransmissionRequest> requests);

/// Sum of Overlap over all ordered pairs (i, j), i != j. Each unordered pair
/// is therefore counted twice.
TimeSpan TotalCost(const Schedule& schedule, std::span<const TransmissionRequest> requests);

/// true iff every start satisfies t_i + d_i + margin <= q_i. A length mismatch
/// is reported as infeasible.
bool Feasible(const Schedule& schedule,
              std::span<const TransmissionRequest> requests,
              TimeSpan margin = TimeSpan{});

} // namespace ovsched
