#include "ovsched/core.h"

#include "ovsched/error.h"

#include <algorithm>
#include <string>

namespace ovsched {

std::string_view
ToString(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::InadmissibleRequest:
        return "inadmissible-request";
    case ErrorKind::LengthMismatch:
        return "length-mismatch";
    case ErrorKind::InstanceTooLarge:
        return "instance-too-large";
    case ErrorKind::MismatchedInstance:
        return "mismatched-instance";
    case ErrorKind::NoPacketsSent:
        return "no-packets-sent";
    case ErrorKind::ParseError:
        return "parse-error";
    case ErrorKind::ValidationError:
        return "validation-error";
    case ErrorKind::MissingScheduler:
        return "missing-scheduler";
    case ErrorKind::IoError:
        return "io-error";
    }
    return "unknown";
}

namespace {

[[noreturn]] void
Inadmissible(const TransmissionRequest& request, const std::string& why)
{
    throw Error(ErrorKind::InadmissibleRequest,
                "request " + std::to_string(request.id) + ": " + why);
}

} // namespace

void
ValidateRequest(const TransmissionRequest& request)
{
    if (request.packet_count < 1)
    {
        Inadmissible(request, "packet_count must be at least 1");
    }
    if (request.packet_airtime.IsZero())
    {
        Inadmissible(request, "packet_airtime must be positive");
    }
}

TimeSpan
NominalDuration(const TransmissionRequest& request)
{
    ValidateRequest(request);
    return (request.packet_airtime + request.per_packet_overhead) * request.packet_count;
}

TimeSpan
ComputeDuration(const TransmissionRequest& request)
{
    const TimeSpan d = NominalDuration(request);
    if (d > request.deadline.SinceOrigin())
    {
        Inadmissible(request,
                     "duration " + std::to_string(d.Us()) + "us exceeds deadline " +
                         std::to_string(request.deadline.Us()) + "us");
    }
    return d;
}

TimeSpan
Window(const TransmissionRequest& request, TimeSpan margin)
{
    const TimeSpan d = ComputeDuration(request);
    const TimeSpan needed = d + margin;
    if (needed > request.deadline.SinceOrigin())
    {
        Inadmissible(request,
                     "duration plus margin " + std::to_string(needed.Us()) +
                         "us exceeds deadline " + std::to_string(request.deadline.Us()) + "us");
    }
    return request.deadline.SinceOrigin() - needed;
}

TimeSpan
Overlap(const Interval& a, const Interval& b)
{
    const TimePoint lo = std::max(a.start, b.start);
    const TimePoint hi = std::min(a.End(), b.End());
    return hi > lo ? hi - lo : TimeSpan{};
}

std::vector<Interval>
Occupancy(const Schedule& schedule, std::span<const TransmissionRequest> requests)
{
    if (schedule.Size() != requests.size())
    {
        throw Error(ErrorKind::LengthMismatch,
                    "schedule has " + std::to_string(schedule.Size()) + " starts for " +
                        std::to_string(requests.size()) + " requests");
    }
    std::vector<Interval> out;
    out.reserve(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i)
    {
        out.push_back({schedule[i], NominalDuration(requests[i])});
    }
    return out;
}

TimeSpan
TotalCost(const Schedule& schedule, std::span<const TransmissionRequest> requests)
{
    const auto intervals = Occupancy(schedule, requests);
    TimeSpan cost;
    for (std::size_t i = 0; i < intervals.size(); ++i)
    {
        for (std::size_t j = 0; j < intervals.size(); ++j)
        {
            if (i != j)
            {
                cost += Overlap(intervals[j], intervals[i]);
            }
        }
    }
    return cost;
}

bool
Feasible(const Schedule& schedule, std::span<const TransmissionRequest> requests, TimeSpan margin)
{
    if (schedule.Size() != requests.size())
    {
        return false;
    }
    for (std::size_t i = 0; i < requests.size(); ++i)
    {
        const TimePoint finish = schedule[i] + NominalDuration(requests[i]) + margin;
        if (finish > requests[i].deadline)
        {
            return false;
        }
    }
    return true;
}

} // namespace ovsched
