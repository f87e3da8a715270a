#include "ovsched/schedulers.h"

#include "ovsched/error.h"
#include "ovsched/rng.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace ovsched {

std::string_view
ToString(Ordering ordering)
{
    switch (ordering)
    {
    case Ordering::InputOrder:
        return "input-order";
    case Ordering::DeadlineAscending:
        return "deadline-ascending";
    }
    return "unknown";
}

std::string_view
ToString(Strategy strategy)
{
    switch (strategy)
    {
    case Strategy::Tsgs:
        return "tsgs";
    case Strategy::Exhaustive:
        return "exhaustive";
    case Strategy::Random:
        return "random";
    }
    return "unknown";
}

std::optional<Ordering>
ParseOrdering(std::string_view text)
{
    for (auto o : {Ordering::InputOrder, Ordering::DeadlineAscending})
    {
        if (ToString(o) == text)
        {
            return o;
        }
    }
    return std::nullopt;
}

std::optional<Strategy>
ParseStrategy(std::string_view text)
{
    for (auto s : {Strategy::Tsgs, Strategy::Exhaustive, Strategy::Random})
    {
        if (ToString(s) == text)
        {
            return s;
        }
    }
    return std::nullopt;
}

CandidateGrid
MakeCandidateGrid(const TransmissionRequest& request, const SchedulerConfig& config)
{
    if (config.step.IsZero())
    {
        throw Error(ErrorKind::ValidationError, "scheduler step must be positive");
    }
    return {config.step, Window(request, config.margin) / config.step};
}

namespace {

class Fnv1a
{
  public:
    void Add(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
        {
            m_hash ^= (v >> (8 * i)) & 0xff;
            m_hash *= 0x100000001b3ULL;
        }
    }
    std::uint64_t Value() const { return m_hash; }

  private:
    std::uint64_t m_hash = 0xcbf29ce484222325ULL;
};

struct Prepared
{
    std::vector<CandidateGrid> grids;
    std::vector<TimeSpan> durations;
};

Prepared
Prepare(std::span<const TransmissionRequest> requests, const SchedulerConfig& config)
{
    Prepared p;
    p.grids.reserve(requests.size());
    p.durations.reserve(requests.size());
    for (const auto& r : requests)
    {
        p.grids.push_back(MakeCandidateGrid(r, config));
        p.durations.push_back(ComputeDuration(r));
    }
    return p;
}

ScheduleResult
Finish(Schedule schedule,
       std::uint64_t evaluations,
       std::span<const TransmissionRequest> requests,
       const SchedulerConfig& config)
{
    ScheduleResult result;
    result.cost = TotalCost(schedule, requests);
    result.schedule = std::move(schedule);
    result.candidate_evaluations = evaluations;
    result.instance = InstanceFingerprint(requests, config);
    return result;
}

} // namespace

std::uint64_t
InstanceFingerprint(std::span<const TransmissionRequest> requests, const SchedulerConfig& config)
{
    Fnv1a h;
    h.Add(requests.size());
    for (const auto& r : requests)
    {
        h.Add(r.id);
        h.Add(static_cast<std::uint64_t>(r.deadline.Us()));
        h.Add(static_cast<std::uint64_t>(r.packet_count));
        h.Add(static_cast<std::uint64_t>(r.packet_airtime.Us()));
        h.Add(static_cast<std::uint64_t>(r.per_packet_overhead.Us()));
    }
    h.Add(static_cast<std::uint64_t>(config.step.Us()));
    h.Add(static_cast<std::uint64_t>(config.margin.Us()));
    return h.Value();
}

std::vector<std::size_t>
ProcessingOrder(std::span<const TransmissionRequest> requests, Ordering ordering)
{
    std::vector<std::size_t> order(requests.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (ordering == Ordering::DeadlineAscending)
    {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return requests[a].deadline < requests[b].deadline;
        });
    }
    return order;
}

ScheduleResult
TsgsSchedule(std::span<const TransmissionRequest> requests, const SchedulerConfig& config)
{
    const Prepared p = Prepare(requests, config);
    Schedule schedule{std::vector<TimePoint>(requests.size())};
    std::vector<Interval> fixed;
    fixed.reserve(requests.size());
    std::uint64_t evaluations = 0;

    for (std::size_t i : ProcessingOrder(requests, config.ordering))
    {
        const CandidateGrid& grid = p.grids[i];
        std::int64_t best_k = 0;
        TimeSpan best_cost{std::numeric_limits<std::int64_t>::max()};
        for (std::int64_t k = 0; k <= grid.sigma; ++k)
        {
            const Interval candidate{grid.At(k), p.durations[i]};
            TimeSpan phi;
            for (const Interval& other : fixed)
            {
                phi += Overlap(candidate, other);
            }
            evaluations += fixed.size();
            // strict: the earliest minimizer wins ties
            if (phi < best_cost)
            {
                best_cost = phi;
                best_k = k;
            }
        }
        schedule.starts[i] = grid.At(best_k);
        fixed.push_back({schedule.starts[i], p.durations[i]});
    }
    return Finish(std::move(schedule), evaluations, requests, config);
}

ScheduleResult
ExhaustiveSchedule(std::span<const TransmissionRequest> requests, const SchedulerConfig& config)
{
    const Prepared p = Prepare(requests, config);
    const std::size_t n = requests.size();

    std::uint64_t product = 1;
    for (const auto& grid : p.grids)
    {
        if (__builtin_mul_overflow(product, grid.Size(), &product) ||
            product > config.enumeration_cap)
        {
            throw Error(ErrorKind::InstanceTooLarge,
                        "candidate product exceeds enumeration cap of " +
                            std::to_string(config.enumeration_cap));
        }
    }

    // Odometer over k-vectors with the first connection most significant, so
    // points are visited in lexicographic order of the start vector.
    std::vector<std::int64_t> k(n, 0);
    std::vector<std::int64_t> best_k(n, 0);
    std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
    std::vector<Interval> intervals(n);
    std::uint64_t evaluations = 0;

    for (;;)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            intervals[i] = {p.grids[i].At(k[i]), p.durations[i]};
        }
        std::int64_t cost = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = i + 1; j < n; ++j)
            {
                cost += Overlap(intervals[i], intervals[j]).Us();
            }
        }
        cost *= 2;
        ++evaluations;
        if (cost < best_cost)
        {
            best_cost = cost;
            best_k = k;
        }

        bool advanced = false;
        for (std::size_t pos = n; pos-- > 0;)
        {
            if (k[pos] < p.grids[pos].sigma)
            {
                ++k[pos];
                advanced = true;
                break;
            }
            k[pos] = 0;
        }
        if (!advanced)
        {
            break;
        }
    }

    Schedule schedule{std::vector<TimePoint>(n)};
    for (std::size_t i = 0; i < n; ++i)
    {
        schedule.starts[i] = p.grids[i].At(best_k[i]);
    }
    return Finish(std::move(schedule), evaluations, requests, config);
}

ScheduleResult
RandomSchedule(std::span<const TransmissionRequest> requests,
               const SchedulerConfig& config,
               std::uint64_t seed)
{
    const Prepared p = Prepare(requests, config);
    Rng rng(seed, streams::kRandomSchedule);
    Schedule schedule{std::vector<TimePoint>(requests.size())};
    for (std::size_t i = 0; i < requests.size(); ++i)
    {
        const auto k = static_cast<std::int64_t>(rng.Below(p.grids[i].Size()));
        schedule.starts[i] = p.grids[i].At(k);
    }
    return Finish(std::move(schedule), 0, requests, config);
}

ScheduleResult
RunScheduler(Strategy strategy,
             std::span<const TransmissionRequest> requests,
             const SchedulerConfig& config,
             std::uint64_t seed)
{
    switch (strategy)
    {
    case Strategy::Tsgs:
        return TsgsSchedule(requests, config);
    case Strategy::Exhaustive:
        return ExhaustiveSchedule(requests, config);
    case Strategy::Random:
        return RandomSchedule(requests, config, seed);
    }
    throw Error(ErrorKind::ValidationError, "unknown strategy");
}

std::strong_ordering
CompareCost(const ScheduleResult& a, const ScheduleResult& b)
{
    if (a.instance != b.instance)
    {
        throw Error(ErrorKind::MismatchedInstance, "results come from different instances");
    }
    return a.cost <=> b.cost;
}

} // namespace ovsched
