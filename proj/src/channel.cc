#include "ovsched/channel.h"

#include "ovsched/error.h"
#include "ovsched/rng.h"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <ostream>
#include <queue>

namespace ovsched {

std::string_view
ToString(SenderPhase phase)
{
    switch (phase)
    {
    case SenderPhase::IdleUntilStart:
        return "idle-until-start";
    case SenderPhase::Sensing:
        return "sensing";
    case SenderPhase::AifsWait:
        return "aifs-wait";
    case SenderPhase::Backoff:
        return "backoff";
    case SenderPhase::Transmitting:
        return "transmitting";
    case SenderPhase::Done:
        return "done";
    }
    return "unknown";
}

std::string_view
ToString(PacketOutcome outcome)
{
    switch (outcome)
    {
    case PacketOutcome::Received:
        return "received";
    case PacketOutcome::Collided:
        return "collided";
    case PacketOutcome::AmbientLost:
        return "ambient-lost";
    }
    return "unknown";
}

void
ValidateChannel(const ChannelConfig& channel)
{
    if (channel.slot_time.IsZero())
    {
        throw Error(ErrorKind::ValidationError, "channel slot_time must be positive");
    }
    if (channel.cw < 1)
    {
        throw Error(ErrorKind::ValidationError, "channel cw must be at least 1");
    }
    if (!(channel.ambient_loss_rate >= 0.0 && channel.ambient_loss_rate <= 1.0))
    {
        throw Error(ErrorKind::ValidationError, "channel ambient_loss_rate must lie in [0, 1]");
    }
}

std::string
FormatTraceLine(const TraceEvent& event)
{
    std::string line = std::to_string(event.time.Us()) + " c" + std::to_string(event.connection) +
                       " p" + std::to_string(event.packet) + " " +
                       std::string(ToString(event.from)) + " -> " + std::string(ToString(event.to));
    if (event.backoff_slots >= 0)
    {
        line += " slots=" + std::to_string(event.backoff_slots);
    }
    return line;
}

namespace {

enum class EventKind : int
{
    TxEnd = 0,
    Access = 1,
    AifsExpire = 2,
    SlotExpire = 3,
};

struct Event
{
    TimePoint time;
    EventKind kind;
    std::size_t connection;
    std::uint64_t token;

    // min-heap on (time, kind, connection)
    bool operator>(const Event& o) const
    {
        if (time != o.time)
        {
            return time > o.time;
        }
        if (kind != o.kind)
        {
            return kind > o.kind;
        }
        return connection > o.connection;
    }
};

struct Sender
{
    SenderPhase phase = SenderPhase::IdleUntilStart;
    TimePoint start;
    TimeSpan airtime;
    std::int64_t packet_count = 0;
    std::int64_t packet = 0;
    TimePoint access_start;
    std::optional<std::int64_t> backoff;
    bool armed = false;
    std::uint64_t token = 0;
};

struct ActiveTx
{
    std::size_t connection;
    std::size_t record;
    TimePoint end;
    std::int64_t group;
};

class ChannelSimulation
{
  public:
    ChannelSimulation(std::span<const TransmissionRequest> requests,
                      const Schedule& schedule,
                      const ChannelConfig& channel,
                      std::uint64_t seed,
                      std::ostream* trace)
        : m_requests(requests),
          m_channel(channel),
          m_rng(seed, streams::kChannel),
          m_trace(trace)
    {
        ValidateChannel(channel);
        if (schedule.Size() != requests.size())
        {
            throw Error(ErrorKind::LengthMismatch,
                        "schedule has " + std::to_string(schedule.Size()) + " starts for " +
                            std::to_string(requests.size()) + " requests");
        }
        m_senders.resize(requests.size());
        m_report.connections.resize(requests.size());
        for (std::size_t i = 0; i < requests.size(); ++i)
        {
            ValidateRequest(requests[i]);
            Sender& s = m_senders[i];
            s.start = schedule[i];
            s.airtime = requests[i].packet_airtime;
            s.packet_count = requests[i].packet_count;
            Push(s.start, EventKind::Access, i, 0);
        }
    }

    SimReport Run()
    {
        while (!m_queue.empty())
        {
            Step(m_queue.top().time);
        }
        Summarize();
        return std::move(m_report);
    }

  private:
    void Push(TimePoint t, EventKind kind, std::size_t conn, std::uint64_t token)
    {
        m_queue.push({t, kind, conn, token});
    }

    void Arm(std::size_t conn, TimePoint t, EventKind kind)
    {
        Sender& s = m_senders[conn];
        s.armed = true;
        Push(t, kind, conn, ++s.token);
    }

    void Disarm(Sender& s)
    {
        s.armed = false;
        ++s.token;
    }

    void SetPhase(std::size_t conn, SenderPhase to, TimePoint now)
    {
        Sender& s = m_senders[conn];
        if (m_trace != nullptr && s.phase != to)
        {
            TraceEvent ev{now, conn, s.phase, to, s.backoff.value_or(-1), s.packet};
            *m_trace << FormatTraceLine(ev) << '\n';
        }
        s.phase = to;
    }

    void BeginAccess(std::size_t conn, TimePoint now)
    {
        Sender& s = m_senders[conn];
        s.access_start = now;
        s.backoff.reset();
        SetPhase(conn, SenderPhase::Sensing, now);
    }

    void Step(TimePoint now)
    {
        std::vector<std::size_t> ready;
        while (!m_queue.empty() && m_queue.top().time == now)
        {
            const Event ev = m_queue.top();
            m_queue.pop();
            Sender& s = m_senders[ev.connection];
            switch (ev.kind)
            {
            case EventKind::TxEnd:
                FinishTransmission(ev.connection, now);
                break;
            case EventKind::Access:
                BeginAccess(ev.connection, now);
                break;
            case EventKind::AifsExpire:
                if (ev.token != s.token)
                {
                    break;
                }
                s.armed = false;
                if (!s.backoff || *s.backoff == 0)
                {
                    ready.push_back(ev.connection);
                }
                else
                {
                    Arm(ev.connection, now + m_channel.slot_time, EventKind::SlotExpire);
                }
                break;
            case EventKind::SlotExpire:
                if (ev.token != s.token)
                {
                    break;
                }
                s.armed = false;
                if (--*s.backoff == 0)
                {
                    ready.push_back(ev.connection);
                }
                else
                {
                    Arm(ev.connection, now + m_channel.slot_time, EventKind::SlotExpire);
                }
                break;
            }
        }

        std::sort(ready.begin(), ready.end());
        for (std::size_t conn : ready)
        {
            StartTransmission(conn, now);
        }

        const bool busy = !m_active.empty();
        for (std::size_t conn = 0; conn < m_senders.size(); ++conn)
        {
            Sender& s = m_senders[conn];
            switch (s.phase)
            {
            case SenderPhase::Sensing:
                if (busy)
                {
                    Defer(conn, now);
                }
                else
                {
                    SetPhase(conn, SenderPhase::AifsWait, now);
                    Arm(conn, now + m_channel.aifs, EventKind::AifsExpire);
                }
                break;
            case SenderPhase::AifsWait:
                if (busy)
                {
                    Disarm(s);
                    Defer(conn, now);
                }
                break;
            case SenderPhase::Backoff:
                if (busy && s.armed)
                {
                    Disarm(s); // frozen; counter keeps the slots already counted
                }
                else if (!busy && !s.armed)
                {
                    Arm(conn, now + m_channel.aifs, EventKind::AifsExpire);
                }
                break;
            default:
                break;
            }
        }
    }

    void Defer(std::size_t conn, TimePoint now)
    {
        Sender& s = m_senders[conn];
        if (!s.backoff)
        {
            s.backoff = static_cast<std::int64_t>(m_rng.Below(static_cast<std::uint64_t>(m_channel.cw)));
            ++m_report.connections[conn].backoff_activations;
            ++m_report.backoff_activations;
        }
        SetPhase(conn, SenderPhase::Backoff, now);
    }

    void StartTransmission(std::size_t conn, TimePoint now)
    {
        Sender& s = m_senders[conn];
        PacketRecord rec;
        rec.connection = conn;
        rec.index = s.packet;
        rec.access_start = s.access_start;
        rec.tx_start = now;
        rec.tx_end = now + s.airtime;
        m_report.packets.push_back(rec);

        ActiveTx tx{conn, m_report.packets.size() - 1, rec.tx_end, -1};
        if (!m_active.empty())
        {
            std::int64_t group = -1;
            for (const ActiveTx& other : m_active)
            {
                group = std::max(group, other.group);
            }
            if (group < 0)
            {
                group = m_report.collision_events++;
            }
            for (ActiveTx& other : m_active)
            {
                other.group = group;
                m_report.packets[other.record].outcome = PacketOutcome::Collided;
            }
            tx.group = group;
            m_report.packets[tx.record].outcome = PacketOutcome::Collided;
        }
        m_active.push_back(tx);

        SetPhase(conn, SenderPhase::Transmitting, now);
        s.backoff.reset();
        Push(rec.tx_end, EventKind::TxEnd, conn, 0);
    }

    void FinishTransmission(std::size_t conn, TimePoint now)
    {
        const auto it = std::find_if(m_active.begin(), m_active.end(), [&](const ActiveTx& tx) {
            return tx.connection == conn && tx.end == now;
        });
        PacketRecord& rec = m_report.packets[it->record];
        m_active.erase(it);

        if (rec.outcome != PacketOutcome::Collided && m_channel.ambient_loss_rate > 0.0 &&
            m_rng.Unit() < m_channel.ambient_loss_rate)
        {
            rec.outcome = PacketOutcome::AmbientLost;
        }
        if (rec.outcome == PacketOutcome::Received && m_channel.deadline_accounting &&
            rec.tx_end > m_requests[conn].deadline)
        {
            rec.late = true;
        }

        Sender& s = m_senders[conn];
        if (s.packet + 1 < s.packet_count)
        {
            ++s.packet;
            BeginAccess(conn, now);
        }
        else
        {
            SetPhase(conn, SenderPhase::Done, now);
        }
    }

    void Summarize()
    {
        std::vector<std::int64_t> delay_sum(m_senders.size(), 0);
        std::vector<TimePoint> last_end(m_senders.size());
        for (std::size_t i = 0; i < m_senders.size(); ++i)
        {
            last_end[i] = m_senders[i].start;
        }
        for (const PacketRecord& rec : m_report.packets)
        {
            ConnectionReport& c = m_report.connections[rec.connection];
            const Sender& s = m_senders[rec.connection];
            ++c.sent;
            switch (rec.outcome)
            {
            case PacketOutcome::Received:
                ++c.received;
                break;
            case PacketOutcome::Collided:
                ++c.collided;
                break;
            case PacketOutcome::AmbientLost:
                ++c.ambient_lost;
                break;
            }
            c.delivered_late += rec.late ? 1 : 0;
            const TimePoint uncontended_end =
                s.start + (m_channel.aifs + s.airtime) * (rec.index + 1);
            delay_sum[rec.connection] += (rec.tx_end - uncontended_end).Us();
            last_end[rec.connection] = std::max(last_end[rec.connection], rec.tx_end);
        }
        for (std::size_t i = 0; i < m_senders.size(); ++i)
        {
            ConnectionReport& c = m_report.connections[i];
            c.mean_delay_us =
                c.sent > 0 ? static_cast<double>(delay_sum[i]) / static_cast<double>(c.sent) : 0.0;
            c.realized_duration = last_end[i] - m_senders[i].start;
            m_report.total_sent += c.sent;
            m_report.total_received += c.received;
            m_report.total_collided += c.collided;
        }
        m_report.pdr = m_report.total_sent > 0 ? static_cast<double>(m_report.total_received) /
                                                     static_cast<double>(m_report.total_sent)
                                               : 0.0;
    }

    std::span<const TransmissionRequest> m_requests;
    ChannelConfig m_channel;
    Rng m_rng;
    std::ostream* m_trace;
    std::vector<Sender> m_senders;
    std::vector<ActiveTx> m_active;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> m_queue;
    SimReport m_report;
};

} // namespace

SimReport
Simulate(std::span<const TransmissionRequest> requests,
         const Schedule& schedule,
         const ChannelConfig& channel,
         std::uint64_t seed)
{
    return ChannelSimulation(requests, schedule, channel, seed, nullptr).Run();
}

SimReport
Simulate(std::span<const TransmissionRequest> requests,
         const Schedule& schedule,
         const ChannelConfig& channel,
         std::uint64_t seed,
         std::ostream& trace)
{
    return ChannelSimulation(requests, schedule, channel, seed, &trace).Run();
}

double
Pdr(const SimReport& report)
{
    if (report.total_sent == 0)
    {
        throw Error(ErrorKind::NoPacketsSent, "report contains no sent packets");
    }
    return static_cast<double>(report.total_received) / static_cast<double>(report.total_sent);
}

std::vector<std::int64_t>
CollisionSummary(const SimReport& report)
{
    std::vector<std::int64_t> out;
    out.reserve(report.connections.size());
    for (const auto& c : report.connections)
    {
        out.push_back(c.collided);
    }
    return out;
}

std::string
ToJson(const SimReport& report)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["total_sent"] = report.total_sent;
    j["total_received"] = report.total_received;
    j["total_collided"] = report.total_collided;
    j["collision_events"] = report.collision_events;
    j["backoff_activations"] = report.backoff_activations;
    j["pdr"] = report.pdr;
    ordered_json conns = ordered_json::array();
    for (const auto& c : report.connections)
    {
        conns.push_back({{"sent", c.sent},
                         {"received", c.received},
                         {"collided", c.collided},
                         {"ambient_lost", c.ambient_lost},
                         {"delivered_late", c.delivered_late},
                         {"backoff_activations", c.backoff_activations},
                         {"mean_delay_us", c.mean_delay_us},
                         {"realized_duration_us", c.realized_duration.Us()}});
    }
    j["connections"] = std::move(conns);
    ordered_json packets = ordered_json::array();
    for (const auto& p : report.packets)
    {
        packets.push_back({p.connection,
                           p.index,
                           p.access_start.Us(),
                           p.tx_start.Us(),
                           p.tx_end.Us(),
                           ToString(p.outcome),
                           p.late});
    }
    j["packets"] = std::move(packets);
    return j.dump();
}

} // namespace ovsched
