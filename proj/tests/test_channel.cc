#include "ovsched/channel.h"
#include "ovsched/error.h"
#include "ovsched/schedulers.h"

#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace ovsched;
using namespace ovsched::literals;

namespace {

TransmissionRequest
Train(std::size_t id, std::int64_t packets, std::int64_t airtime = 23,
      std::int64_t deadline = 1'000'000)
{
    return {id, TimePoint(deadline), packets, TimeSpan(airtime), TimeSpan{}};
}

Schedule
At(std::initializer_list<std::int64_t> starts)
{
    Schedule s;
    for (auto t : starts)
    {
        s.starts.push_back(TimePoint(t));
    }
    return s;
}

std::vector<const PacketRecord*>
PacketsOf(const SimReport& r, std::size_t conn)
{
    std::vector<const PacketRecord*> out;
    for (const auto& p : r.packets)
    {
        if (p.connection == conn)
        {
            out.push_back(&p);
        }
    }
    return out;
}

} // namespace

TEST_CASE("disjoint trains never contend")
{
    ChannelConfig ch; // 13 / 58 / cw 15
    std::vector reqs{Train(0, 3), Train(1, 3)};
    // Train 0 occupies [0, 243); train 1 starts 100 us later than that.
    const auto r = Simulate(reqs, At({0, 343}), ch, 1);
    CHECK(r.total_collided == 0);
    CHECK(r.backoff_activations == 0);
    CHECK(r.pdr == 1.0);
    CHECK(Pdr(r) == 1.0);
    CHECK(CollisionSummary(r) == std::vector<std::int64_t>{0, 0});
}

TEST_CASE("equal starts with cw = 1 collide in lockstep")
{
    // Both sense idle at 0, both AIFS-expire at 58, both transmit [58, 81).
    ChannelConfig ch;
    ch.cw = 1;
    std::vector reqs{Train(0, 1), Train(1, 1)};
    const auto r = Simulate(reqs, At({0, 0}), ch, 9);
    CHECK(r.total_collided == 2);
    CHECK(r.pdr == 0.0);
    CHECK(r.collision_events == 1);
    CHECK(r.backoff_activations == 0);
    CHECK(CollisionSummary(r) == std::vector<std::int64_t>{1, 1});
    for (const auto& p : r.packets)
    {
        CHECK(p.tx_start == TimePoint(58));
        CHECK(p.tx_end == TimePoint(81));
        CHECK(p.outcome == PacketOutcome::Collided);
    }
}

TEST_CASE("three simultaneous single packets form one collision")
{
    std::vector reqs{Train(0, 1), Train(1, 1), Train(2, 1)};
    const auto r = Simulate(reqs, At({5, 5, 5}), ChannelConfig{}, 4);
    CHECK(CollisionSummary(r) == std::vector<std::int64_t>{1, 1, 1});
    CHECK(r.collision_events == 1);
}

TEST_CASE("uncontended train takes one AIFS plus one airtime per packet")
{
    std::vector reqs{Train(0, 50)};
    const auto r = Simulate(reqs, At({1000}), ChannelConfig{}, 2);
    CHECK(r.connections[0].received == 50);
    CHECK(r.connections[0].realized_duration == TimeSpan(50 * (58 + 23)));
    CHECK(r.connections[0].realized_duration == 4050_us);
    CHECK(r.connections[0].mean_delay_us == 0.0);
    const auto p = PacketsOf(r, 0);
    CHECK(p.front()->tx_start == TimePoint(1058));
    CHECK(p.back()->tx_end == TimePoint(1000 + 4050));
}

TEST_CASE("hand-traced deferral followed by a zero backoff")
{
    // c0: 2 packets from t=0. c1: 1 packet from t=10.
    //   0  c0 senses idle, AIFS until 58
    //  10  c1 senses idle, AIFS until 68
    //  58  c0 transmits [58, 81); c1's AIFS is cut short -> backoff, k = 0 (cw = 1)
    //  81  c0 done with p0, senses idle; c1 sees idle; both wait AIFS until 139
    // 139  both transmit [139, 162) -> collision
    ChannelConfig ch;
    ch.cw = 1;
    std::vector reqs{Train(0, 2), Train(1, 1)};
    std::ostringstream trace;
    const auto r = Simulate(reqs, At({0, 10}), ch, 3, trace);

    const auto c0 = PacketsOf(r, 0);
    const auto c1 = PacketsOf(r, 1);
    REQUIRE(c0.size() == 2);
    REQUIRE(c1.size() == 1);
    CHECK(c0[0]->tx_start == TimePoint(58));
    CHECK(c0[0]->outcome == PacketOutcome::Received);
    CHECK(c0[1]->tx_start == TimePoint(139));
    CHECK(c0[1]->outcome == PacketOutcome::Collided);
    CHECK(c1[0]->tx_start == TimePoint(139));
    CHECK(c1[0]->outcome == PacketOutcome::Collided);
    CHECK(r.backoff_activations == 1);
    CHECK(r.connections[1].backoff_activations == 1);
    // c1's uncontended end would be 10 + 81 = 91; it ended at 162.
    CHECK(r.connections[1].mean_delay_us == 71.0);

    const std::string text = trace.str();
    CHECK(text.find("58 c1 p0 aifs-wait -> backoff slots=0\n") != std::string::npos);
    CHECK(text.find("139 c1 p0 backoff -> transmitting slots=0\n") != std::string::npos);
    CHECK(text.find("162 c0 p1 transmitting -> done\n") != std::string::npos);
}

TEST_CASE("a deferred sender waits out the whole competing train")
{
    // c0 sends 3 packets at 58, 139, 220 (each followed by AIFS). c1 arrives at
    // 10, is deferred at 58 with k slots. Unless k = 0 (collision at 139) its
    // counter never runs while c0's AIFS keeps winning, so it transmits at
    // 243 + 58 + 13k.
    ChannelConfig ch;
    std::vector reqs{Train(0, 3), Train(1, 1)};
    std::set<std::int64_t> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed)
    {
        const auto r = Simulate(reqs, At({0, 10}), ch, seed);
        const auto c1 = PacketsOf(r, 1);
        REQUIRE(c1.size() == 1);
        const std::int64_t start = c1[0]->tx_start.Us();
        if (start == 139)
        {
            CHECK(r.total_collided == 2);
            seen.insert(0);
        }
        else
        {
            const std::int64_t k = (start - 301) / 13;
            CHECK((start - 301) % 13 == 0);
            CHECK(k >= 1);
            CHECK(k <= 14);
            CHECK(r.total_collided == 0);
            seen.insert(k);
        }
    }
    CHECK(seen.size() == 15); // every backoff value in [0, 14] occurs
}

TEST_CASE("ambient loss and deadline accounting")
{
    std::vector reqs{Train(0, 10, 23, 400)};
    SUBCASE("certain loss")
    {
        ChannelConfig ch;
        ch.ambient_loss_rate = 1.0;
        const auto r = Simulate(reqs, At({0}), ch, 1);
        CHECK(r.connections[0].ambient_lost == 10);
        CHECK(r.pdr == 0.0);
    }
    SUBCASE("partial loss conserves packets")
    {
        ChannelConfig ch;
        ch.ambient_loss_rate = 0.5;
        const auto r = Simulate(reqs, At({0}), ch, 1);
        const auto& c = r.connections[0];
        CHECK(c.sent == c.received + c.collided + c.ambient_lost);
        CHECK(c.ambient_lost > 0);
        CHECK(c.received > 0);
    }
    SUBCASE("late packets are counted only when enabled")
    {
        ChannelConfig ch;
        // Packet p ends at 81 (p + 1); deadline 400 admits p = 0..3.
        CHECK(Simulate(reqs, At({0}), ch, 1).connections[0].delivered_late == 0);
        ch.deadline_accounting = true;
        const auto r = Simulate(reqs, At({0}), ch, 1);
        CHECK(r.connections[0].delivered_late == 6);
        CHECK(r.connections[0].received == 10);
    }
}

TEST_CASE("errors")
{
    std::vector reqs{Train(0, 1), Train(1, 1)};
    try
    {
        Simulate(reqs, At({0}), ChannelConfig{}, 1);
        FAIL("expected length-mismatch");
    }
    catch (const Error& e)
    {
        CHECK(e.Kind() == ErrorKind::LengthMismatch);
    }

    ChannelConfig bad;
    bad.cw = 0;
    CHECK_THROWS_AS(Simulate(reqs, At({0, 0}), bad, 1), Error);
    bad = {};
    bad.slot_time = 0_us;
    CHECK_THROWS_AS(Simulate(reqs, At({0, 0}), bad, 1), Error);

    SimReport empty;
    try
    {
        Pdr(empty);
        FAIL("expected no-packets-sent");
    }
    catch (const Error& e)
    {
        CHECK(e.Kind() == ErrorKind::NoPacketsSent);
    }
}

TEST_CASE("pdr arithmetic")
{
    SimReport r;
    r.total_sent = 100;
    r.total_received = 86;
    CHECK(Pdr(r) == doctest::Approx(0.86));
    r.total_received = 100;
    CHECK(Pdr(r) == 1.0);
    r.total_received = 0;
    CHECK(Pdr(r) == 0.0);
}

TEST_CASE("simulator properties over random scenarios")
{
    std::mt19937 gen(99);
    for (int trial = 0; trial < 300; ++trial)
    {
        ChannelConfig ch;
        ch.cw = std::uniform_int_distribution<int>(1, 16)(gen);
        ch.aifs = TimeSpan(std::uniform_int_distribution<int>(10, 80)(gen));
        ch.slot_time = TimeSpan(std::uniform_int_distribution<int>(1, 20)(gen));
        ch.ambient_loss_rate = trial % 3 == 0 ? 0.2 : 0.0;

        const int n = std::uniform_int_distribution<int>(1, 4)(gen);
        std::vector<TransmissionRequest> reqs;
        Schedule s;
        for (int i = 0; i < n; ++i)
        {
            reqs.push_back(Train(static_cast<std::size_t>(i),
                                 std::uniform_int_distribution<int>(1, 12)(gen),
                                 std::uniform_int_distribution<int>(5, 40)(gen)));
            s.starts.push_back(TimePoint(std::uniform_int_distribution<int>(0, 600)(gen)));
        }
        const auto seed = static_cast<std::uint64_t>(trial);
        const auto r = Simulate(reqs, s, ch, seed);

        // conservation
        for (std::size_t i = 0; i < reqs.size(); ++i)
        {
            const auto& c = r.connections[i];
            CHECK(c.sent == reqs[i].packet_count);
            CHECK(c.sent == c.received + c.collided + c.ambient_lost);
            // realized duration never beats the uncontended train
            auto nominal = reqs[i];
            nominal.per_packet_overhead = ch.aifs;
            CHECK(c.realized_duration >= NominalDuration(nominal));
            CHECK(c.mean_delay_us >= 0.0);
        }
        CHECK(r.pdr >= 0.0);
        CHECK(r.pdr <= 1.0);

        // determinism
        CHECK(ToJson(Simulate(reqs, s, ch, seed)) == ToJson(r));

        // every collision hits at least two distinct connections
        std::map<std::int64_t, std::set<std::size_t>> groups;
        for (const auto& p : r.packets)
        {
            if (p.outcome == PacketOutcome::Collided)
            {
                // group packets by the instant they collided on
                groups[p.tx_start.Us()].insert(p.connection);
            }
        }
        for (const auto& [t, conns] : groups)
        {
            CHECK(conns.size() >= 2);
        }

        // Senders whose active periods never meet never back off.
        bool ever_concurrent = false;
        for (int i = 0; i < n; ++i)
        {
            for (int j = i + 1; j < n; ++j)
            {
                const Interval a{s[i], r.connections[i].realized_duration};
                const Interval b{s[j], r.connections[j].realized_duration};
                ever_concurrent = ever_concurrent || !Overlap(a, b).IsZero();
            }
        }
        if (!ever_concurrent)
        {
            CHECK(r.backoff_activations == 0);
            CHECK(r.total_collided == 0);
        }
    }
}

TEST_CASE("zero-overlap schedules are collision free")
{
    // Nominal intervals built with overhead = AIFS are exactly what an
    // uncontended sender occupies, so disjoint intervals never contend.
    std::mt19937 gen(1234);
    for (int trial = 0; trial < 200; ++trial)
    {
        ChannelConfig ch;
        ch.cw = std::uniform_int_distribution<int>(1, 16)(gen);
        const int n = std::uniform_int_distribution<int>(2, 5)(gen);
        std::vector<TransmissionRequest> reqs;
        Schedule s;
        std::int64_t cursor = std::uniform_int_distribution<int>(0, 50)(gen);
        for (int i = 0; i < n; ++i)
        {
            TransmissionRequest r = Train(static_cast<std::size_t>(i),
                                          std::uniform_int_distribution<int>(1, 20)(gen),
                                          std::uniform_int_distribution<int>(5, 40)(gen));
            r.per_packet_overhead = ch.aifs;
            s.starts.push_back(TimePoint(cursor));
            cursor += NominalDuration(r).Us() + ch.aifs.Us() +
                      std::uniform_int_distribution<int>(0, 100)(gen);
            reqs.push_back(r);
        }
        REQUIRE(TotalCost(s, reqs).IsZero());
        const auto r = Simulate(reqs, s, ch, static_cast<std::uint64_t>(trial));
        CHECK(r.total_collided == 0);
        CHECK(r.backoff_activations == 0);
        CHECK(r.pdr == 1.0);
        for (std::size_t i = 0; i < reqs.size(); ++i)
        {
            CHECK(r.connections[i].realized_duration == NominalDuration(reqs[i]));
        }
    }
}

TEST_CASE("touching nominal intervals do not contend either")
{
    ChannelConfig ch;
    TransmissionRequest a = Train(0, 50);
    TransmissionRequest b = Train(1, 50);
    a.per_packet_overhead = b.per_packet_overhead = ch.aifs;
    std::vector reqs{a, b};
    const auto r = Simulate(reqs, At({0, 4050}), ch, 5);
    CHECK(r.total_collided == 0);
    CHECK(r.backoff_activations == 0);
}
