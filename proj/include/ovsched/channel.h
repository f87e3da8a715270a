#pragma once

#include "ovsched/core.h"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ovsched {

/**
 * \brief MAC timing of the shared broadcast channel.
 *
 * Defaults are 802.11p-flavoured (13 us slots, AIFS of 58 us). The contention
 * window is fixed: broadcast frames are never acknowledged, so a sender
 * cannot detect a loss and never doubles its window or retransmits.
 */
struct ChannelConfig
{
    TimeSpan slot_time{13};
    TimeSpan aifs{58};
    /// Backoff is drawn uniformly from [0, cw - 1] slots.
    std::int64_t cw = 15;
    /// Default airtime for requests that do not state their own. The
    /// simulator always transmits each packet for its request's airtime.
    TimeSpan packet_airtime{23};
    /// Independent per-packet loss applied to packets that did not collide.
    double ambient_loss_rate = 0.0;
    /// Count received packets that end after their request's deadline.
    bool deadline_accounting = false;

    bool operator==(const ChannelConfig&) const = default;
};

/// Throws ValidationError unless slot_time > 0, cw >= 1 and the loss rate is
/// a probability.
void ValidateChannel(const ChannelConfig& channel);

enum class SenderPhase
{
    IdleUntilStart,
    Sensing,
    AifsWait,
    Backoff,
    Transmitting,
    Done,
};

std::string_view ToString(SenderPhase phase);

enum class PacketOutcome
{
    Received,
    Collided,
    AmbientLost,
};

std::string_view ToString(PacketOutcome outcome);

struct PacketRecord
{
    std::size_t connection = 0;
    std::int64_t index = 0;
    /// When the sender began channel access for this packet.
    TimePoint access_start;
    TimePoint tx_start;
    TimePoint tx_end;
    PacketOutcome outcome = PacketOutcome::Received;
    bool late = false;

    bool operator==(const PacketRecord&) const = default;
};

struct ConnectionReport
{
    std::int64_t sent = 0;
    std::int64_t received = 0;
    std::int64_t collided = 0;
    std::int64_t ambient_lost = 0;
    std::int64_t delivered_late = 0;
    std::int64_t backoff_activations = 0;
    /// Mean of (actual tx end - uncontended tx end) over all sent packets.
    double mean_delay_us = 0.0;
    /// Last packet end minus the scheduled start.
    TimeSpan realized_duration;

    bool operator==(const ConnectionReport&) const = default;
};

struct SimReport
{
    std::vector<ConnectionReport> connections;
    std::vector<PacketRecord> packets;
    std::int64_t total_sent = 0;
    std::int64_t total_received = 0;
    std::int64_t total_collided = 0;
    /// Groups of mutually overlapping transmissions.
    std::int64_t collision_events = 0;
    std::int64_t backoff_activations = 0;
    double pdr = 0.0;

    bool operator==(const SimReport&) const = default;
};

/// One phase change of one sender.
struct TraceEvent
{
    TimePoint time;
    std::size_t connection = 0;
    SenderPhase from = SenderPhase::IdleUntilStart;
    SenderPhase to = SenderPhase::IdleUntilStart;
    /// Slots left on the backoff counter after the change, -1 if none.
    std::int64_t backoff_slots = -1;
    std::int64_t packet = 0;
};

/// "<time_us> c<conn> p<packet> <from> -> <to>[ slots=<n>]"
std::string FormatTraceLine(const TraceEvent& event);

/**
 * \brief Run every connection's packet train over one shared channel.
 *
 * Sender i wakes at schedule[i] and sends request i's packets one after the
 * other. For each packet it senses the channel; if idle it waits AIFS and
 * transmits, provided the channel stayed idle. If the channel is or becomes
 * busy the sender draws a backoff from [0, cw - 1] slots, then after every
 * busy period waits AIFS and counts idle slots down, freezing while busy.
 * Transmissions whose airtimes overlap destroy each other. Senders whose
 * AIFS or backoff expires at the same instant transmit together and collide.
 *
 * Ties at one instant resolve in the order: transmission ends, access
 * starts, AIFS/slot expiries; then within a kind by connection id.
 *
 * Throws LengthMismatch if the schedule does not cover every request.
 */
SimReport Simulate(std::span<const TransmissionRequest> requests,
                   const Schedule& schedule,
                   const ChannelConfig& channel,
                   std::uint64_t seed);

/// As above, additionally writing one FormatTraceLine() per phase change.
SimReport Simulate(std::span<const TransmissionRequest> requests,
                   const Schedule& schedule,
                   const ChannelConfig& channel,
                   std::uint64_t seed,
                   std::ostream& trace);

/// Aggregate received / sent. Throws NoPacketsSent for an empty report.
double Pdr(const SimReport& report);

std::vector<std::int64_t> CollisionSummary(const SimReport& report);

/// Canonical JSON text of a report; equal reports give equal text.
std::string ToJson(const SimReport& report);

} // namespace ovsched
