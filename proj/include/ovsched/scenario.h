#pragma once

#include "ovsched/channel.h"
#include "ovsched/core.h"
#include "ovsched/schedulers.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ovsched {

inline constexpr std::string_view kScenarioFormat = "ovsched-scenario/1";

/// Inclusive range of per-connection windows: start, start + step, ... <= stop.
struct WindowSweep
{
    TimeSpan start;
    TimeSpan stop;
    TimeSpan step{1};

    std::vector<TimeSpan> Points() const;
    bool operator==(const WindowSweep&) const = default;
};

struct ScenarioSpec
{
    std::vector<TransmissionRequest> requests;
    std::vector<Strategy> schedulers;
    SchedulerConfig scheduler_config;
    ChannelConfig channel;
    std::vector<std::uint64_t> seeds;
    std::optional<WindowSweep> sweep;

    bool operator==(const ScenarioSpec&) const = default;
};

/**
 * Parses the line-oriented scenario format (see README). `source` prefixes
 * error messages, which carry the 1-based line number of the offending
 * directive. Throws ParseError for malformed text and ValidationError for
 * well-formed text that violates a scenario invariant.
 */
ScenarioSpec ParseScenario(std::string_view text, const std::string& source = "<scenario>");

ScenarioSpec LoadScenario(const std::filesystem::path& path);

/// Re-checks every invariant of an already-built spec.
void ValidateScenario(const ScenarioSpec& spec);

/// Parses "<decimal><unit>" with unit us, ms or s into exact microseconds.
std::optional<TimeSpan> ParseTime(std::string_view text);

/// Copy of `requests` with deadlines moved so that every window, under
/// `margin`, equals `window`.
std::vector<TransmissionRequest> WithWindow(std::span<const TransmissionRequest> requests,
                                            TimeSpan window,
                                            TimeSpan margin);

} // namespace ovsched
