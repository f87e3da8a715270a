#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ovsched {

/// Length of time in whole microseconds. Never negative.
class TimeSpan
{
  public:
    constexpr TimeSpan() = default;

    constexpr explicit TimeSpan(std::int64_t us)
        : m_us(us)
    {
        if (us < 0)
        {
            throw std::domain_error("TimeSpan must be non-negative");
        }
    }

    constexpr std::int64_t Us() const { return m_us; }
    constexpr bool IsZero() const { return m_us == 0; }

    constexpr auto operator<=>(const TimeSpan&) const = default;

    constexpr TimeSpan operator+(TimeSpan rhs) const { return TimeSpan(Checked(m_us, rhs.m_us)); }

    /// Throws std::domain_error when rhs is longer than *this.
    constexpr TimeSpan operator-(TimeSpan rhs) const { return TimeSpan(m_us - rhs.m_us); }

    constexpr TimeSpan operator*(std::int64_t factor) const
    {
        std::int64_t out = 0;
        if (factor < 0 || __builtin_mul_overflow(m_us, factor, &out))
        {
            throw std::overflow_error("TimeSpan multiplication out of range");
        }
        return TimeSpan(out);
    }

    /// Number of whole `step`s that fit in *this.
    constexpr std::int64_t operator/(TimeSpan step) const
    {
        if (step.IsZero())
        {
            throw std::domain_error("division by zero TimeSpan");
        }
        return m_us / step.m_us;
    }

    constexpr TimeSpan& operator+=(TimeSpan rhs) { return *this = *this + rhs; }

    static constexpr std::int64_t Checked(std::int64_t a, std::int64_t b)
    {
        std::int64_t out = 0;
        if (__builtin_add_overflow(a, b, &out))
        {
            throw std::overflow_error("time arithmetic out of range");
        }
        return out;
    }

  private:
    std::int64_t m_us = 0;
};

/// Instant on the scheduling time axis, microseconds from the origin (0).
class TimePoint
{
  public:
    constexpr TimePoint() = default;

    constexpr explicit TimePoint(std::int64_t us)
        : m_us(us)
    {
        if (us < 0)
        {
            throw std::domain_error("TimePoint must be non-negative");
        }
    }

    constexpr std::int64_t Us() const { return m_us; }
    constexpr TimeSpan SinceOrigin() const { return TimeSpan(m_us); }

    constexpr auto operator<=>(const TimePoint&) const = default;

    constexpr TimePoint operator+(TimeSpan rhs) const
    {
        return TimePoint(TimeSpan::Checked(m_us, rhs.Us()));
    }

    /// Throws std::domain_error when `earlier` is after *this.
    constexpr TimeSpan operator-(TimePoint earlier) const { return TimeSpan(m_us - earlier.m_us); }

  private:
    std::int64_t m_us = 0;
};

constexpr TimePoint
operator+(TimeSpan lhs, TimePoint rhs)
{
    return rhs + lhs;
}

namespace literals {

constexpr TimeSpan operator""_us(unsigned long long us)
{
    return TimeSpan(static_cast<std::int64_t>(us));
}

constexpr TimeSpan operator""_ms(unsigned long long ms)
{
    return TimeSpan(static_cast<std::int64_t>(ms) * 1000);
}

} // namespace literals

} // namespace ovsched
