#pragma once

#include <cstdint>
#include <random>

namespace ovsched {

/**
 * Seeded generator with draws that do not depend on the standard library's
 * distribution implementations, so a seed reproduces the same stream on any
 * toolchain. `stream` separates independent consumers of one user seed.
 */
class Rng
{
    __extension__ using Wide = unsigned __int128;

  public:
    Rng(std::uint64_t seed, std::uint32_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          stream};
        m_engine.seed(seq);
    }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t Below(std::uint64_t bound)
    {
        // Lemire's nearly-divisionless rejection method.
        Wide m = static_cast<Wide>(m_engine()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound)
        {
            const std::uint64_t threshold = -bound % bound;
            while (low < threshold)
            {
                m = static_cast<Wide>(m_engine()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double Unit() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 m_engine;
};

namespace streams {
inline constexpr std::uint32_t kRandomSchedule = 0x5c4ed;
inline constexpr std::uint32_t kChannel = 0xc4a7;
} // namespace streams

} // namespace ovsched
