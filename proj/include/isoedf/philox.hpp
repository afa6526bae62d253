#pragma once

#include <array>
#include <cstdint>

namespace isoedf {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A pure
/// function of (key, counter): any block can be produced independently,
/// which makes per-trial streams reproducible under any thread schedule.
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
    {
    }

    [[nodiscard]] Counter operator()(Counter ctr) const noexcept
    {
        Key k = key_;
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, k);
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        return ctr;
    }

  private:
    static Counter single_round(Counter const& c, Key const& k) noexcept
    {
        std::uint64_t const p0 = std::uint64_t{0xD2511F53u} * c[0];
        std::uint64_t const p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
        auto const lo0 = static_cast<std::uint32_t>(p0);
        auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
        auto const lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    Key key_;
};

/// Maps two 32-bit words to a double in [0, 1) with 53 random bits.
inline double to_unit_interval(std::uint32_t hi, std::uint32_t lo) noexcept
{
    std::uint64_t const bits = (std::uint64_t{hi} << 21) ^ (std::uint64_t{lo} >> 11);
    return static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) * 0x1.0p-53;
}

} // namespace isoedf
