// SPDX-License-Identifier: Apache-2.0
//! \file spinport/rng.hpp
//! Counter-based random streams (Philox4x32-10).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace spinport
{
//---------------------------------------------------------------------------//
/*!
 * Philox4x32 with ten rounds (Salmon et al., "Parallel random numbers: as
 * easy as 1, 2, 3", SC 2011).
 *
 * Multipliers 0xD2511F53 / 0xCD9E8D57, Weyl key increments 0x9E3779B9 /
 * 0xBB67AE85. Output is bit-identical to the Random123 reference.
 */
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    static constexpr int kRounds = 10;

    static constexpr Counter block(Counter ctr, Key key) noexcept
    {
        for (int r = 0; r < kRounds; ++r)
        {
            if (r > 0)
            {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            std::uint64_t const p0 = std::uint64_t{kMul0} * ctr[0];
            std::uint64_t const p1 = std::uint64_t{kMul1} * ctr[2];
            auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto const lo0 = static_cast<std::uint32_t>(p0);
            auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto const lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

//---------------------------------------------------------------------------//
/*!
 * A reproducible random stream identified by (seed, stream id, domain).
 *
 * Layout of the Philox input:
 *  - key     = (seed & 0xffffffff, seed >> 32)
 *  - counter = (block index, stream_id & 0xffffffff, stream_id >> 32, domain)
 *
 * Each block yields four 32-bit words consumed in order. A 64-bit draw takes
 * two consecutive words as (low, high). `uniform()` maps the top 53 bits of a
 * 64-bit draw to [0, 1). `normal()` is the cosine branch of Box-Muller using
 * two uniforms, with no cached second variate. Any implementation following
 * these rules reproduces the same stream from the same seed.
 *
 * Satisfies std::uniform_random_bit_generator.
 */
class RandomStream
{
  public:
    using result_type = std::uint32_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id,
                 std::uint32_t domain = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)}
        , stream_{static_cast<std::uint32_t>(stream_id),
                  static_cast<std::uint32_t>(stream_id >> 32)}
        , domain_{domain}
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept { return next_u32(); }

    std::uint32_t next_u32() noexcept
    {
        if (word_ == 4)
        {
            buffer_ = Philox4x32::block(
                {block_++, stream_[0], stream_[1], domain_}, key_);
            word_ = 0;
        }
        return buffer_[word_++];
    }

    std::uint64_t next_u64() noexcept
    {
        std::uint64_t const lo = next_u32();
        std::uint64_t const hi = next_u32();
        return (hi << 32) | lo;
    }

    //! Uniform in [0, 1) with 53 bits of resolution.
    double uniform() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    //! Standard normal variate.
    double normal() noexcept
    {
        double const u1 = uniform();
        double const u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1))
               * std::cos(2.0 * std::numbers::pi * u2);
    }

    //! Exponential variate with the given mean.
    double exponential(double mean) noexcept
    {
        return -mean * std::log1p(-uniform());
    }

    //! True with probability p.
    bool bernoulli(double p) noexcept { return uniform() < p; }

  private:
    Philox4x32::Key key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint32_t domain_;
    std::uint32_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int word_ = 4;
};

//! Stream domains used by the batch drivers, so that equal seeds do not
//! reuse streams across unrelated subsystems.
enum class StreamDomain : std::uint32_t
{
    generic = 0,
    teleport = 1,
    bellscan = 2,
    discrimination = 3,
    experiment = 4,
    beam_clock = 5,
};

inline RandomStream
make_stream(std::uint64_t seed, std::uint64_t id, StreamDomain domain)
{
    return RandomStream{seed, id, static_cast<std::uint32_t>(domain)};
}

}  // namespace spinport
