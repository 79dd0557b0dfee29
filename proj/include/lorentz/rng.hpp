#pragma once

#include <cstdint>
#include <limits>

namespace lorentz
{
//---------------------------------------------------------------------------//
/*!
 * SplitMix64 finalizer: bijective 64-bit mixing function.
 */
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

//! Combine a key with one more 64-bit word (order dependent).
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t word)
{
    return mix64(key ^ mix64(word + 0x632be59bd9b4e019ULL));
}

//---------------------------------------------------------------------------//
/*!
 * xoshiro256++ generator, seeded from a 64-bit key through SplitMix64.
 *
 * Satisfies UniformRandomBitGenerator so it can also drive std
 * distributions, but the samplers in this library use the helpers below
 * so results do not depend on the standard library implementation.
 */
class Rng
{
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()()
    {
        std::uint64_t const result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t const t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    //! Uniform double in [0, 1) with 53 random bits.
    double uniform() { return ((*this)() >> 11) * 0x1.0p-53; }

    //! Uniform double in (0, 1]; safe for logarithms.
    double uniform_pos() { return (((*this)() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    //! Exponential variate by inverse CDF.
    double exponential(double rate);

    //! Standard normal variate (Box-Muller, one value per call pair cached).
    double normal();

    //! Poisson variate: multiplication method below mean 10, Hormann PTRS
    //! above.
    std::uint64_t poisson(double mean);

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    double cached_normal_ = 0;
    bool has_cached_ = false;
};

//! Independent, reproducible stream for (master seed, stream index).
Rng rng_stream(std::uint64_t master_seed, std::uint64_t stream_index);

}  // namespace lorentz
