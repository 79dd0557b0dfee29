#include "lorentz/rng.hpp"

#include <cmath>
#include <numbers>

namespace lorentz
{
Rng::Rng(std::uint64_t key)
{
    std::uint64_t z = key;
    for (auto& s : s_)
    {
        z += 0x9e3779b97f4a7c15ULL;
        s = mix64(z);
    }
}

double Rng::exponential(double rate)
{
    return -std::log(uniform_pos()) / rate;
}

double Rng::normal()
{
    if (has_cached_)
    {
        has_cached_ = false;
        return cached_normal_;
    }
    double const r = std::sqrt(-2.0 * std::log(uniform_pos()));
    double const phi = 2.0 * std::numbers::pi * uniform();
    cached_normal_ = r * std::sin(phi);
    has_cached_ = true;
    return r * std::cos(phi);
}

std::uint64_t Rng::poisson(double mean)
{
    if (!(mean > 0))
        return 0;
    if (mean < 10)
    {
        double const limit = std::exp(-mean);
        double prod = uniform_pos();
        std::uint64_t k = 0;
        while (prod > limit)
        {
            prod *= uniform_pos();
            ++k;
        }
        return k;
    }

    // Transformed rejection with squeeze (Hormann 1993, PTRS)
    double const log_mean = std::log(mean);
    double const b = 0.931 + 2.53 * std::sqrt(mean);
    double const a = -0.059 + 0.02483 * b;
    double const inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    double const v_r = 0.9277 - 3.6224 / (b - 2);
    while (true)
    {
        double const u = uniform() - 0.5;
        double const v = uniform();
        double const us = 0.5 - std::fabs(u);
        double const kd = std::floor((2 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r)
            return static_cast<std::uint64_t>(kd);
        if (kd < 0 || (us < 0.013 && v > us))
            continue;
        double const lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double const rhs = -mean + kd * log_mean - std::lgamma(kd + 1);
        if (lhs <= rhs)
            return static_cast<std::uint64_t>(kd);
    }
}

Rng rng_stream(std::uint64_t master_seed, std::uint64_t stream_index)
{
    return Rng{derive_key(mix64(master_seed), stream_index)};
}

}  // namespace lorentz
