#include "lorentz/scattering.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lorentz/errors.hpp"

namespace lorentz
{
namespace
{
void check_rho(double rho)
{
    if (!(std::fabs(rho) <= 1))
        throw DomainError("impact parameter must satisfy |rho| <= 1, got "
                          + std::to_string(rho));
}

// Interior/exterior speed ratio, or 0 when no transmission is possible
double index_or_zero(BarrierParams const& params)
{
    double const ratio = params.regime_ratio();
    return ratio >= 1 ? 0.0 : std::sqrt(1 - ratio);
}

// Refract unit direction d through an interface with unit normal n_hat
// pointing back toward the incident side; eta is the ratio of sines
// sin(out)/sin(in). Returns false on total reflection.
// Index ratio eta = n_from / n_to, passed as a fraction so sin_t is exact
// at the critical angle
bool refract(Vec2 d, Vec2 n_hat, double n_from, double n_to, Vec2& out)
{
    double const eta = n_from / n_to;
    double const cos_i = -dot(d, n_hat);
    double const sin_t = std::fabs(cross(d, n_hat)) * n_from / n_to;
    double const k = (1 - sin_t) * (1 + sin_t);
    if (k < 0)
        return false;
    out = d * eta + n_hat * (eta * cos_i - std::sqrt(k));
    out *= 1 / norm(out);
    return true;
}

Vec2 reflect(Vec2 d, Vec2 n_hat)
{
    return d - n_hat * (2 * dot(d, n_hat));
}
}  // namespace

void BarrierParams::validate() const
{
    if (!(epsilon > 0 && epsilon < 1))
        throw DomainError("epsilon must lie in (0,1)");
    if (!(alpha > 0 && alpha <= 0.5))
        throw DomainError("alpha must lie in (0, 1/2]");
    if (!(speed > 0) || !std::isfinite(speed))
        throw DomainError("speed must be positive");
}

double BarrierParams::barrier_height() const
{
    return std::pow(epsilon, alpha);
}

double BarrierParams::regime_ratio() const
{
    return 2 * barrier_height() / (speed * speed);
}

char const* to_string(ScatterBranch b)
{
    return b == ScatterBranch::refracted ? "refracted" : "totally_reflected";
}

double refractive_index(BarrierParams const& params)
{
    double const ratio = params.regime_ratio();
    if (ratio >= 1)
        throw RegimeError("2 eps^alpha / |v|^2 >= 1: barrier is impenetrable");
    return std::sqrt(1 - ratio);
}

ScatterOutcome scattering_angle_for_index(double rho, double n)
{
    check_rho(rho);
    double const a = std::fabs(rho);
    double const sign = rho < 0 ? -1.0 : 1.0;
    ScatterOutcome result;
    if (n > 0 && a <= n)
    {
        result.branch = ScatterBranch::refracted;
        result.angle = sign * 2 * (std::asin(a / n) - std::asin(a));
    }
    else
    {
        result.branch = ScatterBranch::totally_reflected;
        result.angle = 2 * std::acos(a);
        // Head-on reversal is +pi for both signs
        if (a > 0)
            result.angle *= sign;
    }
    if (result.angle == 0)
        result.angle = 0;  // no signed zero
    return result;
}

ScatterOutcome scattering_angle(double rho, BarrierParams const& params)
{
    return scattering_angle_for_index(rho, index_or_zero(params));
}

Vec2 deflect(Vec2 v_in, double rho, BarrierParams const& params)
{
    double const speed = norm(v_in);
    if (!(speed > 0))
        throw DomainError("cannot deflect a zero velocity");
    if (std::fabs(speed - params.speed) > 1e-9 * params.speed)
        throw DomainError("incoming speed does not match the barrier params");
    auto const outcome = scattering_angle(rho, params);
    Vec2 out = rotate(v_in, outcome.angle);
    out *= speed / norm(out);
    return out;
}

Vec2 hard_disk_reflect(Vec2 v_in, Vec2 omega)
{
    if (!(std::fabs(norm(omega) - 1) <= 1e-12))
        throw DomainError("reflection normal must be a unit vector");
    return v_in - omega * (2 * dot(omega, v_in));
}

RayTrace ray_trace(double rho, double n)
{
    check_rho(rho);
    Vec2 const d{1, 0};
    RayTrace result;
    result.entry = {-std::sqrt(1 - rho * rho), rho};
    Vec2 const n_in = result.entry;

    Vec2 chord;
    if (n <= 0 || !refract(d, n_in, 1, n, chord))
    {
        result.branch = ScatterBranch::totally_reflected;
        result.exit = result.entry;
        result.exit_direction = reflect(d, n_in);
    }
    else
    {
        result.branch = ScatterBranch::refracted;
        result.chord_length = -2 * dot(result.entry, chord);
        result.exit = result.entry + chord * result.chord_length;
        Vec2 const n_out = -result.exit * (1 / norm(result.exit));
        Vec2 out;
        if (!refract(chord, n_out, n, 1, out))
        {
            // Leaving toward the faster medium always transmits
            throw NumericalGuardError("ray trace: no transmission at exit");
        }
        result.exit_direction = out;
    }
    result.angle = std::atan2(cross(d, result.exit_direction),
                              dot(d, result.exit_direction));
    if (result.angle == -std::numbers::pi)
        result.angle = std::numbers::pi;
    return result;
}

RayTrace ray_trace(double rho, BarrierParams const& params)
{
    return ray_trace(rho, index_or_zero(params));
}

double ray_trace_oracle(double rho, BarrierParams const& params)
{
    return ray_trace(rho, params).angle;
}

}  // namespace lorentz
