#pragma once

#include "lorentz/vec2.hpp"

namespace lorentz
{
//---------------------------------------------------------------------------//
/*!
 * Microscopic interaction of one circular potential barrier.
 *
 * The barrier has height epsilon^alpha in units where the particle has unit
 * mass; the dimensionless ratio 2 epsilon^alpha / speed^2 decides whether a
 * particle can enter the barrier at all. At or above one every impact is
 * reflected as off a hard disk.
 */
struct BarrierParams
{
    double epsilon = 0.01;
    double alpha = 0.25;
    double speed = 1.0;

    //! Validate ranges: epsilon in (0,1), alpha in (0, 1/2], speed > 0.
    void validate() const;

    double barrier_height() const;
    //! 2 epsilon^alpha / speed^2
    double regime_ratio() const;
    bool totally_reflecting() const { return regime_ratio() >= 1; }
};

enum class ScatterBranch
{
    refracted,
    totally_reflected
};

char const* to_string(ScatterBranch b);

struct ScatterOutcome
{
    double angle = 0;  //!< signed, in (-pi, pi]
    ScatterBranch branch = ScatterBranch::refracted;
};

// Ratio of interior to exterior speed; throws RegimeError when the particle
// cannot enter the barrier
double refractive_index(BarrierParams const& params);

// Deflection for a signed impact parameter normalized by the disk radius.
// Positive rho means the particle passes on the left of the center (the
// center is on its right) and is turned counterclockwise.
ScatterOutcome scattering_angle(double rho, BarrierParams const& params);

//! Same as above for an explicit refractive index n in [0, 1].
ScatterOutcome scattering_angle_for_index(double rho, double n);

//! Rotate v_in by the scattering angle; the speed is kept exactly.
Vec2 deflect(Vec2 v_in, double rho, BarrierParams const& params);

//! Specular reflection v - 2 (omega.v) omega about a unit normal.
Vec2 hard_disk_reflect(Vec2 v_in, Vec2 omega);

//---------------------------------------------------------------------------//
/*!
 * Explicit geometric construction of one barrier crossing.
 *
 * The barrier is the unit disk at the origin and the particle arrives along
 * +x on the line y = rho. Snell's law is applied in vector form at the entry
 * and exit points; when the transmitted ray would not exist the particle is
 * reflected specularly at the entry point. None of the closed-form
 * deflection formulas are used, so this serves as an oracle.
 */
struct RayTrace
{
    double angle = 0;
    ScatterBranch branch = ScatterBranch::refracted;
    Vec2 entry;
    Vec2 exit;            //!< equals entry when reflected
    Vec2 exit_direction;  //!< unit vector
    double chord_length = 0;
};

RayTrace ray_trace(double rho, double n);
RayTrace ray_trace(double rho, BarrierParams const& params);
double ray_trace_oracle(double rho, BarrierParams const& params);

}  // namespace lorentz
