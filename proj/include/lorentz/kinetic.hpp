#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lorentz/rng.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/vec2.hpp"

namespace lorentz
{
//---------------------------------------------------------------------------//
/*!
 * Linear Boltzmann jump process on the speed circle.
 *
 * Jumps arrive at the constant rate `rate`; each rotates the velocity by
 * theta(rho) for rho uniform on [-1, 1], where theta is the barrier
 * deflection law of refractive index `index`. An index of zero gives the
 * hard-disk law theta = 2 arccos|rho|.
 */
struct JumpProcessParams
{
    double rate = 1.0;
    double speed = 1.0;
    double index = 0.0;

    //! Process generated by barriers of intensity mu * eps^-(1 + 2 alpha)
    static JumpProcessParams barrier(BarrierParams const& params, double mu);
    //! Hard disks of radius r and intensity mu_eff: rate 2 mu_eff r |v|
    static JumpProcessParams
    hard_disk(double mu_eff, double radius, double speed);

    double angle(double rho) const;
    double sample_angle(Rng& rng) const;
    void validate() const;
};

struct JumpPath
{
    //! Start, every jump, and the end point; times nondecreasing
    std::vector<double> times;
    std::vector<Vec2> positions;
    //! Velocity on [times[i], times[i+1])
    std::vector<Vec2> velocities;

    Vec2 final_position() const { return positions.back(); }
    Vec2 final_velocity() const { return velocities.back(); }
    std::size_t jumps() const { return times.size() - 2; }
};

JumpPath sample_boltzmann_path(
    Vec2 x0, Vec2 v0, double t, JumpProcessParams const& params, Rng& rng);

struct LandauPath
{
    std::vector<double> times;
    std::vector<Vec2> positions;
    std::vector<double> angles;  //!< unwrapped velocity angle
    double speed = 0;

    Vec2 velocity(std::size_t i) const;
};

//! Angle Brownian motion with diffusion constant c = B / |v|^2.
LandauPath
sample_landau_path(Vec2 x0, Vec2 v0, double t, double B, double dt, Rng& rng);

//---------------------------------------------------------------------------//
// Landau coefficient
//---------------------------------------------------------------------------//

//! (mu eps^-2alpha / 2) |v| times the integral of theta^2 over [-1, 1].
double landau_B_quadrature(double epsilon, double alpha, double mu, double speed);

//! Same prefactor with an arbitrary integrand g(rho) in place of theta^2.
double landau_B_quadrature(BarrierParams const& params,
                           double mu,
                           std::function<double(double)> const& integrand);

struct MonteCarloEstimate
{
    double value = 0;
    double std_error = 0;
};

MonteCarloEstimate landau_B_monte_carlo(BarrierParams const& params,
                                        double mu,
                                        std::uint64_t samples,
                                        std::uint64_t seed);

//! Renormalized coefficient 2 alpha mu / |v|^3.
double landau_B_tilde(double alpha, double mu, double speed);

//! Coefficient of (1/|v|) Laplacian form with prefactor mu/2.
double landau_B_operator_form(double mu, double speed);

//! Integral over rho in [-1, 1] of f(theta(rho)) for a barrier law.
double angle_moment(BarrierParams const& params,
                    std::function<double(double)> const& f);

//---------------------------------------------------------------------------//
// Diffusion coefficient
//---------------------------------------------------------------------------//

enum class GreenKuboMethod
{
    analytic_vacf,
    monte_carlo
};

struct LandauEnsembleOptions
{
    std::uint64_t paths = 100'000;
    double dt = 0.01;
    //! Horizon in correlation times 1/c
    double horizon = 10.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct LandauEnsemble
{
    std::vector<double> times;
    std::vector<double> msd;
    std::vector<double> vacf;
    double D_vacf = 0;  //!< half the trapezoid integral of the VACF
    double D_msd = 0;   //!< late-half MSD slope / 4
    double msd_r2 = 0;
    double max_speed_error = 0;
};

LandauEnsemble run_landau_ensemble(double B,
                                   double speed,
                                   LandauEnsembleOptions const& options);

//! D = |v|^2 / (2c) with c = B / |v|^2, or the Monte Carlo VACF estimate.
double green_kubo_D(double B,
                    double mu,
                    double speed,
                    GreenKuboMethod method,
                    LandauEnsembleOptions const& options = {});

//! |v|^2 / (2 rate (1 - E cos theta)) for the jump process.
double boltzmann_D(JumpProcessParams const& params);

//! E cos theta under rho uniform on [-1, 1].
double mean_cos_angle(JumpProcessParams const& params);

struct KineticCoefficients
{
    double B_eps = 0;
    double B_tilde = 0;
    double D = 0;
};

KineticCoefficients
kinetic_coefficients(BarrierParams const& params, double mu);

//---------------------------------------------------------------------------//
// Density evolution
//---------------------------------------------------------------------------//

struct PhaseGrid
{
    double x_lo = -1, x_hi = 1;
    double y_lo = -1, y_hi = 1;
    std::size_t nx = 16, ny = 16, n_angle = 256;
};

//! Histogram of (position, angle) normalized to a probability density.
struct PhaseDensity
{
    PhaseGrid grid;
    std::vector<std::uint64_t> counts;  //!< [ix][iy][ia], row major
    std::uint64_t total = 0;            //!< includes out-of-range samples

    std::size_t index(std::size_t ix, std::size_t iy, std::size_t ia) const
    {
        return (ix * grid.ny + iy) * grid.n_angle + ia;
    }
    double cell_volume() const;
    double density(std::size_t ix, std::size_t iy, std::size_t ia) const;
    std::vector<std::uint64_t> angle_counts() const;
    void add(Vec2 x, double angle);
    void merge(PhaseDensity const& other);
};

PhaseDensity make_phase_density(PhaseGrid const& grid);

using InitialSampler = std::function<std::pair<Vec2, Vec2>(Rng&)>;

PhaseDensity evolve_boltzmann_density(InitialSampler const& initial,
                                      double t,
                                      JumpProcessParams const& params,
                                      std::uint64_t n_paths,
                                      PhaseGrid const& grid,
                                      std::uint64_t seed,
                                      unsigned threads = 1);

}  // namespace lorentz
