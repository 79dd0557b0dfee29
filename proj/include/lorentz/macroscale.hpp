#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lorentz/kinetic.hpp"
#include "lorentz/stats.hpp"

namespace lorentz
{
//! Cell-centered scalar field on a uniform square grid, row major in x.
struct DensityGrid
{
    double x_lo = 0;
    double y_lo = 0;
    double dx = 1;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;

    static DensityGrid zeros(double x_lo, double y_lo, double dx,
                             std::size_t nx, std::size_t ny);
    double& at(std::size_t ix, std::size_t iy) { return values[ix * ny + iy]; }
    double at(std::size_t ix, std::size_t iy) const
    {
        return values[ix * ny + iy];
    }
    double x_center(std::size_t ix) const { return x_lo + (ix + 0.5) * dx; }
    double y_center(std::size_t iy) const { return y_lo + (iy + 0.5) * dx; }
    double mass() const;
};

//! L2 norm of the difference of two grids on the same geometry.
double l2_distance(DensityGrid const& a, DensityGrid const& b);

//---------------------------------------------------------------------------//
/*!
 * Explicit five-point scheme for d_t rho = D Laplacian(rho) on a closed
 * rectangle with zero-flux edges.
 *
 * The update is written as a sum of antisymmetric face fluxes, so the total
 * mass changes only by rounding.
 */
class HeatProblem
{
  public:
    //! Throws DomainError unless D >= 0, dt > 0, density >= 0 and
    //! D dt / dx^2 <= 1/4.
    HeatProblem(double D, DensityGrid initial, double dt);

    double D() const { return D_; }
    double dt() const { return dt_; }
    DensityGrid const& initial() const { return initial_; }

  private:
    double D_;
    DensityGrid initial_;
    double dt_;
};

DensityGrid solve_heat(HeatProblem const& problem, double t);

//! Integrate a phase density over angle: sum_a f(x, a) * dphi.
DensityGrid angular_average(PhaseGrid const& grid, std::vector<double> const& f);
DensityGrid angular_average(PhaseDensity const& f);

//---------------------------------------------------------------------------//
// Slab with reservoirs
//---------------------------------------------------------------------------//

struct SlabSpec
{
    double L = 1;
    double rho1 = 2;
    double rho2 = 1;
    double eta = 2;
    double epsilon = 1.0 / 64;  //!< hard-disk diameter
    double mu = 1;

    void validate() const;
    //! True when sqrt(eps) * eta^6 <= 1
    bool regime_ok() const;
    double radius() const { return epsilon / 2; }
    //! Intensity mu * eta / eps of disk centers
    double effective_intensity() const { return mu * eta / epsilon; }
};

std::function<double(double)> stationary_profile(SlabSpec const& slab);

double fick_flux(SlabSpec const& slab, double D);

//! Green-Kubo D of the hard-disk Boltzmann process, times eta.
double slab_kinetic_D(SlabSpec const& slab);

struct SlabRunOptions
{
    std::uint64_t injections = 100'000;  //!< per reservoir
    std::size_t bins = 10;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double t_max = 1e4;  //!< guard on a single trajectory
};

struct SlabBin
{
    double x = 0;
    double rho = 0;
    double rho_ci = 0;
    double J = 0;
    double J_ci = 0;
    double rho_first = 0;  //!< from the first half of the injections
    double rho_second = 0;
    double rho_half_ci = 0;  //!< 95% half width of one half-estimate
};

struct SlabResult
{
    std::vector<SlabBin> bins;
    LinearFit profile_fit;
    LinearFit flux_fit;
    double J_mean = 0;
    double J_mean_ci = 0;
    double implied_D = 0;
    std::uint64_t unfinished = 0;
    std::uint64_t resampled = 0;
    std::uint64_t collisions = 0;
    bool regime_warning = false;
};

/*!
 * Stationary slab state by boundary injection.
 *
 * Each reservoir injects `injections` particles with flux-weighted angles.
 * Every injection sees its own Poisson field of hard disks restricted to
 * 0 < x < L; the injection is redrawn when it starts inside a disk.
 * Density and flux per x bin are scaled to reservoir densities rho1, rho2;
 * the flux carries the factor eta.
 */
SlabResult
simulate_slab_stationary(SlabSpec const& slab, SlabRunOptions const& options);

}  // namespace lorentz
