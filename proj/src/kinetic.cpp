#include "lorentz/kinetic.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "lorentz/errors.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/stats.hpp"

namespace lorentz
{
namespace
{
constexpr double quad_tol = 1e-11;

// Integral of g over [-1, 1], split at the branch points +-n
double integrate_rho(double n, std::function<double(double)> const& g)
{
    boost::math::quadrature::tanh_sinh<double> quad;
    std::vector<double> cuts{-1.0};
    if (n > 0 && n < 1)
    {
        cuts.push_back(-n);
        cuts.push_back(0.0);
        cuts.push_back(n);
    }
    else
    {
        cuts.push_back(0.0);
    }
    cuts.push_back(1.0);
    double sum = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        sum += quad.integrate(g, cuts[i], cuts[i + 1], quad_tol);
    return sum;
}

double index_or_zero(BarrierParams const& params)
{
    return params.totally_reflecting() ? 0.0 : refractive_index(params);
}

double b_prefactor(BarrierParams const& params, double mu)
{
    return 0.5 * mu * std::pow(params.epsilon, -2 * params.alpha)
           * params.speed;
}
}  // namespace

//---------------------------------------------------------------------------//
JumpProcessParams
JumpProcessParams::barrier(BarrierParams const& params, double mu)
{
    params.validate();
    JumpProcessParams p;
    p.rate = 2 * mu * std::pow(params.epsilon, -2 * params.alpha)
             * params.speed;
    p.speed = params.speed;
    p.index = index_or_zero(params);
    return p;
}

JumpProcessParams
JumpProcessParams::hard_disk(double mu_eff, double radius, double speed)
{
    JumpProcessParams p;
    p.rate = 2 * mu_eff * radius * speed;
    p.speed = speed;
    p.index = 0;
    return p;
}

double JumpProcessParams::angle(double rho) const
{
    return scattering_angle_for_index(rho, index).angle;
}

double JumpProcessParams::sample_angle(Rng& rng) const
{
    return angle(rng.uniform(-1.0, 1.0));
}

void JumpProcessParams::validate() const
{
    if (!(rate >= 0) || !std::isfinite(rate))
        throw DomainError("jump rate must be finite and non-negative");
    if (!(speed > 0))
        throw DomainError("speed must be positive");
    if (!(index >= 0 && index < 1))
        throw DomainError("refractive index must lie in [0, 1)");
}

JumpPath sample_boltzmann_path(
    Vec2 x0, Vec2 v0, double t, JumpProcessParams const& params, Rng& rng)
{
    params.validate();
    if (!(t >= 0))
        throw DomainError("path duration must be non-negative");
    if (std::fabs(norm(v0) - params.speed) > 1e-9 * params.speed)
        throw DomainError("initial speed does not match the process");

    JumpPath path;
    path.times.push_back(0);
    path.positions.push_back(x0);
    path.velocities.push_back(v0);
    double now = 0;
    Vec2 x = x0;
    double phi = angle_of(v0);
    while (params.rate > 0)
    {
        double const wait = rng.exponential(params.rate);
        if (now + wait >= t)
            break;
        now += wait;
        x += path.velocities.back() * wait;
        phi += params.sample_angle(rng);
        path.times.push_back(now);
        path.positions.push_back(x);
        path.velocities.push_back(unit_from_angle(phi) * params.speed);
    }
    x += path.velocities.back() * (t - now);
    path.times.push_back(t);
    path.positions.push_back(x);
    path.velocities.push_back(path.velocities.back());
    return path;
}

Vec2 LandauPath::velocity(std::size_t i) const
{
    return unit_from_angle(angles[i]) * speed;
}

LandauPath
sample_landau_path(Vec2 x0, Vec2 v0, double t, double B, double dt, Rng& rng)
{
    if (!(dt > 0))
        throw DomainError("time step must be positive");
    if (!(t >= 0) || !(B >= 0))
        throw DomainError("duration and B must be non-negative");
    LandauPath path;
    path.speed = norm(v0);
    if (!(path.speed > 0))
        throw DomainError("initial velocity must be nonzero");
    double const c = B / (path.speed * path.speed);
    auto const steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-12));
    path.times.reserve(steps + 1);
    path.positions.reserve(steps + 1);
    path.angles.reserve(steps + 1);

    double phi = angle_of(v0);
    Vec2 x = x0;
    path.times.push_back(0);
    path.positions.push_back(x);
    path.angles.push_back(phi);
    for (std::size_t k = 0; k < steps; ++k)
    {
        double const t0 = k * dt;
        double const h = std::min(dt, t - t0);
        double const next = phi + std::sqrt(2 * c * h) * rng.normal();
        x += unit_from_angle(0.5 * (phi + next)) * (path.speed * h);
        phi = next;
        path.times.push_back(t0 + h);
        path.positions.push_back(x);
        path.angles.push_back(phi);
    }
    return path;
}

//---------------------------------------------------------------------------//
double landau_B_quadrature(double epsilon, double alpha, double mu, double speed)
{
    BarrierParams const params{epsilon, alpha, speed};
    params.validate();
    if (!(mu > 0))
        throw DomainError("mu must be positive");
    double const n = refractive_index(params);
    double const integral = integrate_rho(n, [n](double rho) {
        double const th = scattering_angle_for_index(rho, n).angle;
        return th * th;
    });
    return b_prefactor(params, mu) * integral;
}

double landau_B_quadrature(BarrierParams const& params,
                           double mu,
                           std::function<double(double)> const& integrand)
{
    params.validate();
    return b_prefactor(params, mu)
           * integrate_rho(index_or_zero(params), integrand);
}

MonteCarloEstimate landau_B_monte_carlo(BarrierParams const& params,
                                        double mu,
                                        std::uint64_t samples,
                                        std::uint64_t seed)
{
    params.validate();
    if (samples < 2)
        throw DomainError("need at least two samples");
    Rng rng = rng_stream(seed, 0);
    double const n = index_or_zero(params);
    RunningStats stats;
    for (std::uint64_t i = 0; i < samples; ++i)
    {
        double const th
            = scattering_angle_for_index(rng.uniform(-1.0, 1.0), n).angle;
        stats.add(th * th);
    }
    // The rho integral equals 2 E[theta^2] for rho uniform on [-1, 1]
    double const scale = 2 * b_prefactor(params, mu);
    return {scale * stats.mean(), scale * stats.std_error()};
}

double landau_B_tilde(double alpha, double mu, double speed)
{
    return 2 * alpha * mu / (speed * speed * speed);
}

double landau_B_operator_form(double mu, double speed)
{
    return mu / (2 * speed);
}

double angle_moment(BarrierParams const& params,
                    std::function<double(double)> const& f)
{
    params.validate();
    double const n = index_or_zero(params);
    return integrate_rho(n, [&](double rho) {
        return f(scattering_angle_for_index(rho, n).angle);
    });
}

//---------------------------------------------------------------------------//
namespace
{
struct EnsembleSums
{
    std::vector<double> msd;
    std::vector<double> vacf;
    double max_speed_error = 0;
};
}  // namespace

LandauEnsemble run_landau_ensemble(double B,
                                   double speed,
                                   LandauEnsembleOptions const& options)
{
    if (!(B > 0) || !(speed > 0))
        throw DomainError("B and speed must be positive");
    if (options.paths < 1 || !(options.dt > 0) || !(options.horizon > 0))
        throw DomainError("invalid Landau ensemble options");
    double const c = B / (speed * speed);
    double const t_end = options.horizon / c;
    auto const steps
        = static_cast<std::size_t>(std::ceil(t_end / options.dt - 1e-12));

    EnsembleSums init;
    init.msd.assign(steps + 1, 0.0);
    init.vacf.assign(steps + 1, 0.0);
    auto body = [&](std::uint64_t begin, std::uint64_t end, EnsembleSums& acc) {
        for (std::uint64_t i = begin; i < end; ++i)
        {
            Rng rng = rng_stream(options.seed, i);
            Vec2 const v0
                = unit_from_angle(rng.uniform(0, 2 * std::numbers::pi)) * speed;
            auto const path
                = sample_landau_path({0, 0}, v0, t_end, B, options.dt, rng);
            for (std::size_t k = 0; k <= steps; ++k)
            {
                Vec2 const vk = path.velocity(k);
                acc.msd[k] += norm_sq(path.positions[k]);
                acc.vacf[k] += dot(v0, vk);
                acc.max_speed_error = std::max(acc.max_speed_error,
                                               std::fabs(norm(vk) - speed));
            }
        }
    };
    auto merge = [](EnsembleSums& total, EnsembleSums const& part) {
        for (std::size_t k = 0; k < total.msd.size(); ++k)
        {
            total.msd[k] += part.msd[k];
            total.vacf[k] += part.vacf[k];
        }
        total.max_speed_error
            = std::max(total.max_speed_error, part.max_speed_error);
    };
    auto sums = parallel_reduce(options.paths, options.threads, init, body, merge);

    LandauEnsemble out;
    out.times.resize(steps + 1);
    out.msd.resize(steps + 1);
    out.vacf.resize(steps + 1);
    double const n = static_cast<double>(options.paths);
    for (std::size_t k = 0; k <= steps; ++k)
    {
        out.times[k] = std::min(k * options.dt, t_end);
        out.msd[k] = sums.msd[k] / n;
        out.vacf[k] = sums.vacf[k] / n;
    }
    out.D_vacf = 0.5 * trapezoid(out.times, out.vacf);

    std::vector<double> late_t, late_msd;
    for (std::size_t k = steps / 2; k <= steps; ++k)
    {
        late_t.push_back(out.times[k]);
        late_msd.push_back(out.msd[k]);
    }
    auto const fit = linear_fit(late_t, late_msd);
    out.D_msd = fit.slope / 4;
    out.msd_r2 = fit.r2;
    out.max_speed_error = sums.max_speed_error;
    return out;
}

double green_kubo_D(double B,
                    double mu,
                    double speed,
                    GreenKuboMethod method,
                    LandauEnsembleOptions const& options)
{
    if (!(B > 0) || !(mu > 0) || !(speed > 0))
        throw DomainError("B, mu and speed must be positive");
    if (method == GreenKuboMethod::analytic_vacf)
    {
        double const c = B / (speed * speed);
        return speed * speed / (2 * c);
    }
    return run_landau_ensemble(B, speed, options).D_vacf;
}

double mean_cos_angle(JumpProcessParams const& params)
{
    params.validate();
    double const n = params.index;
    return 0.5 * integrate_rho(n, [n](double rho) {
        return std::cos(scattering_angle_for_index(rho, n).angle);
    });
}

double boltzmann_D(JumpProcessParams const& params)
{
    params.validate();
    if (!(params.rate > 0))
        throw DomainError("diffusion needs a positive jump rate");
    double const v2 = params.speed * params.speed;
    return v2 / (2 * params.rate * (1 - mean_cos_angle(params)));
}

KineticCoefficients kinetic_coefficients(BarrierParams const& params, double mu)
{
    KineticCoefficients k;
    k.B_eps = landau_B_quadrature(params.epsilon, params.alpha, mu, params.speed);
    k.B_tilde = landau_B_tilde(params.alpha, mu, params.speed);
    k.D = green_kubo_D(k.B_eps, mu, params.speed, GreenKuboMethod::analytic_vacf);
    return k;
}

//---------------------------------------------------------------------------//
PhaseDensity make_phase_density(PhaseGrid const& grid)
{
    if (grid.nx == 0 || grid.ny == 0 || grid.n_angle == 0
        || !(grid.x_hi > grid.x_lo) || !(grid.y_hi > grid.y_lo))
    {
        throw DomainError("malformed phase grid");
    }
    PhaseDensity d;
    d.grid = grid;
    d.counts.assign(grid.nx * grid.ny * grid.n_angle, 0);
    return d;
}

double PhaseDensity::cell_volume() const
{
    return (grid.x_hi - grid.x_lo) / grid.nx * (grid.y_hi - grid.y_lo)
           / grid.ny * (2 * std::numbers::pi / grid.n_angle);
}

double PhaseDensity::density(std::size_t ix, std::size_t iy, std::size_t ia) const
{
    if (total == 0)
        return 0;
    return counts[index(ix, iy, ia)] / (total * cell_volume());
}

std::vector<std::uint64_t> PhaseDensity::angle_counts() const
{
    std::vector<std::uint64_t> out(grid.n_angle, 0);
    for (std::size_t i = 0; i < counts.size(); ++i)
        out[i % grid.n_angle] += counts[i];
    return out;
}

void PhaseDensity::add(Vec2 x, double angle)
{
    ++total;
    double const fx = (x.x - grid.x_lo) / (grid.x_hi - grid.x_lo);
    double const fy = (x.y - grid.y_lo) / (grid.y_hi - grid.y_lo);
    if (!(fx >= 0 && fx < 1 && fy >= 0 && fy < 1))
        return;
    auto const ix = std::min(static_cast<std::size_t>(fx * grid.nx), grid.nx - 1);
    auto const iy = std::min(static_cast<std::size_t>(fy * grid.ny), grid.ny - 1);
    ++counts[index(ix, iy, angle_bin(angle, grid.n_angle))];
}

void PhaseDensity::merge(PhaseDensity const& other)
{
    for (std::size_t i = 0; i < counts.size(); ++i)
        counts[i] += other.counts[i];
    total += other.total;
}

PhaseDensity evolve_boltzmann_density(InitialSampler const& initial,
                                      double t,
                                      JumpProcessParams const& params,
                                      std::uint64_t n_paths,
                                      PhaseGrid const& grid,
                                      std::uint64_t seed,
                                      unsigned threads)
{
    if (n_paths < 1)
        throw DomainError("need at least one path");
    auto body = [&](std::uint64_t begin, std::uint64_t end, PhaseDensity& acc) {
        for (std::uint64_t i = begin; i < end; ++i)
        {
            Rng rng = rng_stream(seed, i);
            auto const [x0, v0] = initial(rng);
            auto const path = sample_boltzmann_path(x0, v0, t, params, rng);
            acc.add(path.final_position(), angle_of(path.final_velocity()));
        }
    };
    auto merge = [](PhaseDensity& a, PhaseDensity const& b) { a.merge(b); };
    return parallel_reduce(n_paths, threads, make_phase_density(grid), body, merge);
}

}  // namespace lorentz
