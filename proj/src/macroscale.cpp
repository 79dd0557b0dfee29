#include "lorentz/macroscale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lorentz/dynamics.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/medium.hpp"
#include "lorentz/parallel.hpp"

namespace lorentz
{
DensityGrid DensityGrid::zeros(
    double x_lo, double y_lo, double dx, std::size_t nx, std::size_t ny)
{
    DensityGrid g;
    g.x_lo = x_lo;
    g.y_lo = y_lo;
    g.dx = dx;
    g.nx = nx;
    g.ny = ny;
    g.values.assign(nx * ny, 0.0);
    return g;
}

double DensityGrid::mass() const
{
    return std::accumulate(values.begin(), values.end(), 0.0) * dx * dx;
}

double l2_distance(DensityGrid const& a, DensityGrid const& b)
{
    if (a.nx != b.nx || a.ny != b.ny || a.dx != b.dx)
        throw DomainError("grids differ in shape");
    double sum = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
    {
        double const d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum * a.dx * a.dx);
}

//---------------------------------------------------------------------------//
HeatProblem::HeatProblem(double D, DensityGrid initial, double dt)
    : D_(D), initial_(std::move(initial)), dt_(dt)
{
    if (!(D >= 0))
        throw DomainError("diffusion coefficient must be non-negative");
    if (!(dt > 0) || !(initial_.dx > 0))
        throw DomainError("time step and grid spacing must be positive");
    if (initial_.nx == 0 || initial_.ny == 0
        || initial_.values.size() != initial_.nx * initial_.ny)
    {
        throw DomainError("malformed initial grid");
    }
    for (double v : initial_.values)
    {
        if (!(v >= 0))
            throw DomainError("initial density must be non-negative");
    }
    if (D * dt / (initial_.dx * initial_.dx) > 0.25)
        throw DomainError("CFL condition D dt / dx^2 <= 1/4 violated");
}

DensityGrid solve_heat(HeatProblem const& problem, double t)
{
    if (!(t >= 0))
        throw DomainError("time must be non-negative");
    DensityGrid u = problem.initial();
    if (problem.D() == 0 || t == 0)
        return u;
    DensityGrid next = u;
    std::size_t const nx = u.nx, ny = u.ny;
    double const inv_dx2 = 1 / (u.dx * u.dx);
    double now = 0;
    while (now < t)
    {
        double const h = std::min(problem.dt(), t - now);
        double const k = problem.D() * h * inv_dx2;
        next.values = u.values;
        for (std::size_t i = 0; i < nx; ++i)
        {
            for (std::size_t j = 0; j < ny; ++j)
            {
                double const c = u.at(i, j);
                // Each interior face is visited once and applied to both
                // sides
                if (i + 1 < nx)
                {
                    double const f = k * (u.at(i + 1, j) - c);
                    next.at(i, j) += f;
                    next.at(i + 1, j) -= f;
                }
                if (j + 1 < ny)
                {
                    double const f = k * (u.at(i, j + 1) - c);
                    next.at(i, j) += f;
                    next.at(i, j + 1) -= f;
                }
            }
        }
        std::swap(u.values, next.values);
        now = (h == problem.dt()) ? now + h : t;
    }
    return u;
}

DensityGrid angular_average(PhaseGrid const& grid, std::vector<double> const& f)
{
    if (f.size() != grid.nx * grid.ny * grid.n_angle)
        throw DomainError("phase density does not match its grid");
    double const dx = (grid.x_hi - grid.x_lo) / grid.nx;
    double const dy = (grid.y_hi - grid.y_lo) / grid.ny;
    if (std::fabs(dx - dy) > 1e-12 * dx)
        throw DomainError("angular_average needs square spatial cells");
    double const dphi = 2 * std::numbers::pi / grid.n_angle;
    auto out = DensityGrid::zeros(grid.x_lo, grid.y_lo, dx, grid.nx, grid.ny);
    for (std::size_t ix = 0; ix < grid.nx; ++ix)
    {
        for (std::size_t iy = 0; iy < grid.ny; ++iy)
        {
            double sum = 0;
            for (std::size_t a = 0; a < grid.n_angle; ++a)
                sum += f[(ix * grid.ny + iy) * grid.n_angle + a];
            out.at(ix, iy) = sum * dphi;
        }
    }
    return out;
}

DensityGrid angular_average(PhaseDensity const& f)
{
    std::vector<double> values(f.counts.size());
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        values[i] = f.total ? f.counts[i] / (f.total * f.cell_volume()) : 0.0;
    }
    return angular_average(f.grid, values);
}

//---------------------------------------------------------------------------//
void SlabSpec::validate() const
{
    if (!(L > 0))
        throw DomainError("slab length must be positive");
    if (!(rho1 >= 0 && rho2 >= 0))
        throw DomainError("reservoir densities must be non-negative");
    if (!(eta > 0) || !(epsilon > 0) || !(mu >= 0))
        throw DomainError("eta and epsilon must be positive, mu >= 0");
}

bool SlabSpec::regime_ok() const
{
    return std::sqrt(epsilon) * std::pow(eta, 6) <= 1;
}

std::function<double(double)> stationary_profile(SlabSpec const& slab)
{
    slab.validate();
    return [slab](double x1) {
        return (slab.rho1 * (slab.L - x1) + slab.rho2 * x1) / slab.L;
    };
}

double fick_flux(SlabSpec const& slab, double D)
{
    slab.validate();
    if (!(D > 0))
        throw DomainError("diffusion coefficient must be positive");
    return -D * (slab.rho2 - slab.rho1) / slab.L;
}

double slab_kinetic_D(SlabSpec const& slab)
{
    auto const p = JumpProcessParams::hard_disk(
        slab.effective_intensity(), slab.radius(), 1.0);
    return slab.eta * boltzmann_D(p);
}

namespace
{
// Per-bin sums over injections, for one reservoir
struct SideSums
{
    std::vector<double> occ[2];  // time in bin, by half of the budget
    std::vector<double> occ_sq;
    std::vector<double> disp;  // signed x displacement inside the bin
    std::vector<double> disp_sq;

    explicit SideSums(std::size_t bins = 0)
        : occ{std::vector<double>(bins), std::vector<double>(bins)},
          occ_sq(bins),
          disp(bins),
          disp_sq(bins)
    {
    }

    void merge(SideSums const& o)
    {
        for (std::size_t b = 0; b < occ_sq.size(); ++b)
        {
            occ[0][b] += o.occ[0][b];
            occ[1][b] += o.occ[1][b];
            occ_sq[b] += o.occ_sq[b];
            disp[b] += o.disp[b];
            disp_sq[b] += o.disp_sq[b];
        }
    }
};

struct SlabSums
{
    SideSums side[2];
    std::uint64_t unfinished = 0;
    std::uint64_t resampled = 0;
    std::uint64_t collisions = 0;
};

// Splits straight motion into time and displacement per x bin
class BinObserver final : public FlowObserver
{
  public:
    BinObserver(double L, std::size_t bins)
        : width_(L / bins), occ_(bins, 0.0), disp_(bins, 0.0)
    {
    }

    void on_segment(PathVertex const& from, PathVertex const& to) override
    {
        double const a = from.x.x, b = to.x.x;
        double const dt = to.time - from.time;
        std::size_t const n = occ_.size();
        if (!(dt > 0))
            return;
        if (a == b)
        {
            occ_[bin_of(a)] += dt;
            return;
        }
        double const lo = std::min(a, b), hi = std::max(a, b);
        double const sign = b > a ? 1.0 : -1.0;
        std::size_t const first = bin_of(lo), last = bin_of(hi);
        for (std::size_t k = first; k <= last && k < n; ++k)
        {
            double const overlap = std::min(hi, (k + 1) * width_)
                                   - std::max(lo, k * width_);
            if (overlap <= 0)
                continue;
            occ_[k] += dt * overlap / (hi - lo);
            disp_[k] += sign * overlap;
        }
    }
    void on_collision(CollisionEvent const&) override {}

    void reset()
    {
        std::fill(occ_.begin(), occ_.end(), 0.0);
        std::fill(disp_.begin(), disp_.end(), 0.0);
    }
    std::vector<double> const& occupation() const { return occ_; }
    std::vector<double> const& displacement() const { return disp_; }

  private:
    std::size_t bin_of(double x) const
    {
        auto const k = static_cast<std::ptrdiff_t>(std::floor(x / width_));
        return static_cast<std::size_t>(
            std::clamp<std::ptrdiff_t>(k, 0, occ_.size() - 1));
    }

    double width_;
    std::vector<double> occ_;
    std::vector<double> disp_;
};

constexpr int max_resamples = 10'000;

FieldSpec slab_field(SlabSpec const& slab, std::uint64_t seed)
{
    FieldSpec field;
    if (slab.mu > 0)
    {
        // Field intensity is mu_field * radius^-1 * eta with radius = eps/2
        field = FieldSpec::poisson(slab.mu * slab.radius() / slab.epsilon,
                                   slab.radius(), 1.0, seed, slab.eta);
        field.x_band = std::make_pair(0.0, slab.L);
    }
    else
    {
        field = FieldSpec::planted({}, slab.radius());
    }
    return field;
}
}  // namespace

SlabResult
simulate_slab_stationary(SlabSpec const& slab, SlabRunOptions const& options)
{
    slab.validate();
    if (options.injections < 2 || options.bins < 3)
        throw DomainError("need >= 2 injections and >= 3 bins");
    std::size_t const nb = options.bins;
    std::uint64_t const half = options.injections / 2;
    double const rho_side[2] = {slab.rho1, slab.rho2};
    BarrierParams const unit_speed{0.5, 0.25, 1.0};

    SlabSums init{{SideSums(nb), SideSums(nb)}};
    auto body = [&](std::uint64_t begin, std::uint64_t end, SlabSums& acc) {
        BinObserver observer(slab.L, nb);
        for (std::uint64_t i = begin; i < end; ++i)
        {
            for (int s = 0; s < 2; ++s)
            {
                if (rho_side[s] == 0)
                    continue;
                Rng rng = rng_stream(derive_key(options.seed, s), i);
                double const phi = std::asin(2 * rng.uniform() - 1);
                Vec2 const x0{s == 0 ? 0.0 : slab.L, 0.0};
                Vec2 const v0{s == 0 ? std::cos(phi) : -std::cos(phi),
                              std::sin(phi)};
                FieldSpec field = slab_field(slab, rng());
                for (int tries = 0; inside_any_disk(field, x0); ++tries)
                {
                    if (tries == max_resamples)
                    {
                        throw NumericalGuardError(
                            "injection point covered in every resampled field");
                    }
                    field.seed = rng();
                    ++acc.resampled;
                }
                FieldCursor cursor(field);
                FlowOptions flow;
                flow.mode = FlowMode::hard_disk;
                flow.duration = options.t_max;
                flow.slab_length = slab.L;
                observer.reset();
                auto const out
                    = propagate({x0, v0}, cursor, unit_speed, flow, &observer);
                acc.unfinished += out.side == BoundarySide::none;
                acc.collisions += out.collisions;

                SideSums& sums = acc.side[s];
                int const h = i < half ? 0 : 1;
                for (std::size_t b = 0; b < nb; ++b)
                {
                    double const o = observer.occupation()[b];
                    double const d = observer.displacement()[b];
                    sums.occ[h][b] += o;
                    sums.occ_sq[b] += o * o;
                    sums.disp[b] += d;
                    sums.disp_sq[b] += d * d;
                }
            }
        }
    };
    auto merge = [](SlabSums& a, SlabSums const& b) {
        a.side[0].merge(b.side[0]);
        a.side[1].merge(b.side[1]);
        a.unfinished += b.unfinished;
        a.resampled += b.resampled;
        a.collisions += b.collisions;
    };
    SlabSums const sums
        = parallel_reduce(options.injections, options.threads, init, body, merge);

    SlabResult result;
    result.unfinished = sums.unfinished;
    result.resampled = sums.resampled;
    result.collisions = sums.collisions;
    result.regime_warning = !slab.regime_ok();

    double const width = slab.L / nb;
    double const n_all = static_cast<double>(options.injections);
    double const n_half[2] = {static_cast<double>(half), n_all - half};
    constexpr double z = 1.959963984540054;
    std::vector<double> xs, rhos, js, rho_w, j_w;
    for (std::size_t b = 0; b < nb; ++b)
    {
        SlabBin bin;
        bin.x = (b + 0.5) * width;
        double rho_var = 0, j_var = 0, half_var = 0;
        for (int s = 0; s < 2; ++s)
        {
            // Injection rate per unit boundary length is rho / pi
            double const w = rho_side[s] / (std::numbers::pi * width);
            SideSums const& ss = sums.side[s];
            double const occ_sum = ss.occ[0][b] + ss.occ[1][b];
            double const occ_mean = occ_sum / n_all;
            double const occ_var
                = std::max(0.0, ss.occ_sq[b] / n_all - occ_mean * occ_mean);
            double const disp_mean = ss.disp[b] / n_all;
            double const disp_var
                = std::max(0.0, ss.disp_sq[b] / n_all - disp_mean * disp_mean);
            bin.rho += w * occ_mean;
            bin.J += slab.eta * w * disp_mean;
            bin.rho_first += w * ss.occ[0][b] / n_half[0];
            bin.rho_second += w * ss.occ[1][b] / n_half[1];
            rho_var += w * w * occ_var / n_all;
            j_var += slab.eta * slab.eta * w * w * disp_var / n_all;
            half_var += w * w * occ_var / n_half[0];
        }
        bin.rho_ci = z * std::sqrt(rho_var);
        bin.J_ci = z * std::sqrt(j_var);
        bin.rho_half_ci = z * std::sqrt(half_var);
        xs.push_back(bin.x);
        rhos.push_back(bin.rho);
        js.push_back(bin.J);
        rho_w.push_back(rho_var > 0 ? 1 / rho_var : 1.0);
        j_w.push_back(j_var > 0 ? 1 / j_var : 1.0);
        result.bins.push_back(bin);
    }
    result.profile_fit = linear_fit(xs, rhos);
    result.flux_fit = linear_fit(xs, js, j_w);

    double j_sum = 0;
    for (auto const& bin : result.bins)
        j_sum += bin.J;
    result.J_mean = j_sum / nb;
    // Bins share trajectories, so treat their errors as fully correlated
    double mean_se = 0;
    for (auto const& bin : result.bins)
        mean_se += bin.J_ci / z / nb;
    result.J_mean_ci = z * mean_se;
    double const gradient = (slab.rho2 - slab.rho1) / slab.L;
    result.implied_D = gradient != 0 ? -result.J_mean / gradient : 0.0;
    return result;
}

}  // namespace lorentz
