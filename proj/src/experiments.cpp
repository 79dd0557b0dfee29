#include "lorentz/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lorentz/dynamics.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/kinetic.hpp"
#include "lorentz/macroscale.hpp"
#include "lorentz/medium.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/stats.hpp"

namespace lorentz
{
namespace
{
constexpr double two_pi = 2 * std::numbers::pi;
constexpr double z95 = 1.959963984540054;

// Shared mechanical-run settings read from a resolved config
struct MechanicalSetup
{
    double alpha = 0.25;
    double speed = 1;
    double mu = 1;
    double cell_size = 0;  // 0: default of four radii

    static MechanicalSetup from(Config const& cfg)
    {
        MechanicalSetup s;
        s.alpha = cfg.get_double("barrier.alpha");
        s.speed = cfg.get_double("barrier.speed");
        s.mu = cfg.get_double("medium.mu");
        s.cell_size = cfg.get_double("medium.cell_size");
        if (!(s.mu > 0))
            throw ConfigError("medium.mu must be positive");
        if (s.cell_size < 0)
            throw ConfigError("medium.cell_size must be >= 0");
        return s;
    }

    BarrierParams params(double eps) const
    {
        BarrierParams p{eps, alpha, speed};
        p.validate();
        return p;
    }

    FieldSpec field(double eps) const
    {
        FieldSpec f = FieldSpec::poisson(mu, eps, 1 + 2 * alpha, 0);
        if (cell_size > 0)
            f.cell_size = cell_size;
        f.validate();
        return f;
    }
};

std::vector<KeySpec> mechanical_keys(std::string alpha, std::string speed)
{
    return {
        {"barrier.alpha", std::move(alpha), "potential exponent"},
        {"barrier.speed", std::move(speed), "particle speed"},
        {"medium.mu", "1", "base scatterer intensity"},
        {"medium.cell_size", "0", "lazy-sampling cell side (0: 4 radii)"},
    };
}

std::vector<KeySpec> with(std::vector<KeySpec> a, std::vector<KeySpec> const& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// eps = 2^-k for k in the configured range
std::vector<std::pair<int, double>> dyadic_ladder(Config const& cfg,
                                                  std::string const& key)
{
    auto const [a, b] = cfg.get_range(key);
    if (a < 1)
        throw ConfigError(key + ": exponents must be >= 1");
    std::vector<std::pair<int, double>> out;
    for (int k = a; k <= b; ++k)
        out.emplace_back(k, std::ldexp(1.0, -k));
    return out;
}

// Draw a field realization that leaves x0 outside every disk
FieldSpec start_field(FieldSpec field, Vec2 x0, Rng& rng, std::uint64_t& resampled)
{
    field.seed = rng();
    while (inside_any_disk(field, x0))
    {
        field.seed = rng();
        ++resampled;
    }
    return field;
}

double initial_angle(Config const& cfg, Rng& rng)
{
    if (cfg.has("initial.uniform") && cfg.get_bool("initial.uniform"))
        return rng.uniform(0, two_pi);
    return cfg.get_double("initial.angle");
}

bool non_increasing(std::vector<double> const& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
    {
        if (v[i] > v[i - 1])
            return false;
    }
    return true;
}

class CountingObserver final : public FlowObserver
{
  public:
    void on_overlap() override { ++overlaps; }
    std::uint64_t overlaps = 0;
};

std::uint64_t positive_count(Config const& cfg, std::string const& key)
{
    auto const n = cfg.get_uint(key);
    if (n < 1)
        throw ConfigError(key + " must be >= 1");
    return n;
}
}  // namespace

//---------------------------------------------------------------------------//
// scatter-table
//---------------------------------------------------------------------------//
Report run_scatter_table(Config const& cfg, RunContext const&)
{
    BarrierParams const p{cfg.get_double("barrier.epsilon"),
                          cfg.get_double("barrier.alpha"),
                          cfg.get_double("barrier.speed")};
    p.validate();
    auto const n = cfg.get_uint("samples");
    if (n < 2)
        throw ConfigError("samples must be >= 2");

    Report r;
    r.experiment = "scatter-table";
    r.table.columns = {"rho", "theta", "branch"};
    for (std::uint64_t i = 0; i < n; ++i)
    {
        double const rho = -1 + 2.0 * i / (n - 1);
        auto const out = scattering_angle(rho, p);
        r.table.add_row({rho, out.angle, std::string(to_string(out.branch))});
    }
    r.summary["regime_ratio"] = p.regime_ratio();
    r.summary["totally_reflecting"] = p.totally_reflecting();
    if (!p.totally_reflecting())
        r.summary["refractive_index"] = refractive_index(p);
    return r;
}

//---------------------------------------------------------------------------//
// b-divergence
//---------------------------------------------------------------------------//
std::vector<double> parse_decade_range(std::string const& text)
{
    auto const dots = text.find("..");
    auto parse = [&](std::string const& s) {
        Config c;
        c.set("eps", s);
        return c.get_double("eps");
    };
    double const a = parse(text.substr(0, dots));
    double const b = dots == std::string::npos ? a : parse(text.substr(dots + 2));
    if (!(a > 0 && a < 1 && b > 0 && b < 1))
        throw ConfigError("eps range must lie in (0, 1)");
    double const ka = -std::log10(a), kb = -std::log10(b);
    if (std::fabs(ka - std::round(ka)) > 1e-9 || std::fabs(kb - std::round(kb)) > 1e-9)
        throw ConfigError("eps range endpoints must be powers of ten");
    int const lo = static_cast<int>(std::round(std::min(ka, kb)));
    int const hi = static_cast<int>(std::round(std::max(ka, kb)));
    std::vector<double> out;
    for (int k = lo; k <= hi; ++k)
        out.push_back(std::pow(10.0, -k));
    return out;
}

Report run_b_divergence(Config const& cfg, RunContext const&)
{
    double const alpha = cfg.get_double("barrier.alpha");
    double const speed = cfg.get_double("barrier.speed");
    double const mu = cfg.get_double("medium.mu");
    double const tolerance = cfg.get_double("tolerance");
    auto const ladder = parse_decade_range(cfg.get("eps"));
    double const b_tilde = landau_B_tilde(alpha, mu, speed);

    Report r;
    r.experiment = "b-divergence";
    r.table.columns = {"epsilon", "B_eps", "B_eps_over_logeps", "B_tilde",
                       "rel_deviation"};
    std::vector<double> deviations;
    for (double eps : ladder)
    {
        double b = std::numeric_limits<double>::quiet_NaN();
        try
        {
            b = landau_B_quadrature(eps, alpha, mu, speed);
        }
        catch (RegimeError const&)
        {
            r.warnings.push_back("eps=" + format_double(eps)
                                 + ": barrier impenetrable, B undefined");
        }
        double const ratio = b / std::fabs(std::log(eps));
        double const dev = std::fabs(ratio - b_tilde) / b_tilde;
        deviations.push_back(dev);
        r.table.add_row({eps, b, ratio, b_tilde, dev});
    }
    r.summary["B_tilde"] = b_tilde;
    r.summary["finest_rel_deviation"] = deviations.back();
    r.summary["monotone_improving"] = non_increasing(deviations);
    r.summary["within_tolerance"] = deviations.back() <= tolerance;
    r.summary["operator_form_B"] = landau_B_operator_form(mu, speed);
    return r;
}

//---------------------------------------------------------------------------//
// kinetic-compare
//---------------------------------------------------------------------------//
namespace
{
struct AngleSpaceAcc
{
    std::vector<std::uint64_t> angle;
    std::vector<std::uint64_t> space;
    RunningStats events;
    std::uint64_t resampled = 0;
    std::uint64_t overlaps = 0;

    AngleSpaceAcc(std::size_t angle_bins, std::size_t space_bins)
        : angle(angle_bins, 0), space(space_bins * space_bins, 0)
    {
    }

    void add(Vec2 x, Vec2 v, double half_width)
    {
        ++angle[angle_bin(angle_of(v), angle.size())];
        auto const n = static_cast<std::size_t>(std::sqrt(space.size()) + 0.5);
        double const fx = (x.x + half_width) / (2 * half_width);
        double const fy = (x.y + half_width) / (2 * half_width);
        auto clamp = [n](double f) {
            return std::min(n - 1, static_cast<std::size_t>(std::max(0.0, f) * n));
        };
        ++space[clamp(fx) * n + clamp(fy)];
    }

    void merge(AngleSpaceAcc const& o)
    {
        for (std::size_t i = 0; i < angle.size(); ++i)
            angle[i] += o.angle[i];
        for (std::size_t i = 0; i < space.size(); ++i)
            space[i] += o.space[i];
        events.merge(o.events);
        resampled += o.resampled;
        overlaps += o.overlaps;
    }
};

AngleSpaceAcc mechanical_ensemble(Config const& cfg,
                                  MechanicalSetup const& setup,
                                  double eps,
                                  double duration,
                                  std::uint64_t n,
                                  std::uint64_t stream,
                                  std::size_t angle_bins,
                                  std::size_t space_bins,
                                  unsigned threads)
{
    BarrierParams const params = setup.params(eps);
    FieldSpec const base = setup.field(eps);
    double const half_width = std::max(setup.speed * duration, 1e-12);
    AngleSpaceAcc init(angle_bins, space_bins);
    auto body = [&](std::uint64_t begin, std::uint64_t end, AngleSpaceAcc& acc) {
        for (std::uint64_t i = begin; i < end; ++i)
        {
            Rng rng = rng_stream(stream, i);
            Vec2 const v0 = unit_from_angle(initial_angle(cfg, rng)) * setup.speed;
            FieldSpec const field = start_field(base, {0, 0}, rng, acc.resampled);
            FieldCursor cursor(field);
            FlowOptions options;
            options.mode = FlowMode::barrier;
            options.duration = duration;
            CountingObserver obs;
            auto const out = propagate({{0, 0}, v0}, cursor, params, options, &obs);
            acc.add(out.state.x, out.state.v, half_width);
            acc.events.add(static_cast<double>(out.collisions));
            acc.overlaps += obs.overlaps;
        }
    };
    auto merge = [](AngleSpaceAcc& a, AngleSpaceAcc const& b) { a.merge(b); };
    return parallel_reduce(n, threads, init, body, merge);
}

AngleSpaceAcc boltzmann_ensemble(Config const& cfg,
                                 JumpProcessParams const& jp,
                                 double duration,
                                 std::uint64_t n,
                                 std::uint64_t stream,
                                 std::size_t angle_bins,
                                 std::size_t space_bins,
                                 unsigned threads)
{
    double const half_width = std::max(jp.speed * duration, 1e-12);
    AngleSpaceAcc init(angle_bins, space_bins);
    auto body = [&](std::uint64_t begin, std::uint64_t end, AngleSpaceAcc& acc) {
        for (std::uint64_t i = begin; i < end; ++i)
        {
            Rng rng = rng_stream(stream, i);
            Vec2 const v0 = unit_from_angle(initial_angle(cfg, rng)) * jp.speed;
            auto const path = sample_boltzmann_path({0, 0}, v0, duration, jp, rng);
            acc.add(path.final_position(), path.final_velocity(), half_width);
            acc.events.add(static_cast<double>(path.jumps()));
        }
    };
    auto merge = [](AngleSpaceAcc& a, AngleSpaceAcc const& b) { a.merge(b); };
    return parallel_reduce(n, threads, init, body, merge);
}

double l1_distance(std::vector<std::uint64_t> const& a,
                   std::vector<std::uint64_t> const& b)
{
    return 2 * total_variation(a, b);
}
}  // namespace

Report run_kinetic_compare(Config const& cfg, RunContext const& ctx)
{
    auto const setup = MechanicalSetup::from(cfg);
    auto const seed = cfg.get_uint("seed");
    double const T = cfg.get_double("time");
    auto const n = positive_count(cfg, "samples");
    auto const angle_bins = positive_count(cfg, "angle_bins");
    auto const space_bins = positive_count(cfg, "spatial_bins");
    bool const noise_floor = cfg.get_bool("noise_floor");
    double const threshold = cfg.get_double("tv_threshold");
    if (!(T >= 0))
        throw ConfigError("time must be non-negative");

    Report r;
    r.experiment = "kinetic-compare";
    r.table.columns = {"epsilon", "k", "tv_angle", "tv_ci", "tv_mech_self",
                       "l1_space", "mech_collisions", "boltz_jumps",
                       "expected_jumps", "chord_overlaps", "resampled"};
    std::vector<double> tvs;
    for (auto const& [k, eps] : dyadic_ladder(cfg, "eps_ladder"))
    {
        std::uint64_t const level = derive_key(seed, static_cast<std::uint64_t>(k));
        auto const jp = JumpProcessParams::barrier(setup.params(eps), setup.mu);
        auto const mech = mechanical_ensemble(cfg, setup, eps, T, n,
                                              derive_key(level, 0), angle_bins,
                                              space_bins, ctx.threads);
        auto const boltz = boltzmann_ensemble(cfg, jp, T, n, derive_key(level, 1),
                                              angle_bins, space_bins, ctx.threads);
        double self = std::numeric_limits<double>::quiet_NaN();
        if (noise_floor)
        {
            auto const mech2 = mechanical_ensemble(cfg, setup, eps, T, n,
                                                   derive_key(level, 2),
                                                   angle_bins, space_bins,
                                                   ctx.threads);
            self = total_variation(mech.angle, mech2.angle);
        }
        double const tv = total_variation(mech.angle, boltz.angle);
        tvs.push_back(tv);
        r.table.add_row({eps, std::int64_t{k}, tv,
                         total_variation_ci95(mech.angle, boltz.angle), self,
                         l1_distance(mech.space, boltz.space),
                         mech.events.mean(), boltz.events.mean(), jp.rate * T,
                         static_cast<std::int64_t>(mech.overlaps),
                         static_cast<std::int64_t>(mech.resampled)});
    }
    r.summary["tv_monotone_non_increasing"] = non_increasing(tvs);
    r.summary["tv_finest"] = tvs.back();
    r.summary["tv_threshold"] = threshold;
    r.summary["tv_below_threshold"] = tvs.back() < threshold;
    return r;
}

//---------------------------------------------------------------------------//
// thermalization
//---------------------------------------------------------------------------//
namespace
{
struct MultiTimeAngles
{
    std::vector<std::vector<std::uint64_t>> angle;  // [time][bin]
    std::vector<RunningStats> events;
    std::uint64_t resampled = 0;

    MultiTimeAngles(std::size_t times, std::size_t bins)
        : angle(times, std::vector<std::uint64_t>(bins, 0)), events(times)
    {
    }

    void merge(MultiTimeAngles const& o)
    {
        for (std::size_t t = 0; t < angle.size(); ++t)
        {
            for (std::size_t b = 0; b < angle[t].size(); ++b)
                angle[t][b] += o.angle[t][b];
            events[t].merge(o.events[t]);
        }
        resampled += o.resampled;
    }
};
}  // namespace

Report run_thermalization(Config const& cfg, RunContext const& ctx)
{
    auto const setup = MechanicalSetup::from(cfg);
    auto const seed = cfg.get_uint("seed");
    auto times = cfg.get_list("times");
    std::sort(times.begin(), times.end());
    if (times.front() < 0)
        throw ConfigError("times must be non-negative");
    auto const n = positive_count(cfg, "samples");
    auto const bins = positive_count(cfg, "angle_bins");
    double const p_threshold = cfg.get_double("p_threshold");

    Report r;
    r.experiment = "thermalization";
    r.table.columns = {"epsilon", "t", "chi2", "dof", "p_value",
                       "mean_collisions"};
    double finest_last_p = 0;
    for (auto const& [k, eps] : dyadic_ladder(cfg, "eps_ladder"))
    {
        BarrierParams const params = setup.params(eps);
        FieldSpec const base = setup.field(eps);
        std::uint64_t const stream = derive_key(seed, static_cast<std::uint64_t>(k));
        MultiTimeAngles init(times.size(), bins);
        auto body = [&](std::uint64_t begin, std::uint64_t end,
                        MultiTimeAngles& acc) {
            for (std::uint64_t i = begin; i < end; ++i)
            {
                Rng rng = rng_stream(stream, i);
                ParticleState state{
                    {0, 0}, unit_from_angle(initial_angle(cfg, rng)) * setup.speed};
                FieldSpec const field = start_field(base, state.x, rng, acc.resampled);
                FieldCursor cursor(field);
                double now = 0;
                std::size_t collisions = 0;
                for (std::size_t j = 0; j < times.size(); ++j)
                {
                    FlowOptions options;
                    options.mode = FlowMode::barrier;
                    options.duration = times[j] - now;
                    auto const out = propagate(state, cursor, params, options);
                    state = out.state;
                    collisions += out.collisions;
                    now = times[j];
                    ++acc.angle[j][angle_bin(angle_of(state.v), bins)];
                    acc.events[j].add(static_cast<double>(collisions));
                }
            }
        };
        auto merge = [](MultiTimeAngles& a, MultiTimeAngles const& b) { a.merge(b); };
        auto const acc = parallel_reduce(n, ctx.threads, init, body, merge);
        for (std::size_t j = 0; j < times.size(); ++j)
        {
            auto const chi = chi_square_uniform(acc.angle[j]);
            r.table.add_row({eps, times[j], chi.statistic, chi.dof, chi.p_value,
                             acc.events[j].mean()});
            finest_last_p = chi.p_value;
        }
    }
    r.summary["p_finest_latest"] = finest_last_p;
    r.summary["p_threshold"] = p_threshold;
    r.summary["uniform_at_finest_latest"] = finest_last_p > p_threshold;
    return r;
}

//---------------------------------------------------------------------------//
// diffusion (Landau process)
//---------------------------------------------------------------------------//
Report run_diffusion(Config const& cfg, RunContext const& ctx)
{
    double const B = cfg.get_double("B");
    double const speed = cfg.get_double("speed");
    double const mu = cfg.get_double("mu");
    double const t = cfg.get_double("t");
    auto const every = positive_count(cfg, "record_every");
    if (!(B > 0) || !(speed > 0) || !(t > 0) || !(mu > 0))
        throw ConfigError("B, speed, mu and t must be positive");

    LandauEnsembleOptions options;
    options.paths = positive_count(cfg, "paths");
    options.dt = cfg.get_double("dt");
    options.seed = cfg.get_uint("seed");
    options.threads = ctx.threads;
    double const c = B / (speed * speed);
    options.horizon = t * c;
    auto const ens = run_landau_ensemble(B, speed, options);
    double const D_analytic
        = green_kubo_D(B, mu, speed, GreenKuboMethod::analytic_vacf);

    Report r;
    r.experiment = "diffusion";
    r.table.columns = {"t", "msd", "vacf", "D_running"};
    double running = 0;
    for (std::size_t k = 0; k < ens.times.size(); ++k)
    {
        if (k > 0)
        {
            running += 0.25 * (ens.times[k] - ens.times[k - 1])
                       * (ens.vacf[k] + ens.vacf[k - 1]);
        }
        if (k % every == 0 || k + 1 == ens.times.size())
            r.table.add_row({ens.times[k], ens.msd[k], ens.vacf[k], running});
    }
    r.summary["D_analytic"] = D_analytic;
    r.summary["D_vacf"] = ens.D_vacf;
    r.summary["D_msd"] = ens.D_msd;
    r.summary["rel_dev_vacf"] = std::fabs(ens.D_vacf / D_analytic - 1);
    r.summary["rel_dev_msd"] = std::fabs(ens.D_msd / D_analytic - 1);
    r.summary["msd_late_r2"] = ens.msd_r2;
    r.summary["max_speed_error"] = ens.max_speed_error;
    // (2 pi / mu) |v|^2 times the VACF integral, relative to D
    r.summary["alt_normalization_ratio"] = 4 * std::numbers::pi * speed * speed / mu;
    return r;
}

//---------------------------------------------------------------------------//
// fick-slab
//---------------------------------------------------------------------------//
Report run_fick_slab(Config const& cfg, RunContext const& ctx)
{
    SlabSpec slab;
    slab.L = cfg.get_double("slab.L");
    slab.rho1 = cfg.get_double("slab.rho1");
    slab.rho2 = cfg.get_double("slab.rho2");
    slab.mu = cfg.get_double("medium.mu");
    slab.epsilon = cfg.get_double("medium.epsilon");
    slab.eta = cfg.get_double("medium.eta");
    slab.validate();
    SlabRunOptions options;
    options.injections = positive_count(cfg, "injections");
    options.bins = positive_count(cfg, "bins");
    options.seed = cfg.get_uint("seed");
    options.t_max = cfg.get_double("t_max");
    options.threads = ctx.threads;
    auto const res = simulate_slab_stationary(slab, options);
    auto const profile = stationary_profile(slab);

    Report r;
    r.experiment = "fick-slab";
    r.table.columns = {"x1_bin", "rho_hat", "rho_ci", "J_hat", "J_ci",
                       "rho_first_half", "rho_second_half", "rho_half_ci",
                       "rho_linear"};
    std::int64_t halves_agree = 0;
    for (auto const& b : res.bins)
    {
        r.table.add_row({b.x, b.rho, b.rho_ci, b.J, b.J_ci, b.rho_first,
                         b.rho_second, b.rho_half_ci, profile(b.x)});
        halves_agree += std::fabs(b.rho_first - b.rho_second)
                        <= std::sqrt(2.0) * b.rho_half_ci;
    }
    double const left = res.profile_fit(0), right = res.profile_fit(slab.L);
    auto& s = r.summary;
    s["slope"] = res.profile_fit.slope;
    s["intercept"] = res.profile_fit.intercept;
    s["r2"] = res.profile_fit.r2;
    s["intercept_left"] = left;
    s["intercept_right"] = right;
    s["intercept_left_rel_err"] = slab.rho1 > 0 ? std::fabs(left / slab.rho1 - 1) : 0.0;
    s["intercept_right_rel_err"] = slab.rho2 > 0 ? std::fabs(right / slab.rho2 - 1) : 0.0;
    s["J_mean"] = res.J_mean;
    s["J_mean_ci"] = res.J_mean_ci;
    s["flux_slope"] = res.flux_fit.slope;
    s["flux_slope_ci"] = res.flux_fit.slope_ci95;
    s["implied_D"] = res.implied_D;
    if (slab.mu > 0)
    {
        double const D = slab_kinetic_D(slab);
        s["D_kinetic"] = D;
        if (slab.rho1 != slab.rho2)
            s["J_fick"] = fick_flux(slab, D);
    }
    s["halves_agreeing_bins"] = halves_agree;
    s["unfinished"] = res.unfinished;
    s["resampled"] = res.resampled;
    s["collisions_per_injection"]
        = static_cast<double>(res.collisions) / (2.0 * options.injections);
    s["regime_ok"] = !res.regime_warning;
    if (res.regime_warning)
    {
        r.warnings.push_back("sqrt(eps) * eta^6 = "
                             + format_double(std::sqrt(slab.epsilon)
                                             * std::pow(slab.eta, 6))
                             + " exceeds 1");
    }
    return r;
}

//---------------------------------------------------------------------------//
// pathology-scan
//---------------------------------------------------------------------------//
namespace
{
struct PathologyAcc
{
    std::uint64_t n = 0;
    std::uint64_t recollision = 0;
    std::uint64_t interference = 0;
    std::uint64_t overlap = 0;
    std::uint64_t pathological = 0;
    std::uint64_t resampled = 0;
    RunningStats collisions;

    void merge(PathologyAcc const& o)
    {
        n += o.n;
        recollision += o.recollision;
        interference += o.interference;
        overlap += o.overlap;
        pathological += o.pathological;
        resampled += o.resampled;
        collisions.merge(o.collisions);
    }
};

FlowMode parse_mode(std::string const& s)
{
    if (s == "barrier")
        return FlowMode::barrier;
    if (s == "hard_disk")
        return FlowMode::hard_disk;
    throw ConfigError("mode must be 'barrier' or 'hard_disk', got '" + s + "'");
}
}  // namespace

Report run_pathology_scan(Config const& cfg, RunContext const& ctx)
{
    auto const setup = MechanicalSetup::from(cfg);
    auto const seed = cfg.get_uint("seed");
    double const T = cfg.get_double("time");
    auto const n = positive_count(cfg, "trajectories");
    FlowMode const mode = parse_mode(cfg.get("mode"));

    Report r;
    r.experiment = "pathology-scan";
    r.table.columns = {"epsilon", "frac_recollision", "frac_interference",
                       "frac_overlap", "mean_collisions", "frac_pathological",
                       "frac_pathological_ci", "frac_overlap_ci"};
    std::vector<double> path_frac, overlap_frac;
    for (auto const& [k, eps] : dyadic_ladder(cfg, "eps_ladder"))
    {
        BarrierParams const params = setup.params(eps);
        FieldSpec const base = setup.field(eps);
        std::uint64_t const stream = derive_key(seed, static_cast<std::uint64_t>(k));
        auto body = [&](std::uint64_t begin, std::uint64_t end, PathologyAcc& acc) {
            for (std::uint64_t i = begin; i < end; ++i)
            {
                Rng rng = rng_stream(stream, i);
                Vec2 const v0 = unit_from_angle(rng.uniform(0, two_pi)) * setup.speed;
                FieldSpec const field = start_field(base, {0, 0}, rng, acc.resampled);
                auto const flow = advance({{0, 0}, v0}, field, params, T, mode);
                auto const rep = classify_pathologies(flow.log, field, params);
                ++acc.n;
                acc.recollision += rep.recollisions > 0;
                acc.interference += rep.interferences > 0;
                acc.overlap += rep.overlaps > 0;
                acc.pathological += rep.recollisions + rep.interferences > 0;
                acc.collisions.add(static_cast<double>(rep.q_collisions));
            }
        };
        auto merge = [](PathologyAcc& a, PathologyAcc const& b) { a.merge(b); };
        auto const acc = parallel_reduce(n, ctx.threads, PathologyAcc{}, body, merge);
        double const N = static_cast<double>(acc.n);
        auto frac_ci = [N](double f) { return z95 * std::sqrt(f * (1 - f) / N); };
        double const fp = acc.pathological / N, fo = acc.overlap / N;
        path_frac.push_back(fp);
        overlap_frac.push_back(fo);
        r.table.add_row({eps, acc.recollision / N, acc.interference / N, fo,
                         acc.collisions.mean(), fp, frac_ci(fp), frac_ci(fo)});
    }
    r.summary["pathological_monotone"] = non_increasing(path_frac);
    r.summary["overlap_monotone"] = non_increasing(overlap_frac);
    return r;
}

//---------------------------------------------------------------------------//
// diffusive-scale
//---------------------------------------------------------------------------//
namespace
{
struct DiffusiveAcc
{
    std::vector<double> msd;
    std::vector<std::uint64_t> hist;
    std::uint64_t resampled = 0;

    void merge(DiffusiveAcc const& o)
    {
        for (std::size_t i = 0; i < msd.size(); ++i)
            msd[i] += o.msd[i];
        for (std::size_t i = 0; i < hist.size(); ++i)
            hist[i] += o.hist[i];
        resampled += o.resampled;
    }
};
}  // namespace

Report run_diffusive_scale(Config const& cfg, RunContext const& ctx)
{
    auto const setup = MechanicalSetup::from(cfg);
    auto const seed = cfg.get_uint("seed");
    double const T = cfg.get_double("time");
    auto const n = positive_count(cfg, "trajectories");
    auto const points = positive_count(cfg, "msd_points");
    auto const cells = positive_count(cfg, "heat.cells");
    double const start_fraction = cfg.get_double("heat.start_fraction");
    if (!(T > 0) || points < 4)
        throw ConfigError("time must be positive and msd_points >= 4");
    if (!(start_fraction > 0 && start_fraction < 1))
        throw ConfigError("heat.start_fraction must lie in (0, 1)");

    Report r;
    r.experiment = "diffusive-scale";
    r.table.columns = {"epsilon", "t_final", "D_mech", "D_mech_ci", "D_kinetic",
                       "D_boltzmann", "ratio", "msd_r2", "l2_heat"};
    std::vector<double> ratios, l2s;
    for (auto const& [k, eps] : dyadic_ladder(cfg, "eps_ladder"))
    {
        BarrierParams const params = setup.params(eps);
        FieldSpec const base = setup.field(eps);
        double const t_final = T * std::fabs(std::log(eps));
        auto const coeff = kinetic_coefficients(params, setup.mu);
        double const D_kin = coeff.D;
        double const D_boltz
            = boltzmann_D(JumpProcessParams::barrier(params, setup.mu));
        double const sigma = std::sqrt(2 * D_kin * t_final);
        double const half = 4 * sigma;
        double const dx = 2 * half / cells;

        std::vector<double> times(points);
        for (std::size_t j = 0; j < points; ++j)
            times[j] = t_final * (j + 1) / points;
        std::uint64_t const stream = derive_key(seed, static_cast<std::uint64_t>(k));
        DiffusiveAcc init{std::vector<double>(points, 0.0),
                          std::vector<std::uint64_t>(cells * cells, 0), 0};
        auto body = [&](std::uint64_t begin, std::uint64_t end, DiffusiveAcc& acc) {
            for (std::uint64_t i = begin; i < end; ++i)
            {
                Rng rng = rng_stream(stream, i);
                ParticleState state{
                    {0, 0}, unit_from_angle(rng.uniform(0, two_pi)) * setup.speed};
                FieldSpec const field = start_field(base, state.x, rng, acc.resampled);
                FieldCursor cursor(field);
                double now = 0;
                for (std::size_t j = 0; j < points; ++j)
                {
                    FlowOptions options;
                    options.mode = FlowMode::barrier;
                    options.duration = times[j] - now;
                    state = propagate(state, cursor, params, options).state;
                    now = times[j];
                    acc.msd[j] += norm_sq(state.x);
                }
                double const fx = (state.x.x + half) / dx;
                double const fy = (state.x.y + half) / dx;
                if (fx >= 0 && fx < cells && fy >= 0 && fy < cells)
                {
                    ++acc.hist[static_cast<std::size_t>(fx) * cells
                               + static_cast<std::size_t>(fy)];
                }
            }
        };
        auto merge = [](DiffusiveAcc& a, DiffusiveAcc const& b) { a.merge(b); };
        auto const acc = parallel_reduce(n, ctx.threads, init, body, merge);

        std::vector<double> late_t, late_msd;
        for (std::size_t j = points / 2; j < points; ++j)
        {
            late_t.push_back(times[j]);
            late_msd.push_back(acc.msd[j] / n);
        }
        auto const fit = linear_fit(late_t, late_msd);
        double const D_mech = fit.slope / 4;

        // Heat solution from a narrow Gaussian matching the kernel at t0
        double const t0 = start_fraction * t_final;
        double const s0 = 2 * D_kin * t0;
        auto initial = DensityGrid::zeros(-half, -half, dx, cells, cells);
        auto empirical = initial;
        for (std::size_t ix = 0; ix < cells; ++ix)
        {
            for (std::size_t iy = 0; iy < cells; ++iy)
            {
                double const x = initial.x_center(ix), y = initial.y_center(iy);
                initial.at(ix, iy) = std::exp(-(x * x + y * y) / (2 * s0))
                                     / (two_pi * s0);
                empirical.at(ix, iy)
                    = acc.hist[ix * cells + iy] / (static_cast<double>(n) * dx * dx);
            }
        }
        HeatProblem const heat(D_kin, initial, 0.2 * dx * dx / D_kin);
        auto const solved = solve_heat(heat, t_final - t0);
        double const l2 = l2_distance(solved, empirical) * sigma;

        double const ratio = D_mech / D_kin;
        ratios.push_back(std::fabs(std::log(ratio)));
        l2s.push_back(l2);
        r.table.add_row({eps, t_final, D_mech, fit.slope_ci95 / 4, D_kin, D_boltz,
                         ratio, fit.r2, l2});
    }
    r.summary["ratio_moves_toward_one"] = non_increasing(ratios);
    r.summary["l2_decreasing"] = non_increasing(l2s);
    return r;
}

//---------------------------------------------------------------------------//
// Registry
//---------------------------------------------------------------------------//
std::vector<ExperimentInfo> const& experiment_registry()
{
    static std::vector<ExperimentInfo> const registry = [] {
        std::vector<ExperimentInfo> r;
        r.push_back({"scatter-table",
                     "deflection angle table theta(rho) for one barrier",
                     {{"barrier.alpha", "0.25", "potential exponent"},
                      {"barrier.epsilon", "0.01", "disk radius"},
                      {"barrier.speed", "1", "particle speed"},
                      {"samples", "201", "number of rho points on [-1, 1]"}},
                     run_scatter_table});
        r.push_back({"b-divergence",
                     "Landau coefficient B(eps) against |log eps|",
                     {{"barrier.alpha", "0.25", "potential exponent"},
                      {"barrier.speed", "1", "particle speed"},
                      {"medium.mu", "1", "base scatterer intensity"},
                      {"eps", "1e-4..1e-12", "decade range of eps"},
                      {"tolerance", "0.1", "relative deviation allowed at the finest eps"}},
                     run_b_divergence});
        r.push_back({"kinetic-compare",
                     "mechanical vs Boltzmann angular and spatial laws",
                     with(mechanical_keys("0.25", "2"),
                          {{"seed", "1", "master seed"},
                           {"eps_ladder", "4..8", "eps = 2^-k for k in range"},
                           {"time", "1", "kinetic time T"},
                           {"samples", "100000", "trajectories per ensemble"},
                           {"angle_bins", "32", "angle histogram bins"},
                           {"spatial_bins", "16", "spatial bins per axis"},
                           {"initial.angle", "0", "initial velocity angle"},
                           {"initial.uniform", "false", "uniform initial angle"},
                           {"noise_floor", "true", "run a second mechanical ensemble"},
                           {"tv_threshold", "0.1", "TV bound at the finest eps"}}),
                     run_kinetic_compare});
        r.push_back({"thermalization",
                     "chi-square uniformity of the mechanical angle law",
                     with(mechanical_keys("0.25", "1"),
                          {{"seed", "1", "master seed"},
                           {"eps_ladder", "4..8", "eps = 2^-k for k in range"},
                           {"times", "0,0.5,1,2", "kinetic times"},
                           {"samples", "10000", "trajectories"},
                           {"angle_bins", "64", "angle histogram bins"},
                           {"initial.angle", "0", "initial velocity angle"},
                           {"initial.uniform", "false", "uniform initial angle"},
                           {"p_threshold", "0.01", "uniformity p-value bound"}}),
                     run_thermalization});
        r.push_back({"diffusion",
                     "Landau angular diffusion: MSD, VACF and D",
                     {{"seed", "1", "master seed"},
                      {"B", "1", "Landau coefficient"},
                      {"speed", "1", "particle speed"},
                      {"mu", "1", "base intensity (reported ratios only)"},
                      {"paths", "100000", "number of paths"},
                      {"dt", "0.01", "time step"},
                      {"t", "10", "horizon"},
                      {"record_every", "10", "CSV row stride in steps"}},
                     run_diffusion});
        r.push_back({"fick-slab",
                     "stationary slab between two reservoirs",
                     {{"seed", "1", "master seed"},
                      {"slab.L", "1", "slab width"},
                      {"slab.rho1", "2", "left reservoir density"},
                      {"slab.rho2", "1", "right reservoir density"},
                      {"medium.mu", "1", "base intensity (0: empty slab)"},
                      {"medium.epsilon", "0.015625", "hard-disk diameter"},
                      {"medium.eta", "2", "intensity divergence factor"},
                      {"injections", "200000", "injections per reservoir"},
                      {"bins", "10", "x bins"},
                      {"t_max", "10000", "per-trajectory time guard"}},
                     run_fick_slab});
        r.push_back({"pathology-scan",
                     "recollision, interference and overlap frequencies",
                     with(mechanical_keys("0.05", "1"),
                          {{"seed", "1", "master seed"},
                           {"eps_ladder", "3..8", "eps = 2^-k for k in range"},
                           {"time", "2", "macroscopic time"},
                           {"trajectories", "20000", "trajectories per eps"},
                           {"mode", "barrier", "barrier or hard_disk"}}),
                     run_pathology_scan});
        r.push_back({"diffusive-scale",
                     "mechanical MSD on the diffusive time scale vs heat equation",
                     with(mechanical_keys("0.25", "1"),
                          {{"seed", "1", "master seed"},
                           {"eps_ladder", "5..8", "eps = 2^-k for k in range"},
                           {"time", "2", "macroscopic time (times |log eps|)"},
                           {"trajectories", "4000", "trajectories per eps"},
                           {"msd_points", "20", "MSD sample times"},
                           {"heat.cells", "40", "heat grid cells per axis"},
                           {"heat.start_fraction", "0.05",
                            "heat run starts from the kernel at this fraction"}}),
                     run_diffusive_scale});
        return r;
    }();
    return registry;
}

ExperimentInfo const& find_experiment(std::string const& name)
{
    for (auto const& e : experiment_registry())
    {
        if (e.name == name)
            return e;
    }
    throw ConfigError("unknown experiment '" + name + "'");
}

Report run_experiment(std::string const& name,
                      Config const& user,
                      RunContext const& context,
                      Config* resolved)
{
    auto const& info = find_experiment(name);
    Config const cfg = resolve_config(user, info.schema);
    if (resolved)
        *resolved = cfg;
    return info.run(cfg, context);
}

}  // namespace lorentz
