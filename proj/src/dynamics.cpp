#include "lorentz/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lorentz/errors.hpp"

namespace lorentz
{
namespace
{
constexpr double exit_push = 1e-12;
constexpr double tangent_tol = 1e-12;

struct Hit
{
    double distance = 0;
    Scatterer target;
};

// Earliest entry into a disk along x + s d, 0 < s <= limit. Disks that
// contain x are transparent; `skip` is the disk just left.
std::optional<Hit> find_first_hit(FieldCursor& field,
                                  Vec2 x,
                                  Vec2 d,
                                  double limit,
                                  std::optional<ScattererId> const& skip)
{
    double const r = field.spec().radius();
    double const r2 = r * r;
    double const chunk = field.spec().cell_size;
    double traveled = 0;
    while (traveled < limit)
    {
        double const len = std::min(chunk, limit - traveled);
        auto const& candidates
            = field.near_segment(x + d * traveled, x + d * (traveled + len));
        std::optional<Hit> best;
        for (auto const& s : candidates)
        {
            if (skip && s.id == *skip)
                continue;
            Vec2 const w = x - s.center;
            double const b = dot(d, w);
            double const c = norm_sq(w) - r2;
            if (c <= 0)
                continue;
            double const disc = b * b - c;
            if (disc <= tangent_tol * r2)
                continue;
            double const entry = -b - std::sqrt(disc);
            if (entry <= 0 || entry > limit)
                continue;
            if (!best || entry < best->distance)
                best = Hit{entry, s};
        }
        if (best)
            return best;
        traveled += len;
    }
    return std::nullopt;
}

// Distance along d from x to the first slab wall, with the side
std::pair<double, BoundarySide>
wall_distance(Vec2 x, Vec2 d, std::optional<double> const& slab_length)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!slab_length)
        return {inf, BoundarySide::none};
    if (d.x > 0)
        return {std::max(0.0, (*slab_length - x.x) / d.x), BoundarySide::right};
    if (d.x < 0)
        return {std::max(0.0, -x.x / d.x), BoundarySide::left};
    return {inf, BoundarySide::none};
}

class Integrator
{
  public:
    Integrator(FieldCursor& field,
               BarrierParams const& params,
               FlowOptions const& options,
               FlowObserver* observer)
        : field_(field), params_(params), options_(options), obs_(observer)
    {
        if (options_.mode == FlowMode::barrier
            && !params_.totally_reflecting())
        {
            index_ = refractive_index(params_);
        }
    }

    FlowOutcome run(ParticleState const& start)
    {
        x_ = start.x;
        v_ = start.v;
        if (!(options_.duration >= 0))
            throw DomainError("flow duration must be non-negative");
        if (!(norm(v_) > 0))
            throw DomainError("particle velocity must be nonzero");
        outer_speed_ = options_.mode == FlowMode::barrier ? params_.speed
                                                          : norm(v_);
        if (options_.mode == FlowMode::barrier && index_ > 0
            && norm(v_) < outer_speed_ * (1 - 1e-9))
        {
            finish_chord();
        }
        while (side_ == BoundarySide::none && t_ < options_.duration)
        {
            step();
        }
        return {{x_, v_}, t_, side_, collisions_};
    }

  private:
    void move_to(Vec2 x, double t)
    {
        if (obs_)
            obs_->on_segment({t_, x_}, {t, x});
        x_ = x;
        t_ = t;
    }

    void push_out(Vec2 dir)
    {
        double const dt = std::min(exit_push / outer_speed_,
                                   options_.duration - t_);
        if (dt > 0)
            move_to(x_ + dir * (outer_speed_ * dt), t_ + dt);
    }

    void count_collision()
    {
        if (++collisions_ > options_.max_events)
        {
            throw NumericalGuardError(
                "more than " + std::to_string(options_.max_events)
                + " collisions before the stopping time");
        }
    }

    void step()
    {
        double const speed = norm(v_);
        Vec2 const d = v_ * (1 / speed);
        double const remaining = (options_.duration - t_) * speed;
        auto const [wall, wall_side] = wall_distance(x_, d, options_.slab_length);
        double const limit = std::min(remaining, wall);
        auto const hit = find_first_hit(field_, x_, d, limit, skip_);
        if (!hit)
        {
            move_to(x_ + d * limit, t_ + limit / speed);
            if (wall <= remaining)
                side_ = wall_side;
            else
                t_ = options_.duration;
            return;
        }

        Vec2 const c = hit->target.center;
        double const r = field_.spec().radius();
        move_to(x_ + d * hit->distance, t_ + hit->distance / speed);
        CollisionEvent event;
        event.time = t_;
        event.id = hit->target.id;
        event.center = c;
        event.rho = std::clamp(cross(c - x_, d) / r, -1.0, 1.0);
        skip_ = hit->target.id;
        count_collision();

        if (options_.mode == FlowMode::hard_disk)
        {
            event.kind = EventKind::hard_reflect;
            Vec2 omega = x_ - c;
            omega *= 1 / norm(omega);
            v_ = hard_disk_reflect(v_, omega);
            notify(event);
            push_out(v_ * (1 / norm(v_)));
            return;
        }

        auto const outcome = scattering_angle(event.rho, params_);
        Vec2 out_dir = rotate(d, outcome.angle);
        out_dir *= 1 / norm(out_dir);
        if (outcome.branch == ScatterBranch::totally_reflected)
        {
            event.kind = EventKind::total_reflect;
            v_ = out_dir * outer_speed_;
            notify(event);
            push_out(out_dir);
            return;
        }

        event.kind = EventKind::barrier_traverse;
        notify(event);
        Vec2 const u = rotate(d, outcome.angle / 2);
        double const chord = std::max(0.0, -2 * dot(x_ - c, u));
        traverse_chord(u, chord, hit->target.id, out_dir);
    }

    // Move along a refracted chord of given length; on completion the
    // particle leaves with direction out_dir
    void traverse_chord(Vec2 u,
                        double chord,
                        ScattererId const& id,
                        Vec2 out_dir)
    {
        Vec2 const p1 = x_;
        Vec2 const p2 = p1 + u * chord;
        for (auto const& s : field_.near_segment(p1, p2))
        {
            if (!(s.id == id))
            {
                if (obs_)
                    obs_->on_overlap();
                break;
            }
        }
        double const inner_speed = index_ * outer_speed_;
        double const chord_time = chord / inner_speed;
        auto const [wall, wall_side] = wall_distance(p1, u, options_.slab_length);
        double const time_left = options_.duration - t_;
        if (wall < chord && wall / inner_speed <= time_left)
        {
            move_to(p1 + u * wall, t_ + wall / inner_speed);
            v_ = u * inner_speed;
            side_ = wall_side;
            return;
        }
        if (chord_time > time_left)
        {
            move_to(p1 + u * (inner_speed * time_left), options_.duration);
            v_ = u * inner_speed;
            return;
        }
        move_to(p2, t_ + chord_time);
        v_ = out_dir * outer_speed_;
        skip_ = id;
        push_out(out_dir);
    }

    // Resume a state that stopped on a chord
    void finish_chord()
    {
        double const r = field_.spec().radius();
        std::optional<Scatterer> host;
        double best = r * r;
        for (auto const& s : field_.near_segment(x_, x_))
        {
            double const d2 = norm_sq(x_ - s.center);
            if (d2 < best)
            {
                best = d2;
                host = s;
            }
        }
        if (!host)
            throw NumericalGuardError("slow particle outside every disk");
        double const speed = norm(v_);
        Vec2 const u = v_ * (1 / speed);
        Vec2 const w = x_ - host->center;
        double const b = dot(u, w);
        double const c = norm_sq(w) - r * r;
        double const chord = -b + std::sqrt(std::max(0.0, b * b - c));
        Vec2 const p2 = x_ + u * chord;
        Vec2 normal = p2 - host->center;
        normal *= 1 / norm(normal);
        // Tangential velocity is conserved; energy fixes the normal part
        Vec2 const v_t = v_ - normal * dot(v_, normal);
        double const v_n = std::sqrt(
            std::max(0.0, outer_speed_ * outer_speed_ - norm_sq(v_t)));
        Vec2 out = v_t + normal * v_n;
        out *= 1 / norm(out);
        traverse_chord(u, chord, host->id, out);
    }

    void notify(CollisionEvent const& e)
    {
        if (obs_)
            obs_->on_collision(e);
    }

    FieldCursor& field_;
    BarrierParams const& params_;
    FlowOptions const& options_;
    FlowObserver* obs_;
    double index_ = 0;
    double outer_speed_ = 1;
    Vec2 x_;
    Vec2 v_;
    double t_ = 0;
    std::size_t collisions_ = 0;
    BoundarySide side_ = BoundarySide::none;
    std::optional<ScattererId> skip_;
};

class LogObserver final : public FlowObserver
{
  public:
    explicit LogObserver(TrajectoryLog& log) : log_(log) {}

    void on_segment(PathVertex const& from, PathVertex const& to) override
    {
        if (log_.path.empty())
            log_.path.push_back(from);
        log_.path.push_back(to);
    }
    void on_collision(CollisionEvent const& e) override
    {
        log_.events.push_back(e);
    }
    void on_overlap() override { ++log_.overlaps_encountered; }

  private:
    TrajectoryLog& log_;
};

struct SeenScatterer
{
    ScattererId id;
    Vec2 center;
    std::size_t first_event;
};
}  // namespace

char const* to_string(EventKind k)
{
    switch (k)
    {
        case EventKind::barrier_traverse:
            return "barrier_traverse";
        case EventKind::total_reflect:
            return "total_reflect";
        case EventKind::hard_reflect:
            return "hard_reflect";
    }
    return "?";
}

char const* to_string(BoundarySide s)
{
    switch (s)
    {
        case BoundarySide::none:
            return "none";
        case BoundarySide::left:
            return "left";
        case BoundarySide::right:
            return "right";
    }
    return "?";
}

FlowOutcome propagate(ParticleState const& start,
                      FieldCursor& field,
                      BarrierParams const& params,
                      FlowOptions const& options,
                      FlowObserver* observer)
{
    Integrator integrator(field, params, options, observer);
    return integrator.run(start);
}

FlowResult advance(ParticleState const& state,
                   FieldSpec const& field,
                   BarrierParams const& params,
                   double t,
                   FlowMode mode)
{
    FlowResult result;
    result.log.path.push_back({0, state.x});
    LogObserver observer(result.log);
    FieldCursor cursor(field);
    FlowOptions options;
    options.mode = mode;
    options.duration = t;
    auto const outcome = propagate(state, cursor, params, options, &observer);
    result.state = outcome.state;
    return result;
}

FlowResult backward_flow(ParticleState const& state,
                         FieldSpec const& field,
                         BarrierParams const& params,
                         double t,
                         FlowMode mode)
{
    FlowResult result = advance({state.x, -state.v}, field, params, t, mode);
    result.state.v = -result.state.v;
    return result;
}

PathologyReport classify_pathologies(TrajectoryLog const& log,
                                     FieldSpec const& field,
                                     BarrierParams const& /*params*/)
{
    PathologyReport report;
    auto const& events = log.events;
    report.q_collisions = events.size();

    std::vector<SeenScatterer> internal;
    for (std::size_t i = 0; i < events.size(); ++i)
    {
        auto found = std::find_if(
            internal.begin(), internal.end(), [&](SeenScatterer const& s) {
                return s.id == events[i].id;
            });
        if (found == internal.end())
            internal.push_back({events[i].id, events[i].center, i});
    }

    double const r = field.radius();
    double const diameter_sq = 4 * r * r;
    for (std::size_t a = 0; a < internal.size(); ++a)
    {
        for (std::size_t b = a + 1; b < internal.size(); ++b)
        {
            if (norm_sq(internal[a].center - internal[b].center) < diameter_sq)
                ++report.overlaps;
        }
    }

    // Strictly inside the disk, away from the boundary touch points
    double const inner_sq = (r * (1 - 1e-9)) * (r * (1 - 1e-9));
    auto crosses = [&](Vec2 center, std::size_t seg) {
        return segment_distance_sq(center, log.path[seg].x, log.path[seg + 1].x)
               < inner_sq;
    };
    std::size_t const n_seg = log.path.empty() ? 0 : log.path.size() - 1;

    for (auto const& s : internal)
    {
        double const t_first = events[s.first_event].time;
        for (std::size_t seg = 0; seg < n_seg; ++seg)
        {
            if (log.path[seg + 1].time <= t_first && crosses(s.center, seg))
            {
                ++report.interferences;
                break;
            }
        }

        std::size_t j = s.first_event + 1;
        while (j < events.size() && events[j].id == s.id)
            ++j;
        if (j == events.size())
            continue;
        bool recollided = false;
        for (std::size_t k = j + 1; k < events.size() && !recollided; ++k)
            recollided = events[k].id == s.id;
        for (std::size_t seg = 0; seg < n_seg && !recollided; ++seg)
        {
            recollided = log.path[seg].time >= events[j].time
                         && crosses(s.center, seg);
        }
        report.recollisions += recollided;
    }
    return report;
}

BoundaryHit first_boundary_hit(ParticleState const& state,
                               FieldSpec const& field,
                               BarrierParams const& params,
                               double slab_length,
                               double t_max,
                               FlowMode mode)
{
    if (!(state.x.x >= 0 && state.x.x <= slab_length))
        throw DomainError("particle must start inside the slab");
    FieldCursor cursor(field);
    FlowOptions options;
    options.mode = mode;
    options.duration = t_max;
    options.slab_length = slab_length;
    auto const outcome = propagate(state, cursor, params, options);
    BoundaryHit hit;
    hit.side = outcome.side;
    hit.state = outcome.state;
    if (outcome.side != BoundarySide::none)
        hit.tau = outcome.elapsed;
    return hit;
}

bool inside_any_disk(FieldSpec const& field, Vec2 x)
{
    double const r2 = field.radius() * field.radius();
    for (auto const& s : scatterers_near_segment(field, x, x))
    {
        if (norm_sq(x - s.center) < r2)
            return true;
    }
    return false;
}

}  // namespace lorentz
