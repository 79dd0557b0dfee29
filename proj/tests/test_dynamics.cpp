#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "lorentz/dynamics.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;

namespace
{
// Barrier with refractive index 0.8 at unit speed
BarrierParams const index_08{std::pow(0.18, 4.0), 0.25, 1.0};

double ulp_of(double x)
{
    return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

Vec2 random_start_outside(FieldSpec const& field, Rng& rng, double box)
{
    Vec2 x;
    do
    {
        x = {rng.uniform(-box, box), rng.uniform(-box, box)};
    } while (inside_any_disk(field, x));
    return x;
}

// Three hard disks: the particle leaves the origin along +x, is turned up
// by disk 0, bounced straight back by disk 1, hits disk 0 again and is sent
// back along -x towards disk 2.
constexpr double corner_r = 0.5;
FieldSpec corner_fixture()
{
    double const s = corner_r / std::sqrt(2.0);
    return FieldSpec::planted({{2 + s, -s}, {2, 3}, {-3, 0}}, corner_r);
}

struct SegmentSpeeds final : FlowObserver
{
    double interior_time = 0;
    double outer_speed = 1;
    double index = 1;
    bool bad_speed = false;

    void on_segment(PathVertex const& a, PathVertex const& b) override
    {
        double const dt = b.time - a.time;
        if (dt < 1e-6)
            return;
        double const speed = norm(b.x - a.x) / dt;
        bool const inner = std::fabs(speed - index * outer_speed) < 1e-6;
        bool const outer = std::fabs(speed - outer_speed) < 1e-6;
        bad_speed |= !(inner || outer);
        if (inner && !outer)
            interior_time += dt;
    }
};
}  // namespace

TEST_SUITE("dynamics")
{
    TEST_CASE("empty field is free flight")
    {
        auto const field = FieldSpec::planted({}, 0.01);
        ParticleState const s{{0.3, -0.2}, {0.6, 0.8}};
        for (auto mode : {FlowMode::barrier, FlowMode::hard_disk})
        {
            auto const out = advance(s, field, index_08, 2.5, mode);
            CHECK(out.state.x.x == doctest::Approx(0.3 + 0.6 * 2.5));
            CHECK(out.state.x.y == doctest::Approx(-0.2 + 0.8 * 2.5));
            CHECK(out.state.v == s.v);
            CHECK(out.log.events.empty());
            auto const back = backward_flow(s, field, index_08, 2.5, mode);
            CHECK(back.state.x.x == doctest::Approx(0.3 - 0.6 * 2.5));
            CHECK(back.state.x.y == doctest::Approx(-0.2 - 0.8 * 2.5));
            CHECK(back.state.v == s.v);
        }
    }

    TEST_CASE("head-on traversal keeps the line and the velocity")
    {
        double const r = 0.1;
        auto const field = FieldSpec::planted({{0, 0}}, r);
        auto const out = advance({{-1, 0}, {1, 0}}, field, index_08, 3.0, FlowMode::barrier);
        REQUIRE(out.log.events.size() == 1);
        CHECK(out.log.events[0].kind == EventKind::barrier_traverse);
        CHECK(out.log.events[0].rho == 0);
        CHECK(out.state.v.x == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::fabs(out.state.v.y) < 1e-15);
        CHECK(std::fabs(out.state.x.y) < 1e-15);
        // The chord of length 2r is crossed at speed 0.8
        double const expected_x = -1 + (3.0 - 2 * r / 0.8) + 2 * r;
        CHECK(std::fabs(out.state.x.x - expected_x) < 1e-12);
    }

    TEST_CASE("generic impact matches the traced chord and exit")
    {
        double const r = 0.1;
        auto const field = FieldSpec::planted({{0, 0}}, r);
        double const T = 3.0;
        for (double rho : {0.3, -0.55, 0.79, 0.9, -0.97})
        {
            auto const out = advance({{-1, rho * r}, {1, 0}}, field, index_08, T, FlowMode::barrier);
            REQUIRE(out.log.events.size() == 1);
            CHECK(out.log.events[0].rho == doctest::Approx(rho).epsilon(1e-12));
            auto const ray = ray_trace(rho, 0.8);
            double const t_entry = 1 + ray.entry.x * r;
            double const t_chord = ray.chord_length * r / 0.8;
            Vec2 const expected = ray.exit * r + ray.exit_direction * (T - t_entry - t_chord);
            CHECK(norm(out.state.x - expected) < 1e-9);
            double const turned = std::atan2(out.state.v.y, out.state.v.x);
            CHECK(turned == doctest::Approx(scattering_angle(rho, index_08).angle).epsilon(1e-12));
            CHECK(out.log.events[0].kind
                  == (std::fabs(rho) > 0.8 ? EventKind::total_reflect : EventKind::barrier_traverse));
        }
    }

    TEST_CASE("state stopped inside a barrier resumes on its chord")
    {
        double const r = 0.1;
        auto const field = FieldSpec::planted({{0, 0}}, r);
        ParticleState const s{{-1, 0.4 * r}, {1, 0}};
        auto const mid = advance(s, field, index_08, 1.0, FlowMode::barrier);
        REQUIRE(inside_any_disk(field, mid.state.x));
        CHECK(norm(mid.state.v) == doctest::Approx(0.8).epsilon(1e-14));
        auto const rest = advance(mid.state, field, index_08, 1.0, FlowMode::barrier);
        auto const whole = advance(s, field, index_08, 2.0, FlowMode::barrier);
        CHECK(norm(rest.state.x - whole.state.x) < 1e-9);
        CHECK(norm(rest.state.v - whole.state.v) < 1e-9);
    }

    TEST_CASE("recollision fixture")
    {
        auto const field = corner_fixture();
        BarrierParams const p{0.5, 0.5, 1.0};
        auto const out = advance({{0, 0}, {1, 0}}, field, p, 12.0, FlowMode::hard_disk);
        REQUIRE(out.log.events.size() == 4);
        CHECK(out.log.events[0].id.index == 0);
        CHECK(out.log.events[1].id.index == 1);
        CHECK(out.log.events[2].id.index == 0);
        CHECK(out.log.events[3].id.index == 2);
        CHECK(out.log.events[0].time == doctest::Approx(2.0));
        CHECK(out.log.events[1].time == doctest::Approx(4.5));
        CHECK(out.log.events[2].time == doctest::Approx(7.0));
        CHECK(out.log.events[3].time == doctest::Approx(11.5));
        auto const report = classify_pathologies(out.log, field, p);
        CHECK(report.recollisions == 1);
        CHECK(report.interferences == 0);
        CHECK(report.overlaps == 0);
        CHECK(report.q_collisions == 4);
    }

    TEST_CASE("backward flow mirrors the forward path on the fixture")
    {
        auto const field = corner_fixture();
        BarrierParams const p{0.5, 0.5, 1.0};
        ParticleState const s{{0, 0}, {1, 0}};
        auto const fwd = advance(s, field, p, 8.0, FlowMode::hard_disk);
        auto const bwd = backward_flow(fwd.state, field, p, 8.0, FlowMode::hard_disk);
        CHECK(norm(bwd.state.x - s.x) < 1e-9);
        CHECK(norm(bwd.state.v - s.v) < 1e-12);
        REQUIRE(fwd.log.events.size() == bwd.log.events.size());
        std::size_t const n = fwd.log.events.size();
        for (std::size_t k = 0; k < n; ++k)
        {
            auto const& f = fwd.log.events[k];
            auto const& b = bwd.log.events[n - 1 - k];
            CHECK(f.id == b.id);
            CHECK(b.time == doctest::Approx(8.0 - f.time).epsilon(1e-12));
        }
    }

    TEST_CASE("interference count on a hand-built log")
    {
        auto const field = FieldSpec::planted({{0, 0}, {1, 0.95}}, 0.1);
        BarrierParams const p{0.5, 0.5, 1.0};
        TrajectoryLog log;
        log.path = {{0, {-1, 0}}, {2, {1, 0}}, {2.85, {1, 0.85}}, {4, {2, 0.85}}};
        CollisionEvent late;  // disk 0 is first collided after the path crossed it
        late.time = 3.5;
        late.id = {{}, 0};
        late.center = {0, 0};
        CollisionEvent first;
        first.time = 2.85;
        first.id = {{}, 1};
        first.center = {1, 0.95};
        log.events = {first, late};
        auto const report = classify_pathologies(log, field, p);
        CHECK(report.interferences == 1);
        CHECK(report.recollisions == 0);
        CHECK(report.q_collisions == 2);
    }

    TEST_CASE("overlap count on a hand-built log")
    {
        auto const field = FieldSpec::planted({{0, 0}, {0.15, 0}, {3, 0}}, 0.1);
        BarrierParams const p{0.5, 0.5, 1.0};
        TrajectoryLog log;
        log.path = {{0, {0, -1}}, {5, {0, 4}}};
        for (std::uint32_t k = 0; k < 3; ++k)
        {
            CollisionEvent e;
            e.time = 1 + k;
            e.id = {{}, k};
            e.center = field.fixture->at(k);
            log.events.push_back(e);
        }
        CHECK(classify_pathologies(log, field, p).overlaps == 1);
        CHECK(classify_pathologies(TrajectoryLog{}, field, p).q_collisions == 0);
        auto const straight = advance({{0, 5}, {1, 0}}, field, p, 3.0, FlowMode::barrier);
        auto const none = classify_pathologies(straight.log, field, p);
        CHECK(none.overlaps + none.recollisions + none.interferences + none.q_collisions == 0);
    }

    TEST_CASE("mechanical trajectories never register interference")
    {
        BarrierParams const p{std::pow(2.0, -5), 0.1, 1.0};
        auto const field = FieldSpec::poisson(1.0, p.epsilon, 1 + 2 * p.alpha, 4);
        Rng rng(5);
        std::size_t events = 0;
        for (int i = 0; i < 300; ++i)
        {
            Vec2 const x = random_start_outside(field, rng, 1.0);
            auto const out = advance({x, unit_from_angle(rng.uniform(0, 7))}, field, p, 1.0,
                                     i % 2 ? FlowMode::barrier : FlowMode::hard_disk);
            auto const report = classify_pathologies(out.log, field, p);
            // A barrier chord can only cross a later-collided disk through an overlap
            if (out.log.overlaps_encountered == 0)
                CHECK(report.interferences == 0);
            events += out.log.events.size();
        }
        CHECK(events > 1000);
    }

    TEST_CASE("log invariants: increasing times, joined segments, speeds")
    {
        BarrierParams const p{std::pow(2.0, -10), 0.25, 1.3};
        auto const field = FieldSpec::poisson(1.0, p.epsilon, 1 + 2 * p.alpha, 9);
        double const n = refractive_index(p);
        Rng rng(6);
        for (int i = 0; i < 200; ++i)
        {
            Vec2 const x = random_start_outside(field, rng, 2.0);
            double const T = rng.uniform(0, 1.5);
            auto const out = advance({x, unit_from_angle(rng.uniform(0, 7)) * p.speed}, field, p,
                                     T, FlowMode::barrier);
            auto const& ev = out.log.events;
            for (std::size_t k = 1; k < ev.size(); ++k)
                CHECK(ev[k].time > ev[k - 1].time);
            auto const& path = out.log.path;
            REQUIRE(!path.empty());
            CHECK(path.front().x == x);
            CHECK(path.back().x == out.state.x);
            CHECK(path.back().time == doctest::Approx(T));
            for (std::size_t k = 1; k < path.size(); ++k)
                CHECK(path[k].time >= path[k - 1].time);
            double const speed = norm(out.state.v);
            if (out.log.overlaps_encountered != 0)
                continue;
            if (inside_any_disk(field, out.state.x))
                CHECK(std::fabs(speed - n * p.speed) <= 4 * ulp_of(n * p.speed));
            else
                CHECK(std::fabs(speed - p.speed) <= 4 * ulp_of(p.speed));
        }
    }

    TEST_CASE("time reversal on short trajectories")
    {
        BarrierParams const p{std::pow(2.0, -8), 0.25, 1.0};
        auto const field = FieldSpec::poisson(1.0, p.epsilon, 1 + 2 * p.alpha, 7);
        Rng rng(1);
        int checked = 0;
        for (int i = 0; i < 300; ++i)
        {
            Vec2 const x = random_start_outside(field, rng, 0.5);
            Vec2 const v = unit_from_angle(rng.uniform(0, 2 * std::numbers::pi));
            auto const fwd = advance({x, v}, field, p, 0.1, FlowMode::barrier);
            auto const report = classify_pathologies(fwd.log, field, p);
            if (fwd.log.overlaps_encountered || report.overlaps || report.recollisions)
                continue;
            auto const back = backward_flow(fwd.state, field, p, 0.1, FlowMode::barrier);
            CHECK(norm(back.state.x - x) <= 1e-9);
            CHECK(norm(back.state.v - v) <= 1e-6);
            ++checked;
        }
        CHECK(checked > 150);
    }

    TEST_CASE("collision rate during free flight is 2 mu eps^-2alpha |v|")
    {
        double const alpha = 0.1, eps = std::pow(2.0, -10), mu = 1.0, speed = 1.5;
        BarrierParams const p{eps, alpha, speed};
        double const rate = 2 * mu * std::pow(eps, -2 * alpha) * speed;
        RunningStats count, free_time;
        double const T = 1.0;
        for (std::uint64_t i = 0; i < 10'000; ++i)
        {
            // A fresh field realization per trajectory
            auto const field = FieldSpec::poisson(mu, eps, 1 + 2 * alpha, 1000 + i);
            Rng rng = rng_stream(17, i);
            Vec2 const x = random_start_outside(field, rng, 1.0);
            FieldCursor cursor(field);
            FlowOptions opt;
            opt.duration = T;
            SegmentSpeeds obs;
            obs.index = refractive_index(p);
            obs.outer_speed = speed;
            auto const out = propagate({x, unit_from_angle(rng.uniform(0, 7)) * speed}, cursor, p, opt, &obs);
            CHECK_FALSE(obs.bad_speed);
            count.add(static_cast<double>(out.collisions));
            free_time.add(T - obs.interior_time);
        }
        double const expected = rate * free_time.mean();
        CHECK(std::fabs(count.mean() - expected) < 3 * count.std_error());
    }

    TEST_CASE("runaway trajectories trip the event guard")
    {
        BarrierParams const p{0.5, 0.5, 1.0};
        auto const field = FieldSpec::poisson(1.0, 0.05, 2.0, 3);
        Rng rng(2);
        Vec2 const x = random_start_outside(field, rng, 1.0);
        FieldCursor cursor(field);
        FlowOptions opt;
        opt.mode = FlowMode::hard_disk;
        opt.duration = 100;
        opt.max_events = 10;
        CHECK_THROWS_AS(propagate({x, {1, 0}}, cursor, p, opt), NumericalGuardError);
    }

    TEST_CASE("first boundary hit")
    {
        BarrierParams const p{0.5, 0.5, 1.0};
        auto const empty = FieldSpec::planted({}, 0.1);
        auto const right = first_boundary_hit({{0.5, 0}, {1, 0}}, empty, p, 1.0, 10);
        REQUIRE(right.tau);
        CHECK(*right.tau == doctest::Approx(0.5));
        CHECK(right.side == BoundarySide::right);
        auto const parallel = first_boundary_hit({{0.5, 0}, {0, 1}}, empty, p, 1.0, 1e6);
        CHECK_FALSE(parallel.tau);
        CHECK(parallel.side == BoundarySide::none);

        auto const wall = FieldSpec::planted({{1.5, 0}}, 0.1);
        auto const back = first_boundary_hit({{1, 0}, {1, 0}}, wall, p, 2.0, 10);
        REQUIRE(back.tau);
        CHECK(back.side == BoundarySide::left);
        CHECK(*back.tau == doctest::Approx(0.4 + 1.4));
        CHECK_THROWS_AS(first_boundary_hit({{3, 0}, {1, 0}}, empty, p, 2.0, 10), DomainError);
    }

    TEST_CASE("disk membership")
    {
        auto const field = FieldSpec::planted({{0, 0}}, 0.1);
        CHECK(inside_any_disk(field, {0.05, 0.05}));
        CHECK_FALSE(inside_any_disk(field, {0.1, 0.0}));
        CHECK_FALSE(inside_any_disk(field, {0.2, 0.0}));
    }
}
