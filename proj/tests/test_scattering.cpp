#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "lorentz/errors.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/scattering.hpp"

using namespace lorentz;

namespace
{
// eps^alpha = h with alpha = 1/4
BarrierParams params_with_height(double h, double speed = 1.0)
{
    return {std::pow(h, 4.0), 0.25, speed};
}

double ulp_of(double x)
{
    return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

// Sine of the angle between a direction and a unit normal
double sin_between(Vec2 d, Vec2 normal)
{
    return std::fabs(cross(d, normal)) / norm(d);
}
}  // namespace

TEST_SUITE("scattering")
{
    TEST_CASE("refractive index evaluation and regime boundary")
    {
        CHECK(refractive_index(params_with_height(0.18)) == doctest::Approx(0.8).epsilon(1e-14));
        CHECK_THROWS_AS(refractive_index(params_with_height(0.5)), RegimeError);
        // Vanishing barrier
        double prev = 0;
        for (double eps : {1e-2, 1e-4, 1e-8, 1e-16, 1e-32})
        {
            double const n = refractive_index({eps, 0.25, 1.0});
            CHECK(n > prev);
            prev = n;
        }
        CHECK(prev > 1 - 1e-7);
    }

    TEST_CASE("barrier params validation")
    {
        CHECK_THROWS_AS(BarrierParams({0.0, 0.25, 1.0}).validate(), DomainError);
        CHECK_THROWS_AS(BarrierParams({1.0, 0.25, 1.0}).validate(), DomainError);
        CHECK_THROWS_AS(BarrierParams({0.1, 0.6, 1.0}).validate(), DomainError);
        CHECK_THROWS_AS(BarrierParams({0.1, 0.25, 0.0}).validate(), DomainError);
        BarrierParams const p{0.01, 0.5, 1.0};
        CHECK(p.barrier_height() == doctest::Approx(0.1));
        CHECK(p.regime_ratio() == doctest::Approx(0.2));
        CHECK_FALSE(p.totally_reflecting());
        CHECK(BarrierParams({0.01, 0.5, 0.4}).totally_reflecting());
    }

    TEST_CASE("head-on impact is not deflected")
    {
        auto const out = scattering_angle(0.0, params_with_height(0.18));
        CHECK(out.angle == 0);
        CHECK(out.branch == ScatterBranch::refracted);
        CHECK(ray_trace_oracle(0.0, params_with_height(0.18)) == 0);
    }

    TEST_CASE("refracted example agrees with the geometric construction")
    {
        auto const p = params_with_height(0.18);  // n = 0.8
        auto const out = scattering_angle(0.5, p);
        auto const ray = ray_trace(0.5, 0.8);
        CHECK(out.branch == ScatterBranch::refracted);
        CHECK(ray.branch == ScatterBranch::refracted);
        CHECK(std::fabs(out.angle - ray.angle) <= 1e-10);
        CHECK(std::fabs(out.angle - 2 * (std::asin(0.625) - std::asin(0.5))) <= 1e-12);

        // Snell's law holds at both interfaces of the traced chord
        Vec2 const chord = ray.exit - ray.entry;
        CHECK(norm(ray.entry) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(norm(ray.exit) == doctest::Approx(1.0).epsilon(1e-14));
        double const s_out = sin_between({1, 0}, ray.entry);
        double const s_in = sin_between(chord, ray.entry);
        CHECK(s_in * 0.8 == doctest::Approx(s_out).epsilon(1e-12));
        CHECK(sin_between(chord, ray.exit) * 0.8
              == doctest::Approx(sin_between(ray.exit_direction, ray.exit)).epsilon(1e-12));
        CHECK(ray.chord_length == doctest::Approx(norm(chord)).epsilon(1e-12));
    }

    TEST_CASE("reflected example agrees with specular construction")
    {
        auto const out = scattering_angle_for_index(0.8, 0.6);
        CHECK(out.branch == ScatterBranch::totally_reflected);
        CHECK(std::fabs(out.angle - 2 * std::acos(0.8)) <= 1e-12);

        auto const ray = ray_trace(0.8, 0.6);
        CHECK(ray.branch == ScatterBranch::totally_reflected);
        CHECK(std::fabs(ray.angle - out.angle) <= 1e-10);
        // Normal component flips, tangential component is kept
        Vec2 const normal = ray.entry;
        CHECK(dot(ray.exit_direction, normal) == doctest::Approx(-dot(Vec2{1, 0}, normal)).epsilon(1e-12));
        CHECK(cross(ray.exit_direction, normal) == doctest::Approx(cross(Vec2{1, 0}, normal)).epsilon(1e-12));
    }

    TEST_CASE("branch is decided by rho against n")
    {
        for (double n : {0.2, 0.5, 0.9})
        {
            for (double rho = -1; rho <= 1; rho += 0.01)
            {
                auto const out = scattering_angle_for_index(rho, n);
                bool const reflected = std::fabs(rho) > n;
                CHECK((out.branch == ScatterBranch::totally_reflected) == reflected);
            }
        }
        // Impenetrable barrier: every impact is a hard-disk reflection
        BarrierParams const hard{0.5, 0.5, 1.0};
        REQUIRE(hard.totally_reflecting());
        for (double rho : {-0.9, -0.3, 0.1, 0.7})
        {
            auto const out = scattering_angle(rho, hard);
            CHECK(out.branch == ScatterBranch::totally_reflected);
            CHECK(std::fabs(out.angle) == doctest::Approx(2 * std::acos(std::fabs(rho))));
        }
    }

    TEST_CASE("angle is odd and positive rho turns counterclockwise")
    {
        auto const p = params_with_height(0.3);
        Rng rng(7);
        for (int i = 0; i < 2000; ++i)
        {
            double const rho = rng.uniform(-1, 1);
            CHECK(scattering_angle(-rho, p).angle == -scattering_angle(rho, p).angle);
        }
        CHECK(scattering_angle(0.3, p).angle > 0);
        CHECK(scattering_angle(-0.3, p).angle < 0);
        CHECK(ray_trace_oracle(0.3, p) > 0);
    }

    TEST_CASE("angle range is (-pi, pi]")
    {
        for (double n : {0.0, 0.3, 0.99})
        {
            for (double rho = -1; rho <= 1; rho += 0.001)
            {
                double const a = scattering_angle_for_index(rho, n).angle;
                CHECK(a > -std::numbers::pi);
                CHECK(a <= std::numbers::pi);
            }
        }
    }

    TEST_CASE("one-sided limits agree at the branch point")
    {
        for (double n : {0.3, 0.6, 0.8, 0.95})
        {
            double const at = 2 * std::acos(n);
            for (double h : {1e-6, 1e-8})
            {
                double const below = scattering_angle_for_index(n - h, n).angle;
                double const above = scattering_angle_for_index(n + h, n).angle;
                // Refracted side has an inverse square root slope in h
                CHECK(std::fabs(below - at) < 10 * std::sqrt(h));
                CHECK(std::fabs(above - at) < 10 * std::sqrt(h));
                CHECK(std::fabs(below - above) < 20 * std::sqrt(h));
            }
            CHECK(std::fabs(scattering_angle_for_index(n, n).angle - at) < 1e-12);
        }
    }

    TEST_CASE("oracle agrees with closed form on a dense grid")
    {
        double worst = 0;
        for (int i = 0; i <= 99; ++i)
        {
            double const n = 0.01 + 0.98 * i / 99.0;
            for (int j = 0; j <= 99; ++j)
            {
                double const rho = -1 + 2 * j / 99.0;
                worst = std::max(worst, std::fabs(scattering_angle_for_index(rho, n).angle
                                                  - ray_trace(rho, n).angle));
            }
            worst = std::max(worst, std::fabs(scattering_angle_for_index(n, n).angle
                                              - ray_trace(n, n).angle));
        }
        CHECK(worst <= 1e-10);
    }

    TEST_CASE("deflection keeps the speed to 4 ulp")
    {
        Rng rng(11);
        for (int i = 0; i < 5000; ++i)
        {
            double const speed = rng.uniform(0.8, 3);
            BarrierParams const p{rng.uniform(1e-6, 0.05), 0.25, speed};
            Vec2 const v = unit_from_angle(rng.uniform(0, 2 * std::numbers::pi)) * speed;
            double const rho = rng.uniform(-1, 1);
            Vec2 const out = deflect(v, rho, p);
            CHECK(std::fabs(norm(out) - norm(v)) <= 4 * ulp_of(norm(v)));
            double const expected = scattering_angle(rho, p).angle;
            double const turned = std::atan2(cross(v, out), dot(v, out));
            CHECK(std::fabs(std::remainder(turned - expected, 2 * std::numbers::pi)) < 1e-12);
        }
    }

    TEST_CASE("deflection examples")
    {
        auto const p = params_with_height(0.18);
        CHECK(deflect({1, 0}, 0.0, p) == Vec2{1, 0});
        Vec2 const up = deflect({1, 0}, 0.4, p);
        Vec2 const down = deflect({1, 0}, -0.4, p);
        CHECK(up.x == doctest::Approx(down.x).epsilon(1e-15));
        CHECK(up.y == doctest::Approx(-down.y).epsilon(1e-15));
        CHECK(up.y > 0);
        CHECK_THROWS_AS(deflect({0, 0}, 0.1, p), DomainError);
        CHECK_THROWS_AS(scattering_angle(1.5, p), DomainError);
        CHECK_THROWS_AS(ray_trace_oracle(-1.01, p), DomainError);
    }

    TEST_CASE("hard disk reflection")
    {
        CHECK(hard_disk_reflect({1, 0}, {-1, 0}) == Vec2{-1, 0});
        CHECK(hard_disk_reflect({1, 0}, {0, 1}) == Vec2{1, 0});
        CHECK_THROWS_AS(hard_disk_reflect({1, 0}, {0.5, 0.5}), DomainError);
        Rng rng(3);
        for (int i = 0; i < 2000; ++i)
        {
            Vec2 const v{rng.normal(), rng.normal()};
            Vec2 const omega = unit_from_angle(rng.uniform(0, 2 * std::numbers::pi));
            Vec2 const out = hard_disk_reflect(v, omega);
            CHECK(dot(out, omega) == doctest::Approx(-dot(v, omega)).epsilon(1e-12));
            CHECK(std::fabs(norm(out) - norm(v)) <= 8 * ulp_of(norm(v)));
        }
    }

    TEST_CASE("grazing limit: deflection vanishes as the barrier shrinks")
    {
        for (double rho : {0.1, 0.5, 0.9, 0.99})
        {
            double prev = std::numeric_limits<double>::infinity();
            for (double eps : {1e-2, 1e-4, 1e-8, 1e-16, 1e-32, 1e-64})
            {
                double const a = std::fabs(scattering_angle(rho, {eps, 0.25, 1.0}).angle);
                CHECK(a <= prev);
                prev = a;
            }
            CHECK(prev < 1e-5);
        }
    }
}
