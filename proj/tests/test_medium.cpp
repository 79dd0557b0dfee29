#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "lorentz/medium.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;

namespace
{
using Key = std::tuple<std::int64_t, std::int64_t, std::uint32_t>;

Key key_of(Scatterer const& s)
{
    return {s.id.cell.ix, s.id.cell.iy, s.id.index};
}

// mu_eff * cell^2 = mean per cell
FieldSpec field_with_cell_mean(double mean, std::uint64_t seed)
{
    auto spec = FieldSpec::poisson(1.0, 0.01, 1.5, seed);
    double const cell_area = spec.cell_size * spec.cell_size;
    spec.mu = mean / (std::pow(spec.epsilon, -spec.delta) * cell_area);
    return spec;
}
}  // namespace

TEST_SUITE("medium")
{
    TEST_CASE("effective intensity")
    {
        auto const spec = FieldSpec::poisson(2.0, 0.01, 1.5, 1, 3.0);
        CHECK(spec.effective_intensity() == doctest::Approx(2.0 * 1000.0 * 3.0));
        CHECK(spec.cell_size == doctest::Approx(0.04));
        auto bad = spec;
        bad.cell_size = 0.015;
        CHECK_THROWS(bad.validate());
    }

    TEST_CASE("mean count per cell matches the intensity")
    {
        double const mean = 1.7;
        auto const spec = field_with_cell_mean(mean, 42);
        RunningStats stats;
        for (std::int64_t i = 0; i < 100'000; ++i)
            stats.add(static_cast<double>(scatterer_count_in_cell(spec, {i % 317, i / 317})));
        CHECK(std::fabs(stats.mean() - mean) < 3 * std::sqrt(mean / 1e5));
    }

    TEST_CASE("count histogram follows the Poisson law")
    {
        double const mean = 2.5;
        auto const spec = field_with_cell_mean(mean, 9);
        std::size_t const kmax = 9;  // last bin collects the tail
        std::vector<std::uint64_t> counts(kmax + 1, 0);
        for (std::int64_t i = 0; i < 100'000; ++i)
        {
            auto const k = scatterer_count_in_cell(spec, {i / 400 - 100, i % 400});
            ++counts[std::min<std::uint64_t>(k, kmax)];
        }
        std::vector<double> pmf(kmax + 1);
        double term = std::exp(-mean), head = 0;
        for (std::size_t k = 0; k < kmax; ++k)
        {
            pmf[k] = term;
            head += term;
            term *= mean / (k + 1);
        }
        pmf[kmax] = 1 - head;
        CHECK(chi_square(counts, pmf).p_value > 0.01);
    }

    TEST_CASE("cells are a pure function of seed and index")
    {
        auto const spec = FieldSpec::poisson(1.0, 0.01, 1.5, 77);
        for (std::int64_t i = -5; i < 5; ++i)
        {
            auto const a = scatterers_in_cell(spec, {i, 3 * i});
            auto const b = scatterers_in_cell(spec, {i, 3 * i});
            REQUIRE(a.size() == b.size());
            for (std::size_t k = 0; k < a.size(); ++k)
            {
                CHECK(a[k].center == b[k].center);
                CHECK(a[k].id == b[k].id);
            }
            CHECK(scatterer_count_in_cell(spec, {i, 3 * i}) == a.size());
            for (auto const& s : a)
                CHECK(spec.cell_of(s.center) == CellIndex{i, 3 * i});
        }
        auto other = spec;
        other.seed = 78;
        std::size_t same = 0;
        for (std::int64_t i = 0; i < 50; ++i)
        {
            auto const a = scatterers_in_cell(spec, {i, 0});
            auto const b = scatterers_in_cell(other, {i, 0});
            same += !a.empty() && a.size() == b.size() && a[0].center == b[0].center;
        }
        CHECK(same == 0);
    }

    TEST_CASE("segment query equals a brute-force scan")
    {
        auto const spec = FieldSpec::poisson(1.0, 0.01, 1.5, 5);
        double const side = 50 * spec.cell_size;
        auto const all = scatterers_in_box(spec, {0, 0}, {side, side});
        REQUIRE(all.size() > 1000);
        Rng rng(8);
        double const r2 = spec.epsilon * spec.epsilon;
        for (int q = 0; q < 200; ++q)
        {
            Vec2 const p0{rng.uniform(0.1, side - 0.1), rng.uniform(0.1, side - 0.1)};
            Vec2 p1 = p0 + unit_from_angle(rng.uniform(0, 6.3)) * rng.uniform(0, 0.5);
            p1.x = std::clamp(p1.x, 0.05, side - 0.05);
            p1.y = std::clamp(p1.y, 0.05, side - 0.05);
            std::set<Key> expected, got;
            for (auto const& s : all)
            {
                if (segment_distance_sq(s.center, p0, p1) < r2)
                    expected.insert(key_of(s));
            }
            auto const found = scatterers_near_segment(spec, p0, p1);
            for (auto const& s : found)
                got.insert(key_of(s));
            CHECK(got.size() == found.size());  // no duplicates
            CHECK(got == expected);
        }
    }

    TEST_CASE("cursor cache returns the same sets as direct queries")
    {
        auto const spec = FieldSpec::poisson(1.0, 0.01, 1.5, 6);
        FieldCursor cursor(spec);
        Rng rng(2);
        Vec2 p{0, 0};
        for (int q = 0; q < 500; ++q)
        {
            Vec2 const next = p + unit_from_angle(rng.uniform(0, 6.3)) * rng.uniform(0, 0.1);
            std::set<Key> a, b;
            for (auto const& s : cursor.near_segment(p, next))
                a.insert(key_of(s));
            for (auto const& s : scatterers_near_segment(spec, p, next))
                b.insert(key_of(s));
            CHECK(a == b);
            p = next;
        }
    }

    TEST_CASE("overlapping queries report consistent centers")
    {
        auto const spec = FieldSpec::poisson(1.0, 0.01, 1.5, 12);
        auto const box = scatterers_in_box(spec, {0.2, 0.2}, {0.6, 0.6});
        auto const bigger = scatterers_in_box(spec, {0.0, 0.1}, {0.8, 0.7});
        std::set<Key> outer;
        for (auto const& s : bigger)
            outer.insert(key_of(s));
        for (auto const& s : box)
            CHECK(outer.count(key_of(s)) == 1);
        // A center found by a segment query is also found in a box query
        for (auto const& s : scatterers_near_segment(spec, {0.3, 0.3}, {0.5, 0.45}))
            CHECK(outer.count(key_of(s)) == 1);
    }

    TEST_CASE("fixture mode")
    {
        auto const spec = FieldSpec::planted({{0.0, 0.005}, {1.0, 1.0}}, 0.01);
        auto const hit = scatterers_near_segment(spec, {-1, 0}, {1, 0});
        REQUIRE(hit.size() == 1);
        CHECK(hit[0].center == Vec2{0.0, 0.005});
        CHECK(scatterers_near_segment(spec, {-1, -0.5}, {1, -0.5}).empty());
        CHECK(scatterers_in_box(spec, {0.5, 0.5}, {1.5, 1.5}).size() == 1);
    }

    TEST_CASE("empty neighbourhood gives an empty query")
    {
        auto const spec = field_with_cell_mean(0.05, 3);
        auto empty_around = [&](std::int64_t ix) {
            for (std::int64_t dx = -1; dx <= 1; ++dx)
                for (std::int64_t dy = -1; dy <= 1; ++dy)
                    if (scatterer_count_in_cell(spec, {ix + dx, dy}) != 0)
                        return false;
            return true;
        };
        std::int64_t ix = 0;
        while (!empty_around(ix))
            ++ix;
        CHECK(scatterers_in_cell(spec, {ix, 0}).empty());
        double const cs = spec.cell_size;
        CHECK(scatterers_near_segment(spec, {ix * cs + 0.1 * cs, 0.2 * cs},
                                      {ix * cs + 0.9 * cs, 0.8 * cs})
                  .empty());
    }

    TEST_CASE("counts in disjoint cells are uncorrelated")
    {
        auto const spec = field_with_cell_mean(3.0, 21);
        double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
        int const n = 10'000;
        for (int i = 0; i < n; ++i)
        {
            double const a = static_cast<double>(scatterer_count_in_cell(spec, {2 * i, 7}));
            double const b = static_cast<double>(scatterer_count_in_cell(spec, {2 * i + 1, 7}));
            sx += a, sy += b, sxy += a * b, sxx += a * a, syy += b * b;
        }
        double const cov = sxy / n - sx / n * sy / n;
        double const corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
        CHECK(std::fabs(corr) < 3 / std::sqrt(double(n)));
    }

    TEST_CASE("doubling the intensity doubles the mean count")
    {
        auto spec = field_with_cell_mean(1.0, 4);
        auto doubled = spec;
        doubled.mu *= 2;
        RunningStats a, b;
        for (std::int64_t i = 0; i < 50'000; ++i)
        {
            a.add(static_cast<double>(scatterer_count_in_cell(spec, {i, 1})));
            b.add(static_cast<double>(scatterer_count_in_cell(doubled, {i, 2})));
        }
        double const ratio = b.mean() / a.mean();
        double const se = ratio * std::hypot(a.std_error() / a.mean(), b.std_error() / b.mean());
        CHECK(std::fabs(ratio - 2) < 3 * se);
    }

    TEST_CASE("band restriction removes centers outside the slab")
    {
        auto spec = FieldSpec::poisson(1.0, 0.01, 1.5, 30);
        spec.x_band = std::make_pair(0.0, 0.3);
        auto const centers = scatterers_in_box(spec, {-0.2, -0.2}, {0.5, 0.2});
        REQUIRE(!centers.empty());
        for (auto const& s : centers)
        {
            CHECK(s.center.x > 0.0);
            CHECK(s.center.x < 0.3);
        }
    }
}
