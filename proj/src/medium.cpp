#include "lorentz/medium.hpp"

#include <algorithm>
#include <cmath>

#include "lorentz/errors.hpp"
#include "lorentz/rng.hpp"

namespace lorentz
{
namespace
{
constexpr std::size_t cache_slots = 24;

Rng cell_rng(FieldSpec const& spec, CellIndex cell)
{
    std::uint64_t key = derive_key(mix64(spec.seed),
                                   static_cast<std::uint64_t>(cell.ix));
    key = derive_key(key, static_cast<std::uint64_t>(cell.iy));
    return Rng{key};
}

bool in_band(FieldSpec const& spec, Vec2 p)
{
    return !spec.x_band
           || (p.x > spec.x_band->first && p.x < spec.x_band->second);
}

template<class F>
void for_each_candidate_cell(FieldSpec const& spec, Vec2 p0, Vec2 p1, F&& f)
{
    double const r = spec.radius();
    double const cs = spec.cell_size;
    auto lo = [&](double a, double b) {
        return static_cast<std::int64_t>(std::floor((std::min(a, b) - r) / cs));
    };
    auto hi = [&](double a, double b) {
        return static_cast<std::int64_t>(std::floor((std::max(a, b) + r) / cs));
    };
    std::int64_t const x0 = lo(p0.x, p1.x), x1 = hi(p0.x, p1.x);
    std::int64_t const y0 = lo(p0.y, p1.y), y1 = hi(p0.y, p1.y);
    // Cells whose center is farther than this from the segment cannot hold
    // a center within r of it
    double const reach = r + cs * std::sqrt(0.5);
    bool const prune = (x1 - x0 + 1) * (y1 - y0 + 1) > 9;
    for (std::int64_t ix = x0; ix <= x1; ++ix)
    {
        for (std::int64_t iy = y0; iy <= y1; ++iy)
        {
            if (prune)
            {
                Vec2 const mid{(ix + 0.5) * cs, (iy + 0.5) * cs};
                if (segment_distance_sq(mid, p0, p1) > reach * reach)
                    continue;
            }
            f(CellIndex{ix, iy});
        }
    }
}

void append_fixture_near_segment(FieldSpec const& spec,
                                 Vec2 p0,
                                 Vec2 p1,
                                 std::vector<Scatterer>& out)
{
    double const r2 = spec.radius() * spec.radius();
    auto const& centers = *spec.fixture;
    for (std::size_t k = 0; k < centers.size(); ++k)
    {
        if (segment_distance_sq(centers[k], p0, p1) < r2)
            out.push_back({centers[k], {{}, static_cast<std::uint32_t>(k)}});
    }
}
}  // namespace

FieldSpec FieldSpec::poisson(
    double mu, double radius, double delta, std::uint64_t seed, double eta)
{
    FieldSpec spec;
    spec.mu = mu;
    spec.epsilon = radius;
    spec.delta = delta;
    spec.eta = eta;
    spec.seed = seed;
    spec.cell_size = 4 * radius;
    return spec;
}

FieldSpec FieldSpec::planted(std::vector<Vec2> centers, double radius)
{
    FieldSpec spec;
    spec.epsilon = radius;
    spec.cell_size = 4 * radius;
    spec.fixture = std::move(centers);
    return spec;
}

double FieldSpec::effective_intensity() const
{
    return mu * std::pow(epsilon, -delta) * eta;
}

CellIndex FieldSpec::cell_of(Vec2 p) const
{
    return {static_cast<std::int64_t>(std::floor(p.x / cell_size)),
            static_cast<std::int64_t>(std::floor(p.y / cell_size))};
}

void FieldSpec::validate() const
{
    if (!(epsilon > 0))
        throw DomainError("scatterer radius must be positive");
    if (!(cell_size >= 2 * epsilon))
        throw DomainError("cell size must be at least one diameter");
    if (!fixture && !(mu > 0 && eta > 0))
        throw DomainError("intensity must be positive");
}

std::uint64_t scatterer_count_in_cell(FieldSpec const& spec, CellIndex cell)
{
    if (spec.fixture)
    {
        std::uint64_t count = 0;
        for (auto const& c : *spec.fixture)
            count += spec.cell_of(c) == cell;
        return count;
    }
    Rng rng = cell_rng(spec, cell);
    double const area = spec.cell_size * spec.cell_size;
    return rng.poisson(spec.effective_intensity() * area);
}

void append_scatterers_in_cell(FieldSpec const& spec,
                               CellIndex cell,
                               std::vector<Scatterer>& out)
{
    if (spec.fixture)
    {
        auto const& centers = *spec.fixture;
        for (std::size_t k = 0; k < centers.size(); ++k)
        {
            if (spec.cell_of(centers[k]) == cell)
                out.push_back(
                    {centers[k], {{}, static_cast<std::uint32_t>(k)}});
        }
        return;
    }
    Rng rng = cell_rng(spec, cell);
    double const cs = spec.cell_size;
    std::uint64_t const count
        = rng.poisson(spec.effective_intensity() * cs * cs);
    for (std::uint64_t k = 0; k < count; ++k)
    {
        Vec2 const c{(static_cast<double>(cell.ix) + rng.uniform()) * cs,
                     (static_cast<double>(cell.iy) + rng.uniform()) * cs};
        if (in_band(spec, c))
            out.push_back({c, {cell, static_cast<std::uint32_t>(k)}});
    }
}

std::vector<Scatterer> scatterers_in_cell(FieldSpec const& spec, CellIndex cell)
{
    std::vector<Scatterer> out;
    append_scatterers_in_cell(spec, cell, out);
    return out;
}

std::vector<Scatterer>
scatterers_near_segment(FieldSpec const& spec, Vec2 p0, Vec2 p1)
{
    std::vector<Scatterer> out;
    if (spec.fixture)
    {
        append_fixture_near_segment(spec, p0, p1, out);
        return out;
    }
    double const r2 = spec.radius() * spec.radius();
    std::vector<Scatterer> buffer;
    for_each_candidate_cell(spec, p0, p1, [&](CellIndex c) {
        buffer.clear();
        append_scatterers_in_cell(spec, c, buffer);
        for (auto const& s : buffer)
        {
            if (segment_distance_sq(s.center, p0, p1) < r2)
                out.push_back(s);
        }
    });
    return out;
}

std::vector<Scatterer>
scatterers_in_box(FieldSpec const& spec, Vec2 lo, Vec2 hi)
{
    std::vector<Scatterer> out;
    auto inside = [&](Vec2 c) {
        return c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y;
    };
    if (spec.fixture)
    {
        auto const& centers = *spec.fixture;
        for (std::size_t k = 0; k < centers.size(); ++k)
        {
            if (inside(centers[k]))
                out.push_back(
                    {centers[k], {{}, static_cast<std::uint32_t>(k)}});
        }
        return out;
    }
    CellIndex const a = spec.cell_of(lo);
    CellIndex const b = spec.cell_of(hi);
    std::vector<Scatterer> buffer;
    for (std::int64_t ix = a.ix; ix <= b.ix; ++ix)
    {
        for (std::int64_t iy = a.iy; iy <= b.iy; ++iy)
        {
            buffer.clear();
            append_scatterers_in_cell(spec, {ix, iy}, buffer);
            for (auto const& s : buffer)
            {
                if (inside(s.center))
                    out.push_back(s);
            }
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
FieldCursor::FieldCursor(FieldSpec const& spec)
    : spec_(&spec), slots_(cache_slots)
{
}

std::vector<Scatterer> const& FieldCursor::cell(CellIndex c)
{
    for (auto& slot : slots_)
    {
        if (slot.used && slot.cell == c)
            return slot.items;
    }
    Slot& slot = slots_[next_slot_];
    next_slot_ = (next_slot_ + 1) % slots_.size();
    slot.cell = c;
    slot.used = true;
    slot.items.clear();
    append_scatterers_in_cell(*spec_, c, slot.items);
    return slot.items;
}

std::vector<Scatterer> const& FieldCursor::near_segment(Vec2 p0, Vec2 p1)
{
    result_.clear();
    if (spec_->fixture)
    {
        append_fixture_near_segment(*spec_, p0, p1, result_);
        return result_;
    }
    double const r2 = spec_->radius() * spec_->radius();
    for_each_candidate_cell(*spec_, p0, p1, [&](CellIndex c) {
        for (auto const& s : cell(c))
        {
            if (segment_distance_sq(s.center, p0, p1) < r2)
                result_.push_back(s);
        }
    });
    return result_;
}

}  // namespace lorentz
