#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lorentz/vec2.hpp"

namespace lorentz
{
//! Integer lattice cell index.
struct CellIndex
{
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    friend constexpr bool operator==(CellIndex const&, CellIndex const&)
        = default;
};

//! Stable identity of one scatterer within a field realization.
struct ScattererId
{
    CellIndex cell;
    std::uint32_t index = 0;
    friend constexpr bool operator==(ScattererId const&, ScattererId const&)
        = default;
};

struct Scatterer
{
    Vec2 center;
    ScattererId id;
};

//---------------------------------------------------------------------------//
/*!
 * Description of a Poisson field of scatterer centers on the plane.
 *
 * The effective intensity is mu * epsilon^(-delta) * eta: delta = 1 + 2 alpha
 * and eta = 1 for barriers; delta = 1 with a slowly diverging eta for the
 * slab. Realizations are never stored: the centers of a cell are a pure
 * function of (seed, cell index).
 *
 * A fixture field replaces the Poisson process by an explicit finite list of
 * centers; it is used to build deterministic geometries in tests.
 */
struct FieldSpec
{
    double mu = 1.0;
    double epsilon = 0.01;  //!< scatterer radius
    double delta = 1.5;
    double eta = 1.0;
    std::uint64_t seed = 0;
    double cell_size = 0.04;
    //! Optional band lo < x < hi outside which no centers exist
    std::optional<std::pair<double, double>> x_band;
    //! Fixture mode when set
    std::optional<std::vector<Vec2>> fixture;

    //! Poisson field with the default cell size of 4 radii
    static FieldSpec poisson(double mu,
                             double radius,
                             double delta,
                             std::uint64_t seed,
                             double eta = 1.0);
    static FieldSpec planted(std::vector<Vec2> centers, double radius);

    double radius() const { return epsilon; }
    double effective_intensity() const;
    bool is_fixture() const { return fixture.has_value(); }
    CellIndex cell_of(Vec2 p) const;

    void validate() const;
};

//! Centers in one lattice cell, in generation order.
std::vector<Scatterer>
scatterers_in_cell(FieldSpec const& spec, CellIndex cell);

//! Appends the cell contents to `out` without clearing it.
void append_scatterers_in_cell(FieldSpec const& spec,
                               CellIndex cell,
                               std::vector<Scatterer>& out);

//! Number of centers in a cell (no positions generated).
std::uint64_t scatterer_count_in_cell(FieldSpec const& spec, CellIndex cell);

//! Every center within one radius of the closed segment [p0, p1].
std::vector<Scatterer>
scatterers_near_segment(FieldSpec const& spec, Vec2 p0, Vec2 p1);

//! Every center inside the axis-aligned box [lo, hi].
std::vector<Scatterer>
scatterers_in_box(FieldSpec const& spec, Vec2 lo, Vec2 hi);

//---------------------------------------------------------------------------//
/*!
 * Segment query front-end with a small cache of recently generated cells.
 *
 * A trajectory sweeps cells in order, so consecutive queries revisit most
 * of the previous cells. The cache belongs to one thread.
 */
class FieldCursor
{
  public:
    explicit FieldCursor(FieldSpec const& spec);

    FieldSpec const& spec() const { return *spec_; }

    //! Same contract as scatterers_near_segment; result valid until the
    //! next call.
    std::vector<Scatterer> const& near_segment(Vec2 p0, Vec2 p1);

  private:
    struct Slot
    {
        CellIndex cell;
        std::vector<Scatterer> items;
        bool used = false;
    };

    std::vector<Scatterer> const& cell(CellIndex c);

    FieldSpec const* spec_;
    std::vector<Slot> slots_;
    std::size_t next_slot_ = 0;
    std::vector<Scatterer> result_;
};

}  // namespace lorentz
