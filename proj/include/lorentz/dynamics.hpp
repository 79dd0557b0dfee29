#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lorentz/medium.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/vec2.hpp"

namespace lorentz
{
enum class FlowMode
{
    barrier,
    hard_disk
};

enum class EventKind
{
    barrier_traverse,
    total_reflect,
    hard_reflect
};

char const* to_string(EventKind k);

//! Position and velocity; |v| is the configured speed outside all disks and
//! n * speed on a refracted chord.
struct ParticleState
{
    Vec2 x;
    Vec2 v;
};

struct CollisionEvent
{
    double time = 0;  //!< boundary crossing (entrance) time
    ScattererId id;
    Vec2 center;
    double rho = 0;  //!< signed impact parameter in units of the radius
    EventKind kind = EventKind::hard_reflect;
};

struct PathVertex
{
    double time = 0;
    Vec2 x;
};

//! Ordered collision record and polyline of one trajectory.
struct TrajectoryLog
{
    std::vector<CollisionEvent> events;
    std::vector<PathVertex> path;
    //! Chords that crossed a second disk (barrier mode only)
    std::size_t overlaps_encountered = 0;
};

struct PathologyReport
{
    std::size_t overlaps = 0;
    std::size_t recollisions = 0;
    std::size_t interferences = 0;
    std::size_t q_collisions = 0;
};

struct FlowResult
{
    ParticleState state;
    TrajectoryLog log;
};

//---------------------------------------------------------------------------//
/*!
 * Receives the pieces of a trajectory as the event loop produces them.
 *
 * Every straight piece of motion (free flight, chord, exit push) is reported
 * once, in time order.
 */
class FlowObserver
{
  public:
    virtual ~FlowObserver() = default;
    virtual void on_segment(PathVertex const& /*from*/, PathVertex const& /*to*/)
    {
    }
    virtual void on_collision(CollisionEvent const&) {}
    virtual void on_overlap() {}
};

enum class BoundarySide
{
    none,
    left,
    right
};

char const* to_string(BoundarySide s);

struct FlowOptions
{
    FlowMode mode = FlowMode::barrier;
    double duration = 0;
    //! Stop when x1 reaches 0 or slab_length
    std::optional<double> slab_length;
    std::size_t max_events = 1'000'000;
};

struct FlowOutcome
{
    ParticleState state;
    double elapsed = 0;
    BoundarySide side = BoundarySide::none;
    std::size_t collisions = 0;
};

// Exact event-driven flow. Throws NumericalGuardError when more than
// max_events collisions occur before the stopping time.
FlowOutcome propagate(ParticleState const& start,
                      FieldCursor& field,
                      BarrierParams const& params,
                      FlowOptions const& options,
                      FlowObserver* observer = nullptr);

FlowResult advance(ParticleState const& state,
                   FieldSpec const& field,
                   BarrierParams const& params,
                   double t,
                   FlowMode mode);

//! Flow for time -t, implemented as velocity reversal around advance.
FlowResult backward_flow(ParticleState const& state,
                         FieldSpec const& field,
                         BarrierParams const& params,
                         double t,
                         FlowMode mode);

//! Count overlap, recollision and interference events in a log.
PathologyReport classify_pathologies(TrajectoryLog const& log,
                                     FieldSpec const& field,
                                     BarrierParams const& params);

struct BoundaryHit
{
    std::optional<double> tau;  //!< empty if no wall reached before t_max
    BoundarySide side = BoundarySide::none;
    ParticleState state;
};

BoundaryHit first_boundary_hit(ParticleState const& state,
                               FieldSpec const& field,
                               BarrierParams const& params,
                               double slab_length,
                               double t_max,
                               FlowMode mode = FlowMode::hard_disk);

//! True if x lies strictly inside some scatterer disk.
bool inside_any_disk(FieldSpec const& field, Vec2 x);

}  // namespace lorentz
