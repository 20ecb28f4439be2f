#pragma once

#include <mpcd/decomposition.hpp>
#include <mpcd/grid_shift.hpp>
#include <mpcd/params.hpp>
#include <mpcd/particles.hpp>
#include <mpcd/transport.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace mpcd
{

// How a step is executed: the single-rank reference path, or one of the
// two parallel communication schemes.
enum class Method
{
    serial,
    migration,
    halo
};

Method method_for( Scheme scheme );
std::string_view to_string( Method method );

struct ConservationReport
{
    Vec3 momentum{};
    double kinetic_energy = 0.0;
    double mass = 0.0;
    std::int64_t particles = 0;
    // Largest |P_after - P_before|_inf / sum(m |v|) over the cells of the
    // last collision; zero when not tracked.
    double max_cell_drift = 0.0;
};

struct EngineOptions
{
    // Collect the com velocity of every occupied cell each step.
    bool record_cell_com = false;
    // Re-accumulate moments after rotation to measure per-cell drift.
    bool track_cell_drift = true;
    // Halo scheme: check reduced moments against a direct sum over owned
    // particles plus halo copies. Throws Error on mismatch.
    bool halo_cross_check = false;
};

struct StepDiagnostics
{
    std::int64_t step = 0; // index of the step just completed
    ConservationReport report;
    StepTraffic traffic;
    std::uint64_t crossings = 0; // particles sent between ranks
    std::vector<Vec3> cell_com; // L^3 entries when recorded
};

using StepObserver = std::function<void( const StepDiagnostics& )>;

struct SimState
{
    SimParams params;
    DomainGrid grid{ 1, 1.0, { 1, 1, 1 } };
    std::int64_t step = 0;
    GridShift shift;
    std::vector<ParticleSet> ranks;
    // Largest per-cell drift seen so far, when tracked.
    double max_cell_drift = 0.0;
};

// Distribute `global` over params.rank_dims by position.
SimState make_state( const SimParams& params, const ParticleSet& global );
SimState initial_state( const SimParams& params );

// Collide and stream one step on a single-rank state. Reference path:
// shift, bin over the L^3 wrapped cells, accumulate, com, rotate, stream.
void step_serial( SimState& state );

// One step of a parallel scheme; same physics as step_serial.
void step_parallel( SimState& state, Scheme scheme );

// Run `steps` steps, spawning one worker per rank for the whole run.
void advance( SimState& state, Method method, std::int64_t steps,
              const EngineOptions& options = {},
              const StepObserver& observer = {} );

// Totals over owned particles.
ConservationReport conservation_report( const SimState& state );

// All particles of all ranks, ordered by id.
ParticleSet gather_particles( const SimState& state );

struct RunSetting
{
    Index3 rank_dims{ 1, 1, 1 };
    Method method = Method::serial;
};

struct EquivalenceReport
{
    std::vector<double> position_deviation; // per step, max over particles
    std::vector<double> velocity_deviation;
    double max_position = 0.0;
    double max_velocity = 0.0;
};

// Run two settings side by side from the same initial state and record
// the largest per-particle deviation after each step. Positions are
// compared by minimum image.
EquivalenceReport equivalence_check( const SimParams& params,
                                     const RunSetting& a,
                                     const RunSetting& b,
                                     std::int64_t n_steps );

} // namespace mpcd
