#include <mpcd/cell_moments.hpp>
#include <mpcd/engine.hpp>
#include <mpcd/exchange.hpp>
#include <mpcd/linked_cells.hpp>
#include <mpcd/rotation.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace mpcd
{

Method method_for( Scheme scheme )
{
    return scheme == Scheme::migration ? Method::migration : Method::halo;
}

std::string_view to_string( Method method )
{
    switch ( method )
    {
    case Method::serial:
        return "serial";
    case Method::migration:
        return "migration";
    case Method::halo:
        return "halo";
    }
    return "unknown";
}

namespace
{

// Per-rank contribution to the step diagnostics.
struct RankTotals
{
    std::array<ExactSum, 3> momentum{};
    ExactSum energy;
    ExactSum mass;
    std::int64_t particles = 0;
    double max_cell_drift = 0.0;
    std::uint64_t crossings = 0;
    std::vector<std::pair<std::uint64_t, Vec3>> com;

    void add_particles( const ParticleSet& p )
    {
        for ( std::size_t i = 0; i < p.size(); ++i )
        {
            const Vec3& v = p.velocities[i];
            const double m = p.masses[i];
            for ( int d = 0; d < 3; ++d )
                momentum[d].add( m * v[d] );
            energy.add( 0.5 * m * dot( v, v ) );
            mass.add( m );
        }
        particles += static_cast<std::int64_t>( p.size() );
    }
};

// Components 0-2: sum of m v. Component 3: sum of m |v|, the scale the
// momentum drift of a cell is measured against.
void accumulate_momentum_scale( const LinkedCellList& list,
                                std::span<const Vec3> velocities,
                                std::span<const double> masses,
                                CellMomentField& out )
{
    out.reset( list.dims() );
    for ( std::size_t b = 0; b < list.total_bins(); ++b )
    {
        CellMoment& cell = out[b];
        for ( std::size_t i : list.bin_particles( b ) )
        {
            const Vec3& v = velocities[i];
            for ( int d = 0; d < 3; ++d )
                cell.sums[d].add( masses[i] * v[d] );
            cell.sums[3].add( masses[i] * norm( v ) );
        }
    }
}

double cell_drift( const CellMoment& before, const CellMoment& after )
{
    const double scale = after.sums[3].value();
    if ( !( scale > 0.0 ) )
        return 0.0;
    return max_abs( after.momentum() - before.momentum() ) / scale;
}

void fill_axes( RotationPlan& plan, const LinkedCellList& list, double alpha,
                std::uint64_t step, std::uint64_t seed,
                const std::function<std::uint64_t( std::size_t )>& global_id )
{
    plan.alpha = alpha;
    plan.axes.assign( list.total_bins(), Vec3{ 0.0, 0.0, 0.0 } );
    for ( std::size_t b = 0; b < list.total_bins(); ++b )
        if ( list.bin_size( b ) > 0 )
            plan.axes[b] = sample_rotation_axis( step, global_id( b ), seed );
}

//---------------------------------------------------------------------------//
// Reference path over the full L^3 lattice.
//---------------------------------------------------------------------------//
class SerialStepper
{
  public:
    void step( SimState& state, const EngineOptions& options,
               RankTotals& totals )
    {
        const SimParams& p = state.params;
        const int n = p.edge_length;
        const auto step = static_cast<std::uint64_t>( state.step );
        ParticleSet& particles = state.ranks[0];

        state.shift = sample_grid_shift( step, p.seed, p.cell_size );

        bins_.resize( particles.size() );
        for ( std::size_t i = 0; i < particles.size(); ++i )
            bins_[i] = global_cell_id(
                wrap_cell( shifted_cell( particles.positions[i], state.shift,
                                         p.cell_size ),
                           n ),
                n );
        list_.build( bins_, { n, n, n } );
        list_.permute( particles );

        accumulate_cell_moments( list_, particles.velocities, particles.masses,
                                 moments_ );
        com_ = finalize_com( moments_ );
        fill_axes( plan_, list_, p.alpha, step, p.seed,
                   []( std::size_t b ) { return std::uint64_t{ b }; } );
        rotate_cell_velocities( list_, com_, plan_, particles.velocities );

        if ( options.track_cell_drift )
        {
            accumulate_momentum_scale( list_, particles.velocities,
                                       particles.masses, after_ );
            for ( std::size_t b = 0; b < list_.total_bins(); ++b )
                if ( list_.bin_size( b ) > 0 )
                    totals.max_cell_drift = std::max(
                        totals.max_cell_drift, cell_drift( moments_[b], after_[b] ) );
        }
        if ( options.record_cell_com )
            for ( std::size_t b = 0; b < list_.total_bins(); ++b )
                if ( list_.bin_size( b ) > 0 )
                    totals.com.emplace_back( b, com_[b] );

        stream_and_wrap( particles, p.dt, p.box_length() );
        totals.add_particles( particles );
    }

  private:
    std::vector<std::size_t> bins_;
    LinkedCellList list_;
    CellMomentField moments_;
    CellMomentField after_;
    std::vector<Vec3> com_;
    RotationPlan plan_;
};

//---------------------------------------------------------------------------//
// One rank of a parallel run.
//---------------------------------------------------------------------------//
class RankWorker
{
  public:
    RankWorker( const SimState& state, int rank, Method method )
        : params_( state.params )
        , grid_( state.grid )
        , rank_( rank )
        , method_( method )
    {
        if ( method_ == Method::halo )
        {
            plan_ = HaloPlan( grid_, rank_, params_.halo_width );
            window_ = plan_.local_grid();
        }
        else
        {
            window_ = grid_.local_grid( rank_, 0 );
        }
    }

    void step( ParticleSet& owned, std::int64_t step_index, Comm& comm,
               const EngineOptions& options, RankTotals& totals,
               GridShift& shift_out )
    {
        const auto step = static_cast<std::uint64_t>( step_index );
        const GridShift shift =
            sample_grid_shift( step, params_.seed, params_.cell_size );
        shift_out = shift;

        if ( method_ == Method::migration )
        {
            // gather whole particles on the owner of their collision cell
            const auto tags = tag_by_cell( owned.positions, shift, grid_, rank_ );
            auto moved = migrate_particles( std::move( owned ), tags, grid_, comm,
                                             Channel::gather );
            owned = std::move( moved.particles );
            totals.crossings += moved.sent;
        }

        bin( owned, shift );
        accumulate_cell_moments( list_, owned.velocities, owned.masses, field_ );
        if ( method_ == Method::halo )
            halo_reduce_scatter_moments( field_, plan_, comm, Channel::halo );

        com_ = finalize_com( field_ );
        const int n = params_.edge_length;
        fill_axes( plan_axes_, list_, params_.alpha, step, params_.seed,
                   [&]( std::size_t b ) {
                       return global_cell_id( window_.global_cell( b ), n );
                   } );
        rotate_cell_velocities( list_, com_, plan_axes_, owned.velocities );

        if ( options.record_cell_com )
            for ( std::size_t b = 0; b < field_.size(); ++b )
                if ( window_.is_owned( b ) && field_[b].mass() > 0.0 )
                    totals.com.emplace_back(
                        global_cell_id( window_.global_cell( b ), n ), com_[b] );

        if ( options.track_cell_drift )
            measure_drift( owned, comm, totals );

        if ( options.halo_cross_check && method_ == Method::halo )
            cross_check( shift, comm );

        stream_and_wrap( owned, params_.dt, params_.box_length() );

        const double margin =
            ( method_ == Method::halo && params_.lazy_migration )
                ? ( params_.halo_width - 0.5 ) * params_.cell_size
                : 0.0;
        const auto tags = tag_by_position( owned.positions, grid_, rank_, margin );
        auto moved = migrate_particles( std::move( owned ), tags, grid_, comm );
        owned = std::move( moved.particles );
        totals.crossings += moved.sent;

        totals.add_particles( owned );
    }

  private:
    void bin( ParticleSet& owned, const GridShift& shift )
    {
        bins_.resize( owned.size() );
        for ( std::size_t i = 0; i < owned.size(); ++i )
        {
            const CellCoord c =
                shifted_cell( owned.positions[i], shift, params_.cell_size );
            if ( !window_.local_index( c, bins_[i] ) )
                throw GridBoundsError(
                    i, -1,
                    fmt::format( "rank {}: particle {} in cell ({},{},{}) lies "
                                 "outside the local collision grid",
                                 rank_, owned.ids[i], c[0], c[1], c[2] ) );
        }
        list_.build( bins_, window_.dims );
        list_.permute( owned );
    }

    void measure_drift( const ParticleSet& owned, Comm& comm,
                        RankTotals& totals )
    {
        accumulate_momentum_scale( list_, owned.velocities, owned.masses, after_ );
        if ( method_ == Method::halo )
            halo_reduce_scatter_moments( after_, plan_, comm,
                                         Channel::diagnostic );
        for ( std::size_t b = 0; b < field_.size(); ++b )
            if ( window_.is_owned( b ) && field_[b].mass() > 0.0 )
                totals.max_cell_drift = std::max(
                    totals.max_cell_drift, cell_drift( field_[b], after_[b] ) );
    }

    // Direct moments of the owned cells from owned particles plus halo
    // copies must equal the reduced moments exactly.
    void cross_check( const GridShift& shift, Comm& comm )
    {
        if ( params_.lazy_migration )
            throw ConfigError( "halo cross-check requires immediate migration" );

        // Rotation has already changed the owned velocities; use the
        // snapshot the moments were built from.
        const HaloCopies copies =
            halo_exchange_particles( pre_rotation_, grid_, params_.halo_width,
                                     comm );
        CellMomentField direct;
        direct.reset( window_.dims );
        const double a = params_.cell_size;
        const std::int64_t n = params_.edge_length;
        auto add = [&]( const Vec3& x, const Vec3& v, double m,
                        const Index3& image ) {
            // The image fixes the unwrapped cell; no further folding.
            const CellCoord c = shifted_cell( x, shift, a );
            Index3 j;
            for ( int d = 0; d < 3; ++d )
            {
                const std::int64_t k = c[d] + image[d] * n - window_.base[d];
                if ( k < 0 || k >= window_.dims[d] )
                    return;
                j[d] = static_cast<int>( k );
            }
            const std::size_t b = window_.flat( j );
            if ( window_.is_owned( b ) )
                direct[b].add( v, m );
        };
        for ( std::size_t i = 0; i < pre_rotation_.size(); ++i )
            add( pre_rotation_.positions[i], pre_rotation_.velocities[i],
                 pre_rotation_.masses[i], { 0, 0, 0 } );
        for ( std::size_t i = 0; i < copies.particles.size(); ++i )
            add( copies.particles.positions[i], copies.particles.velocities[i],
                 copies.particles.masses[i], copies.images[i] );

        for ( std::size_t b = 0; b < field_.size(); ++b )
            if ( window_.is_owned( b ) && !( direct[b] == field_[b] ) )
                throw Error( fmt::format(
                    "rank {}: halo cross-check failed for local cell {}: direct "
                    "mass {} vs reduced {}",
                    rank_, b, direct[b].mass(), field_[b].mass() ) );
    }

  public:
    // Snapshot taken before rotation when the cross-check is enabled.
    ParticleSet pre_rotation_;

  private:
    SimParams params_;
    const DomainGrid& grid_;
    int rank_;
    Method method_;
    HaloPlan plan_;
    LocalCellGrid window_;

    std::vector<std::size_t> bins_;
    LinkedCellList list_;
    CellMomentField field_;
    CellMomentField after_;
    std::vector<Vec3> com_;
    RotationPlan plan_axes_;
};

ConservationReport combine( const std::vector<RankTotals>& totals )
{
    std::array<ExactSum, 3> momentum{};
    ExactSum energy, mass;
    ConservationReport report;
    for ( const RankTotals& t : totals )
    {
        for ( int d = 0; d < 3; ++d )
            momentum[d] += t.momentum[d];
        energy += t.energy;
        mass += t.mass;
        report.particles += t.particles;
        report.max_cell_drift = std::max( report.max_cell_drift, t.max_cell_drift );
    }
    report.momentum = { momentum[0].value(), momentum[1].value(),
                        momentum[2].value() };
    report.kinetic_energy = energy.value();
    report.mass = mass.value();
    return report;
}

StepDiagnostics make_diagnostics( const SimState& state,
                                  const std::vector<RankTotals>& totals,
                                  const EngineOptions& options )
{
    StepDiagnostics diag;
    diag.step = state.step;
    diag.report = combine( totals );
    for ( const RankTotals& t : totals )
        diag.crossings += t.crossings;
    if ( options.record_cell_com )
    {
        const std::size_t n = state.params.edge_length;
        diag.cell_com.assign( n * n * n, Vec3{ 0.0, 0.0, 0.0 } );
        for ( const RankTotals& t : totals )
            for ( const auto& [id, com] : t.com )
                diag.cell_com[id] = com;
    }
    return diag;
}

} // namespace

SimState make_state( const SimParams& params, const ParticleSet& global )
{
    validate( params );
    global.check_consistent();
    SimState state;
    state.params = params;
    state.grid = DomainGrid( params.edge_length, params.cell_size,
                             params.rank_dims );
    state.ranks.resize( state.grid.rank_count() );
    const double box = params.box_length();
    for ( std::size_t i = 0; i < global.size(); ++i )
    {
        Particle p = global.at( i );
        p.position = wrap_periodic( p.position, box );
        state.ranks[state.grid.owner_of_position( p.position )].push_back( p );
    }
    return state;
}

SimState initial_state( const SimParams& params )
{
    return make_state( params, init_system( params ) );
}

void advance( SimState& state, Method method, std::int64_t steps,
              const EngineOptions& options, const StepObserver& observer )
{
    validate( state.params );
    const int ranks = state.grid.rank_count();
    if ( static_cast<int>( state.ranks.size() ) != ranks )
        throw ShapeError( fmt::format( "state holds {} particle sets for {} ranks",
                                       state.ranks.size(), ranks ) );
    if ( method == Method::serial && ranks != 1 )
        throw ConfigError( fmt::format(
            "serial stepping needs a single rank, state has {}", ranks ) );
    if ( method == Method::halo && ranks > 1 && state.params.halo_width < 1 )
        throw ConfigError( "halo scheme needs halo_width >= 1" );
    if ( options.halo_cross_check && state.params.lazy_migration )
        throw ConfigError( "halo cross-check requires immediate migration" );
    if ( steps <= 0 )
        return;

    if ( method == Method::serial )
    {
        SerialStepper stepper;
        for ( std::int64_t s = 0; s < steps; ++s )
        {
            std::vector<RankTotals> totals( 1 );
            stepper.step( state, options, totals[0] );
            ++state.step;
            state.max_cell_drift =
                std::max( state.max_cell_drift, totals[0].max_cell_drift );
            if ( observer )
                observer( make_diagnostics( state, totals, options ) );
        }
        return;
    }

    Transport transport( ranks );
    std::vector<RankTotals> totals( ranks );
    const std::int64_t first_step = state.step;

    run_ranks( transport, [&]( Comm& comm ) {
        const int rank = comm.rank();
        RankWorker worker( state, rank, method );
        ParticleSet& owned = state.ranks[rank];
        for ( std::int64_t s = 0; s < steps; ++s )
        {
            totals[rank] = RankTotals{};
            GridShift shift;
            if ( options.halo_cross_check )
                worker.pre_rotation_ = owned;
            worker.step( owned, first_step + s, comm, options, totals[rank],
                         shift );
            comm.sync();
            if ( rank == 0 )
            {
                state.step = first_step + s + 1;
                state.shift = shift;
                StepDiagnostics diag = make_diagnostics( state, totals, options );
                diag.traffic = transport.end_step();
                state.max_cell_drift =
                    std::max( state.max_cell_drift, diag.report.max_cell_drift );
                if ( observer )
                    observer( diag );
            }
            comm.sync();
        }
    } );

    if ( transport.pending() != 0 )
        throw TransportError( fmt::format( "{} messages left undelivered",
                                           transport.pending() ) );
}

void step_serial( SimState& state )
{
    advance( state, Method::serial, 1 );
}

void step_parallel( SimState& state, Scheme scheme )
{
    advance( state, method_for( scheme ), 1 );
}

ConservationReport conservation_report( const SimState& state )
{
    std::vector<RankTotals> totals( state.ranks.size() );
    for ( std::size_t r = 0; r < state.ranks.size(); ++r )
        totals[r].add_particles( state.ranks[r] );
    ConservationReport report = combine( totals );
    report.max_cell_drift = state.max_cell_drift;
    return report;
}

ParticleSet gather_particles( const SimState& state )
{
    ParticleSet all;
    for ( const ParticleSet& p : state.ranks )
        all.append( p );
    std::vector<std::size_t> order( all.size() );
    std::iota( order.begin(), order.end(), std::size_t{ 0 } );
    std::sort( order.begin(), order.end(), [&]( std::size_t a, std::size_t b ) {
        return all.ids[a] < all.ids[b];
    } );
    all.reorder( order );
    return all;
}

EquivalenceReport equivalence_check( const SimParams& params,
                                     const RunSetting& a, const RunSetting& b,
                                     std::int64_t n_steps )
{
    const ParticleSet global = init_system( params );
    SimParams pa = params;
    pa.rank_dims = a.rank_dims;
    SimParams pb = params;
    pb.rank_dims = b.rank_dims;
    SimState sa = make_state( pa, global );
    SimState sb = make_state( pb, global );

    EngineOptions options;
    options.track_cell_drift = false;
    const double box = params.box_length();

    EquivalenceReport report;
    for ( std::int64_t s = 0; s < n_steps; ++s )
    {
        advance( sa, a.method, 1, options );
        advance( sb, b.method, 1, options );
        const ParticleSet ga = gather_particles( sa );
        const ParticleSet gb = gather_particles( sb );
        if ( ga.size() != gb.size() || ga.ids != gb.ids )
            throw Error( fmt::format(
                "equivalence check: particle sets differ after step {}", s ) );
        double dx = 0.0, dv = 0.0;
        for ( std::size_t i = 0; i < ga.size(); ++i )
            for ( int d = 0; d < 3; ++d )
            {
                double diff = ga.positions[i][d] - gb.positions[i][d];
                diff -= box * std::nearbyint( diff / box );
                dx = std::max( dx, std::fabs( diff ) );
                dv = std::max( dv, std::fabs( ga.velocities[i][d] -
                                              gb.velocities[i][d] ) );
            }
        report.position_deviation.push_back( dx );
        report.velocity_deviation.push_back( dv );
        report.max_position = std::max( report.max_position, dx );
        report.max_velocity = std::max( report.max_velocity, dv );
    }
    return report;
}

} // namespace mpcd
