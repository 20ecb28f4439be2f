#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mpcd/decomposition.hpp>
#include <mpcd/engine.hpp>
#include <mpcd/rotation.hpp>

#include <cmath>
#include <map>

using namespace mpcd;

namespace
{

SimParams base_params( int edge, std::uint64_t seed )
{
    SimParams p;
    p.edge_length = edge;
    p.seed = seed;
    return p;
}

using LVec = std::array<long double, 3>;

// Stand-alone collision + streaming step written directly from the model:
// shifted cell by floor, com in long double, Rodrigues rotation in long
// double, then straight-line streaming with periodic wrap.
ParticleSet oracle_step( const ParticleSet& in, const SimParams& p, std::int64_t step )
{
    const int n = p.edge_length;
    const double a = p.cell_size;
    const GridShift shift = sample_grid_shift( step, p.seed, a );
    std::map<std::uint64_t, std::vector<std::size_t>> cells;
    for ( std::size_t i = 0; i < in.size(); ++i )
    {
        std::int64_t c[3];
        for ( int d = 0; d < 3; ++d )
        {
            const auto k = static_cast<std::int64_t>(
                std::floor( ( in.positions[i][d] - shift.offset[d] ) / a ) );
            c[d] = ( ( k % n ) + n ) % n;
        }
        cells[( c[0] * n + c[1] ) * n + c[2]].push_back( i );
    }
    ParticleSet out = in;
    const long double ca = std::cos( static_cast<long double>( p.alpha ) );
    const long double sa = std::sin( static_cast<long double>( p.alpha ) );
    for ( const auto& [id, members] : cells )
    {
        LVec mom{ 0, 0, 0 };
        long double mass = 0;
        for ( std::size_t i : members )
        {
            for ( int d = 0; d < 3; ++d )
                mom[d] += static_cast<long double>( in.masses[i] ) * in.velocities[i][d];
            mass += in.masses[i];
        }
        const LVec com{ mom[0] / mass, mom[1] / mass, mom[2] / mass };
        const Vec3 axis = sample_rotation_axis( step, id, p.seed );
        const LVec k{ axis[0], axis[1], axis[2] };
        for ( std::size_t i : members )
        {
            LVec u;
            for ( int d = 0; d < 3; ++d )
                u[d] = in.velocities[i][d] - com[d];
            const long double par = k[0] * u[0] + k[1] * u[1] + k[2] * u[2];
            const LVec kxu{ k[1] * u[2] - k[2] * u[1], k[2] * u[0] - k[0] * u[2],
                            k[0] * u[1] - k[1] * u[0] };
            for ( int d = 0; d < 3; ++d )
            {
                const long double upar = par * k[d];
                const long double uperp = u[d] - upar;
                out.velocities[i][d] =
                    double( com[d] + upar + uperp * ca + kxu[d] * sa );
            }
        }
    }
    stream_and_wrap( out, p.dt, p.box_length() );
    return out;
}

double trajectory_gap( const ParticleSet& a, const ParticleSet& b, double box )
{
    REQUIRE( a.ids == b.ids );
    double gap = 0.0;
    for ( std::size_t i = 0; i < a.size(); ++i )
        for ( int d = 0; d < 3; ++d )
        {
            const double dx = std::remainder( a.positions[i][d] - b.positions[i][d], box );
            gap = std::max( { gap, std::fabs( dx ),
                              std::fabs( a.velocities[i][d] - b.velocities[i][d] ) } );
        }
    return gap;
}

void check_ownership( const SimState& s )
{
    for ( int r = 0; r < s.grid.rank_count(); ++r )
    {
        const DomainBorders b = s.grid.borders( r );
        for ( const Vec3& x : s.ranks[r].positions )
            REQUIRE( classify_base3( x, b.lower, b.upper ) == kStayCode );
    }
}

} // namespace

TEST_CASE( "serial step agrees with an independent long double step" )
{
    SimParams p = base_params( 6, 41 );
    p.cell_size = 0.75;
    p.dt = 0.23;
    SimState s = initial_state( p );
    for ( int step = 0; step < 10; ++step )
    {
        const ParticleSet before = gather_particles( s );
        const ParticleSet want = oracle_step( before, p, s.step );
        step_serial( s );
        REQUIRE( trajectory_gap( gather_particles( s ), want, p.box_length() ) < 1e-12 );
    }
}

TEST_CASE( "a lone particle moves in a straight line" )
{
    SimParams p = base_params( 4, 1 );
    ParticleSet one;
    one.push_back( { { 0.5, 1.5, 2.5 }, { 0.3, -0.7, 1.1 }, 1.0, 0 } );
    SimState s = make_state( p, one );
    advance( s, Method::serial, 100 );
    const ParticleSet out = gather_particles( s );
    CHECK( out.velocities[0] == Vec3{ 0.3, -0.7, 1.1 } );
    const Vec3 expect = wrap_periodic(
        Vec3{ 0.5 + 100 * 0.1 * 0.3, 1.5 - 100 * 0.1 * 0.7, 2.5 + 100 * 0.1 * 1.1 }, 4.0 );
    for ( int d = 0; d < 3; ++d )
        CHECK( std::fabs( std::remainder( out.positions[0][d] - expect[d], 4.0 ) ) < 1e-12 );
}

TEST_CASE( "serial conservation over 100 steps at L=4" )
{
    SimState s = initial_state( base_params( 4, 7 ) );
    const ConservationReport start = conservation_report( s );
    CHECK( max_abs( start.momentum ) < 1e-10 );
    double worst_e = 0.0, worst_p = 0.0, worst_cell = 0.0;
    advance( s, Method::serial, 100, {}, [&]( const StepDiagnostics& d ) {
        worst_p = std::max( worst_p, max_abs( d.report.momentum - start.momentum ) );
        worst_e = std::max( worst_e, std::fabs( d.report.kinetic_energy - start.kinetic_energy ) /
                                         start.kinetic_energy );
        worst_cell = std::max( worst_cell, d.report.max_cell_drift );
        REQUIRE( d.report.particles == 640 );
        REQUIRE( d.report.mass == 640.0 );
    } );
    CHECK( worst_p < 1e-9 );
    CHECK( worst_e < 1e-9 );
    CHECK( worst_cell < 1e-10 );
    CHECK( s.step == 100 );
}

TEST_CASE( "alpha = 0 leaves every velocity unchanged" )
{
    SimParams p = base_params( 4, 3 );
    p.alpha = 0.0;
    SimState s = initial_state( p );
    const ParticleSet before = gather_particles( s );
    advance( s, Method::serial, 20 );
    CHECK( gather_particles( s ).velocities == before.velocities );
}

TEST_CASE( "empty system reports zeros" )
{
    SimParams p = base_params( 1, 3 );
    p.density = 0.1;
    SimState s = initial_state( p );
    advance( s, Method::serial, 3 );
    const ConservationReport r = conservation_report( s );
    CHECK( r.particles == 0 );
    CHECK( r.mass == 0.0 );
    CHECK( r.kinetic_energy == 0.0 );
    CHECK( r.momentum == Vec3{ 0, 0, 0 } );
}

TEST_CASE( "single-rank parallel schemes equal the serial path bit for bit" )
{
    const SimParams p = base_params( 4, 19 );
    for ( Method m : { Method::halo, Method::migration } )
    {
        const EquivalenceReport r =
            equivalence_check( p, { { 1, 1, 1 }, Method::serial }, { { 1, 1, 1 }, m }, 20 );
        CHECK( r.max_position == 0.0 );
        CHECK( r.max_velocity == 0.0 );
        CHECK( r.position_deviation.size() == 20 );
    }
}

TEST_CASE( "results do not depend on the rank layout" )
{
    SimParams p = base_params( 8, 5 );
    p.halo_width = 2;
    for ( const Index3 dims : { Index3{ 2, 2, 2 }, Index3{ 4, 2, 1 }, Index3{ 1, 1, 2 } } )
        for ( Method m : { Method::halo, Method::migration } )
        {
            const EquivalenceReport r =
                equivalence_check( p, { { 1, 1, 1 }, Method::serial }, { dims, m }, 10 );
            CHECK( r.max_position < 1e-8 );
            CHECK( r.max_velocity < 1e-8 );
        }
}

TEST_CASE( "both schemes produce the same cell com velocities every step" )
{
    SimParams p = base_params( 8, 13 );
    p.rank_dims = { 2, 2, 2 };
    SimState a = initial_state( p );
    SimState b = initial_state( p );
    EngineOptions opt;
    opt.record_cell_com = true;
    std::vector<std::vector<Vec3>> com_a, com_b;
    advance( a, Method::migration, 15, opt,
             [&]( const StepDiagnostics& d ) { com_a.push_back( d.cell_com ); } );
    advance( b, Method::halo, 15, opt,
             [&]( const StepDiagnostics& d ) { com_b.push_back( d.cell_com ); } );
    REQUIRE( com_a.size() == 15 );
    for ( std::size_t s = 0; s < com_a.size(); ++s )
    {
        REQUIRE( com_a[s].size() == 512 );
        for ( std::size_t c = 0; c < 512; ++c )
            REQUIRE( max_abs( com_a[s][c] - com_b[s][c] ) < 1e-10 );
    }
}

TEST_CASE( "particle count and ownership hold at every step boundary" )
{
    SimParams p = base_params( 8, 2 );
    p.rank_dims = { 2, 2, 2 };
    p.dt = 0.4;
    for ( Method m : { Method::halo, Method::migration } )
    {
        SimState s = initial_state( p );
        for ( int k = 0; k < 5; ++k )
        {
            advance( s, m, 1 );
            check_ownership( s );
            CHECK( conservation_report( s ).particles == 5120 );
        }
    }
}

TEST_CASE( "identical runs are bitwise identical" )
{
    SimParams p = base_params( 8, 99 );
    p.rank_dims = { 2, 1, 2 };
    for ( Method m : { Method::halo, Method::migration } )
    {
        SimState a = initial_state( p );
        SimState b = initial_state( p );
        std::vector<StepTraffic> ta, tb;
        advance( a, m, 10, {}, [&]( const StepDiagnostics& d ) { ta.push_back( d.traffic ); } );
        advance( b, m, 10, {}, [&]( const StepDiagnostics& d ) { tb.push_back( d.traffic ); } );
        const ParticleSet ga = gather_particles( a );
        const ParticleSet gb = gather_particles( b );
        CHECK( ga.positions == gb.positions );
        CHECK( ga.velocities == gb.velocities );
        CHECK( ta == tb );
    }
}

TEST_CASE( "lazy migration gives the same trajectories as immediate migration" )
{
    SimParams p = base_params( 8, 61 );
    p.rank_dims = { 2, 2, 1 };
    p.halo_width = 2;
    SimParams lazy = p;
    lazy.lazy_migration = true;
    SimState a = initial_state( p );
    SimState b = initial_state( lazy );
    std::uint64_t crossings_a = 0, crossings_b = 0;
    advance( a, Method::halo, 20, {},
             [&]( const StepDiagnostics& d ) { crossings_a += d.crossings; } );
    advance( b, Method::halo, 20, {},
             [&]( const StepDiagnostics& d ) { crossings_b += d.crossings; } );
    CHECK( trajectory_gap( gather_particles( a ), gather_particles( b ), 8.0 ) == 0.0 );
    CHECK( crossings_b < crossings_a );
}

TEST_CASE( "halo cross-check passes on several layouts" )
{
    SimParams p = base_params( 8, 71 );
    EngineOptions opt;
    opt.halo_cross_check = true;
    for ( const Index3 dims : { Index3{ 2, 2, 2 }, Index3{ 1, 1, 1 }, Index3{ 4, 1, 2 } } )
    {
        p.rank_dims = dims;
        SimState s = initial_state( p );
        CHECK_NOTHROW( advance( s, Method::halo, 5, opt ) );
    }
}

TEST_CASE( "halo traffic is constant; migration traffic follows crossings" )
{
    SimParams p = base_params( 8, 4 );
    p.rank_dims = { 2, 2, 2 };
    std::vector<std::uint64_t> halo;
    SimState s = initial_state( p );
    advance( s, Method::halo, 30, {}, [&]( const StepDiagnostics& d ) {
        halo.push_back( d.traffic[Channel::halo].bytes );
    } );
    for ( auto b : halo )
        CHECK( b == halo.front() );

    auto migration_bytes = [&]( double dt ) {
        SimParams q = p;
        q.dt = dt;
        SimState st = initial_state( q );
        std::uint64_t bytes = 0;
        advance( st, Method::migration, 10, {}, [&]( const StepDiagnostics& d ) {
            bytes += d.traffic[Channel::migration].bytes;
            if ( d.crossings > 0 )
                REQUIRE( d.traffic[Channel::migration].bytes + d.traffic[Channel::gather].bytes > 0 );
        } );
        return bytes;
    };
    const auto slow = migration_bytes( 0.1 );
    const auto fast = migration_bytes( 0.2 );
    CHECK( slow > 0 );
    CHECK( fast > slow );
}

TEST_CASE( "stepping entry points and argument checks" )
{
    SimParams p = base_params( 4, 8 );
    SimState serial = initial_state( p );
    step_serial( serial );
    SimState halo = initial_state( p );
    step_parallel( halo, Scheme::halo );
    CHECK( gather_particles( serial ).velocities == gather_particles( halo ).velocities );
    CHECK( serial.step == 1 );

    p.rank_dims = { 2, 1, 1 };
    SimState multi = initial_state( p );
    CHECK_THROWS_AS( step_serial( multi ), ConfigError );
    CHECK( multi.ranks.size() == 2 );
    CHECK( method_for( Scheme::migration ) == Method::migration );
    CHECK( to_string( Method::halo ) == "halo" );
}
