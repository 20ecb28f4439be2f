#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mpcd/exact_sum.hpp>
#include <mpcd/params.hpp>
#include <mpcd/particles.hpp>
#include <mpcd/rng.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

using namespace mpcd;

namespace
{

SimParams small_params( int edge, double density, std::uint64_t seed )
{
    SimParams p;
    p.edge_length = edge;
    p.density = density;
    p.seed = seed;
    return p;
}

Vec3 total_momentum_ld( const ParticleSet& ps )
{
    long double sum[3] = { 0, 0, 0 };
    for ( std::size_t i = 0; i < ps.size(); ++i )
        for ( int d = 0; d < 3; ++d )
            sum[d] += static_cast<long double>( ps.masses[i] ) *
                      ps.velocities[i][d];
    return { double( sum[0] ), double( sum[1] ), double( sum[2] ) };
}

} // namespace

TEST_CASE( "particle count is rounded L^3 times density" )
{
    CHECK( small_params( 32, 10.0, 1 ).particle_count() == 327680 );
    CHECK( small_params( 1, 1.0, 1 ).particle_count() == 1 );
    CHECK( small_params( 3, 0.5, 1 ).particle_count() == 14 ); // 13.5 rounds up
}

TEST_CASE( "init_system on L=32 yields 327680 particles with zero momentum" )
{
    const ParticleSet ps = init_system( small_params( 32, 10.0, 3 ) );
    CHECK( ps.size() == 327680 );
    CHECK( max_abs( total_momentum_ld( ps ) ) < 1e-10 );
}

TEST_CASE( "single particle has its velocity removed by the drift correction" )
{
    const ParticleSet ps = init_system( small_params( 1, 1.0, 9 ) );
    REQUIRE( ps.size() == 1 );
    CHECK( ps.velocities[0] == Vec3{ 0.0, 0.0, 0.0 } );
    CHECK( ps.masses[0] == 1.0 );
}

TEST_CASE( "different seeds give different sets, both momentum free" )
{
    const ParticleSet a = init_system( small_params( 4, 10.0, 1 ) );
    const ParticleSet b = init_system( small_params( 4, 10.0, 2 ) );
    REQUIRE( a.size() == 640 );
    REQUIRE( b.size() == 640 );
    CHECK( a.positions != b.positions );
    CHECK( max_abs( total_momentum_ld( a ) ) < 1e-10 );
    CHECK( max_abs( total_momentum_ld( b ) ) < 1e-10 );
}

TEST_CASE( "init_system positions lie in the box and variance follows config" )
{
    SimParams p = small_params( 8, 10.0, 11 );
    p.velocity_variance = 2.5;
    const ParticleSet ps = init_system( p );
    const double box = p.box_length();
    double sq = 0.0;
    for ( std::size_t i = 0; i < ps.size(); ++i )
    {
        for ( int d = 0; d < 3; ++d )
        {
            CHECK( ps.positions[i][d] >= 0.0 );
            CHECK( ps.positions[i][d] < box );
            sq += ps.velocities[i][d] * ps.velocities[i][d];
        }
        CHECK( ps.masses[i] == 1.0 );
    }
    const double var = sq / ( 3.0 * ps.size() );
    // 15360 samples: relative standard error of the variance is about 1.1%
    CHECK( var == doctest::Approx( 2.5 ).epsilon( 0.06 ) );
}

TEST_CASE( "init_system is a pure function of the parameters" )
{
    const SimParams p = small_params( 4, 5.0, 42 );
    const ParticleSet a = init_system( p );
    const ParticleSet b = init_system( p );
    CHECK( a.positions == b.positions );
    CHECK( a.velocities == b.velocities );
    CHECK( a.ids == b.ids );
}

TEST_CASE( "validate rejects invalid parameters" )
{
    SimParams p = small_params( 8, 10.0, 1 );
    CHECK_NOTHROW( validate( p ) );

    auto rejects = [&]( auto mutate ) {
        SimParams q = p;
        mutate( q );
        CHECK_THROWS_AS( validate( q ), ConfigError );
    };
    rejects( []( SimParams& q ) { q.edge_length = 0; } );
    rejects( []( SimParams& q ) { q.cell_size = 0.0; } );
    rejects( []( SimParams& q ) { q.density = -1.0; } );
    rejects( []( SimParams& q ) { q.dt = 0.0; } );
    rejects( []( SimParams& q ) { q.alpha = 4.0; } );
    rejects( []( SimParams& q ) { q.alpha = -0.1; } );
    rejects( []( SimParams& q ) { q.rank_dims = { 3, 1, 1 }; } );
    rejects( []( SimParams& q ) {
        q.rank_dims = { 2, 1, 1 };
        q.halo_width = 0;
    } );
    rejects( []( SimParams& q ) {
        q.lazy_migration = true;
        q.halo_width = 0;
    } );
    CHECK_THROWS_AS( init_system( SimParams{} ), ConfigError );
}

TEST_CASE( "stream_and_wrap examples" )
{
    ParticleSet ps;
    ps.push_back( { { 0.5, 0.5, 0.5 }, { 1, 0, 0 }, 1.0, 0 } );
    ps.push_back( { { 31.9, 0, 0 }, { 2, 0, 0 }, 1.0, 1 } );
    ps.push_back( { { 3.25, 7.5, 1.0 }, { 0, 0, 0 }, 1.0, 2 } );
    stream_and_wrap( ps, 0.1, 32.0 );
    CHECK( ps.positions[0][0] == doctest::Approx( 0.6 ).epsilon( 1e-15 ) );
    CHECK( ps.positions[0][1] == 0.5 );
    CHECK( ps.positions[1][0] == doctest::Approx( 0.1 ).epsilon( 1e-12 ) );
    CHECK( ps.positions[2] == Vec3{ 3.25, 7.5, 1.0 } );
}

TEST_CASE( "streaming leaves momentum and energy bitwise unchanged" )
{
    ParticleSet ps = init_system( small_params( 4, 10.0, 5 ) );
    const auto velocities = ps.velocities;
    const auto masses = ps.masses;
    stream_and_wrap( ps, 0.37, 4.0 );
    CHECK( ps.velocities == velocities );
    CHECK( ps.masses == masses );
    for ( const Vec3& x : ps.positions )
        for ( double c : x )
        {
            CHECK( c >= 0.0 );
            CHECK( c < 4.0 );
        }
}

TEST_CASE( "wrap_periodic maps into [0, box) and is idempotent" )
{
    const double box = 8.0;
    CHECK( wrap_periodic( -0.5, box ) == 7.5 );
    CHECK( wrap_periodic( 8.0, box ) == 0.0 );
    CHECK( wrap_periodic( 17.5, box ) == 1.5 );
    CHECK( wrap_periodic( -8.0, box ) == 0.0 );
    // -tiny + box rounds to box itself and must land on 0
    const double tiny = wrap_periodic( -1e-18, box );
    CHECK( tiny >= 0.0 );
    CHECK( tiny < box );

    std::mt19937_64 gen( 17 );
    std::uniform_real_distribution<double> dist( -100.0, 100.0 );
    for ( int i = 0; i < 100000; ++i )
    {
        const double x = dist( gen );
        const double w = wrap_periodic( x, box );
        REQUIRE( w >= 0.0 );
        REQUIRE( w < box );
        REQUIRE( wrap_periodic( w, box ) == w );
        REQUIRE( std::fabs( std::remainder( w - x, box ) ) < 1e-12 );
    }
}

TEST_CASE( "ParticleSet compact, reorder and consistency" )
{
    ParticleSet ps;
    for ( int i = 0; i < 5; ++i )
        ps.push_back( { { double( i ), 0, 0 }, { 0, double( i ), 0 }, 1.0 + i,
                        std::uint64_t( 10 + i ) } );
    const std::vector<char> keep{ 1, 0, 1, 0, 1 };
    ps.compact( keep );
    REQUIRE( ps.size() == 3 );
    CHECK( ps.ids == std::vector<std::uint64_t>{ 10, 12, 14 } );
    const std::vector<std::size_t> order{ 2, 0, 1 };
    ps.reorder( order );
    CHECK( ps.ids == std::vector<std::uint64_t>{ 14, 10, 12 } );
    CHECK( ps.masses == std::vector<double>{ 5.0, 1.0, 3.0 } );
    CHECK( ps.at( 0 ).position == Vec3{ 4, 0, 0 } );
    CHECK_NOTHROW( ps.check_consistent() );
    ps.masses.pop_back();
    CHECK_THROWS_AS( ps.check_consistent(), ShapeError );
}

TEST_CASE( "sample_uniform is deterministic per key" )
{
    const RngKey key{ 7, 3, RngPurpose::axis, 99 };
    CHECK( sample_uniform( key, 64 ) == sample_uniform( key, 64 ) );
    RngKey other = key;
    other.cell_id = 100;
    CHECK( sample_uniform( key, 8 ) != sample_uniform( other, 8 ) );

    KeyedStream a( key ), b( key );
    for ( int i = 0; i < 1000; ++i )
        REQUIRE( a.next_u64() == b.next_u64() );
}

TEST_CASE( "keys differing in one field map to distinct streams" )
{
    std::unordered_set<std::uint64_t> seen;
    constexpr std::uint64_t kKeys = 1000000;
    seen.reserve( kKeys * 2 );
    for ( std::uint64_t c = 0; c < kKeys; ++c )
    {
        KeyedStream s( RngKey{ 1, 5, RngPurpose::axis, c } );
        seen.insert( s.next_u64() );
    }
    CHECK( seen.size() == kKeys );

    // purpose, step and seed are separated too
    std::unordered_set<std::uint64_t> mixed;
    for ( std::uint64_t v = 0; v < 1000; ++v )
        for ( auto purpose :
              { RngPurpose::init, RngPurpose::shift, RngPurpose::axis } )
        {
            mixed.insert( hash_key( { v, 0, purpose, 0 } ) );
            mixed.insert( hash_key( { 0, v + 1, purpose, 0 } ) );
        }
    CHECK( mixed.size() == 6000 );
}

TEST_CASE( "uniform samples lie in [0,1) with mean 1/2" )
{
    const auto u = sample_uniform( { 2024, 0, RngPurpose::init, 0 }, 1000000 );
    double sum = 0.0;
    for ( double x : u )
    {
        REQUIRE( x >= 0.0 );
        REQUIRE( x < 1.0 );
        sum += x;
    }
    CHECK( std::fabs( sum / u.size() - 0.5 ) < 0.002 );
}

TEST_CASE( "normal samples have zero mean and unit variance" )
{
    KeyedStream s( { 5, 0, RngPurpose::init, 0 } );
    constexpr int n = 200000;
    double sum = 0.0, sq = 0.0;
    for ( int i = 0; i < n; ++i )
    {
        const double x = s.normal();
        sum += x;
        sq += x * x;
    }
    CHECK( std::fabs( sum / n ) < 0.01 );
    CHECK( std::fabs( sq / n - 1.0 ) < 0.02 );
}

TEST_CASE( "ExactSum is order independent and matches a long double oracle" )
{
    std::mt19937_64 gen( 3 );
    std::normal_distribution<double> dist( 0.0, 10.0 );
    std::vector<double> xs( 20000 );
    for ( double& x : xs )
        x = dist( gen );

    ExactSum forward, backward, shuffled;
    long double oracle = 0.0L;
    for ( double x : xs )
    {
        forward.add( x );
        oracle += x;
    }
    for ( auto it = xs.rbegin(); it != xs.rend(); ++it )
        backward.add( *it );
    std::shuffle( xs.begin(), xs.end(), gen );
    ExactSum left, right;
    for ( std::size_t i = 0; i < xs.size(); ++i )
        ( i % 2 ? left : right ).add( xs[i] );
    shuffled = left + right;

    CHECK( forward == backward );
    CHECK( forward == shuffled );
    CHECK( std::fabs( forward.value() - double( oracle ) ) < 1e-9 );
    CHECK( ExactSum::from_raw( forward.raw() ) == forward );

    ExactSum bad;
    CHECK_THROWS( bad.add( std::nan( "" ) ) );
    CHECK_THROWS( bad.add( 1e300 ) );
}
