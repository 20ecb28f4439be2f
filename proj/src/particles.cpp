#include <mpcd/particles.hpp>
#include <mpcd/rng.hpp>

#include <fmt/format.h>

namespace mpcd
{

void ParticleSet::reserve( std::size_t n )
{
    positions.reserve( n );
    velocities.reserve( n );
    masses.reserve( n );
    ids.reserve( n );
}

void ParticleSet::clear()
{
    positions.clear();
    velocities.clear();
    masses.clear();
    ids.clear();
}

void ParticleSet::push_back( const Particle& p )
{
    positions.push_back( p.position );
    velocities.push_back( p.velocity );
    masses.push_back( p.mass );
    ids.push_back( p.id );
}

Particle ParticleSet::at( std::size_t i ) const
{
    return { positions[i], velocities[i], masses[i], ids[i] };
}

void ParticleSet::append( const ParticleSet& other )
{
    positions.insert( positions.end(), other.positions.begin(),
                      other.positions.end() );
    velocities.insert( velocities.end(), other.velocities.begin(),
                       other.velocities.end() );
    masses.insert( masses.end(), other.masses.begin(), other.masses.end() );
    ids.insert( ids.end(), other.ids.begin(), other.ids.end() );
}

void ParticleSet::compact( std::span<const char> keep )
{
    std::size_t out = 0;
    for ( std::size_t i = 0; i < size(); ++i )
    {
        if ( !keep[i] )
            continue;
        if ( out != i )
        {
            positions[out] = positions[i];
            velocities[out] = velocities[i];
            masses[out] = masses[i];
            ids[out] = ids[i];
        }
        ++out;
    }
    positions.resize( out );
    velocities.resize( out );
    masses.resize( out );
    ids.resize( out );
}

namespace
{
template <class T>
void apply_order( std::vector<T>& seq, std::span<const std::size_t> order,
                  std::vector<T>& scratch )
{
    scratch.resize( order.size() );
    for ( std::size_t k = 0; k < order.size(); ++k )
        scratch[k] = seq[order[k]];
    seq.swap( scratch );
}
} // namespace

void ParticleSet::reorder( std::span<const std::size_t> order )
{
    if ( order.size() != size() )
        throw Error( fmt::format( "reorder: order has {} entries for {} particles",
                                  order.size(), size() ) );
    std::vector<Vec3> vec_scratch;
    apply_order( positions, order, vec_scratch );
    apply_order( velocities, order, vec_scratch );
    std::vector<double> mass_scratch;
    apply_order( masses, order, mass_scratch );
    std::vector<std::uint64_t> id_scratch;
    apply_order( ids, order, id_scratch );
}

void ParticleSet::check_consistent() const
{
    const std::size_t n = positions.size();
    if ( velocities.size() != n || masses.size() != n || ids.size() != n )
        throw ShapeError( fmt::format(
            "ParticleSet: inconsistent lengths (positions {}, velocities {}, "
            "masses {}, ids {})",
            n, velocities.size(), masses.size(), ids.size() ) );
}

ParticleSet init_system( const SimParams& params )
{
    validate( params );
    const std::int64_t n = params.particle_count();
    const double box = params.box_length();
    const double sigma = std::sqrt( params.velocity_variance );

    ParticleSet out;
    out.reserve( static_cast<std::size_t>( n ) );
    for ( std::int64_t i = 0; i < n; ++i )
    {
        KeyedStream stream( { params.seed, 0, RngPurpose::init,
                              static_cast<std::uint64_t>( i ) } );
        Particle p;
        for ( int d = 0; d < 3; ++d )
            p.position[d] = wrap_periodic( stream.uniform() * box, box );
        for ( int d = 0; d < 3; ++d )
            p.velocity[d] = sigma * stream.normal();
        p.mass = params.particle_mass;
        p.id = static_cast<std::uint64_t>( i );
        out.push_back( p );
    }

    // remove the centre-of-mass drift
    Vec3 momentum{};
    double mass = 0.0;
    for ( std::size_t i = 0; i < out.size(); ++i )
    {
        for ( int d = 0; d < 3; ++d )
            momentum[d] += out.masses[i] * out.velocities[i][d];
        mass += out.masses[i];
    }
    if ( mass > 0.0 )
    {
        const Vec3 drift = ( 1.0 / mass ) * momentum;
        for ( auto& v : out.velocities )
            v = v - drift;
    }
    return out;
}

void stream_and_wrap( ParticleSet& particles, double dt, double box )
{
    for ( std::size_t i = 0; i < particles.size(); ++i )
    {
        Vec3& x = particles.positions[i];
        const Vec3& v = particles.velocities[i];
        for ( int d = 0; d < 3; ++d )
            x[d] = wrap_periodic( x[d] + v[d] * dt, box );
    }
}

} // namespace mpcd
