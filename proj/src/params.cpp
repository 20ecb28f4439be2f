#include <mpcd/params.hpp>

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace mpcd
{

std::string_view to_string( Scheme scheme )
{
    switch ( scheme )
    {
    case Scheme::migration:
        return "migration";
    case Scheme::halo:
        return "halo";
    }
    return "unknown";
}

Scheme scheme_from_string( std::string_view name )
{
    if ( name == "migration" )
        return Scheme::migration;
    if ( name == "halo" )
        return Scheme::halo;
    throw ConfigError( fmt::format(
        "unknown scheme '{}' (expected 'migration' or 'halo')", name ) );
}

std::int64_t SimParams::particle_count() const
{
    const double cells = static_cast<double>( edge_length ) * edge_length *
                         static_cast<double>( edge_length );
    return std::llround( cells * density );
}

void validate( const SimParams& p )
{
    if ( p.edge_length < 1 )
        throw ConfigError(
            fmt::format( "edge_length must be >= 1, got {}", p.edge_length ) );
    if ( !( p.cell_size > 0.0 ) )
        throw ConfigError(
            fmt::format( "cell_size must be > 0, got {}", p.cell_size ) );
    if ( !( p.density > 0.0 ) )
        throw ConfigError(
            fmt::format( "density must be > 0, got {}", p.density ) );
    if ( !( p.dt > 0.0 ) )
        throw ConfigError( fmt::format( "dt must be > 0, got {}", p.dt ) );
    if ( !( p.alpha >= 0.0 && p.alpha <= std::numbers::pi ) )
        throw ConfigError( fmt::format(
            "alpha must lie in [0, pi] radians, got {}", p.alpha ) );
    if ( p.halo_width < 0 )
        throw ConfigError(
            fmt::format( "halo_width must be >= 0, got {}", p.halo_width ) );
    if ( p.n_steps < 0 )
        throw ConfigError(
            fmt::format( "steps must be >= 0, got {}", p.n_steps ) );
    if ( !( p.velocity_variance >= 0.0 ) )
        throw ConfigError( fmt::format( "velocity_variance must be >= 0, got {}",
                                        p.velocity_variance ) );
    if ( !( p.particle_mass > 0.0 ) )
        throw ConfigError( fmt::format( "particle mass must be > 0, got {}",
                                        p.particle_mass ) );
    for ( int d = 0; d < 3; ++d )
    {
        if ( p.rank_dims[d] < 1 )
            throw ConfigError( fmt::format(
                "rank_dims ({},{},{}) must be positive", p.rank_dims[0],
                p.rank_dims[1], p.rank_dims[2] ) );
        if ( p.edge_length % p.rank_dims[d] != 0 )
            throw ConfigError( fmt::format(
                "rank_dims ({},{},{}) does not divide edge_length {}",
                p.rank_dims[0], p.rank_dims[1], p.rank_dims[2],
                p.edge_length ) );
    }
    if ( p.scheme == Scheme::halo && p.rank_count() > 1 && p.halo_width < 1 )
        throw ConfigError( "halo scheme needs halo_width >= 1" );
    if ( p.lazy_migration && p.halo_width < 1 )
        throw ConfigError( "lazy_migration needs halo_width >= 1" );
}

} // namespace mpcd
