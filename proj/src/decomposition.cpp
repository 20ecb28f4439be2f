#include <mpcd/decomposition.hpp>
#include <mpcd/particles.hpp>

#include <fmt/format.h>

#include <algorithm>

namespace mpcd
{

DomainGrid::DomainGrid( int edge_length, double cell_size,
                        const Index3& rank_dims )
    : edge_length_( edge_length )
    , cell_size_( cell_size )
    , rank_dims_( rank_dims )
    , rank_count_( rank_dims[0] * rank_dims[1] * rank_dims[2] )
{
    if ( edge_length < 1 )
        throw ConfigError(
            fmt::format( "edge_length must be >= 1, got {}", edge_length ) );
    if ( !( cell_size > 0.0 ) )
        throw ConfigError(
            fmt::format( "cell_size must be > 0, got {}", cell_size ) );
    for ( int d = 0; d < 3; ++d )
        if ( rank_dims[d] < 1 || edge_length % rank_dims[d] != 0 )
            throw ConfigError( fmt::format(
                "rank_dims ({},{},{}) does not divide edge_length {}",
                rank_dims[0], rank_dims[1], rank_dims[2], edge_length ) );

    neighbors_.resize( rank_count_ );
    for ( int r = 0; r < rank_count_; ++r )
    {
        const Index3 c = rank_coords( r );
        for ( int code = 0; code < 27; ++code )
        {
            const Index3 digit = base3_digits( code );
            neighbors_[r][code] =
                rank_at( { c[0] + digit[0] - 1, c[1] + digit[1] - 1,
                           c[2] + digit[2] - 1 } );
        }
    }
}

Index3 DomainGrid::rank_coords( int rank ) const
{
    const int cz = rank % rank_dims_[2];
    const int rest = rank / rank_dims_[2];
    return { rest / rank_dims_[1], rest % rank_dims_[1], cz };
}

int DomainGrid::rank_at( const Index3& coords ) const
{
    Index3 c;
    for ( int d = 0; d < 3; ++d )
        c[d] = static_cast<int>( wrap_index( coords[d], rank_dims_[d] ) );
    return ( c[0] * rank_dims_[1] + c[1] ) * rank_dims_[2] + c[2];
}

Index3 DomainGrid::domain_cells() const
{
    return { edge_length_ / rank_dims_[0], edge_length_ / rank_dims_[1],
             edge_length_ / rank_dims_[2] };
}

CellRange DomainGrid::cells( int rank ) const
{
    const Index3 c = rank_coords( rank );
    const Index3 n = domain_cells();
    CellRange range;
    for ( int d = 0; d < 3; ++d )
    {
        range.lo[d] = c[d] * n[d];
        range.hi[d] = ( c[d] + 1 ) * n[d];
    }
    return range;
}

DomainBorders DomainGrid::borders( int rank ) const
{
    const CellRange range = cells( rank );
    DomainBorders b;
    for ( int d = 0; d < 3; ++d )
    {
        b.lower[d] = range.lo[d] * cell_size_;
        b.upper[d] = range.hi[d] * cell_size_;
    }
    return b;
}

bool DomainGrid::is_neighbor( int rank, int other ) const
{
    const auto& n = neighbors_[rank];
    return std::find( n.begin(), n.end(), other ) != n.end();
}

int DomainGrid::owner_of_cell( const CellCoord& wrapped ) const
{
    const Index3 n = domain_cells();
    return rank_at( { static_cast<int>( wrapped[0] / n[0] ),
                      static_cast<int>( wrapped[1] / n[1] ),
                      static_cast<int>( wrapped[2] / n[2] ) } );
}

int DomainGrid::owner_of_position( const Vec3& x ) const
{
    // Same comparisons as classify_base3 against borders(), so a particle
    // placed here classifies as kStayCode on its owner.
    const Index3 n = domain_cells();
    Index3 coords;
    for ( int d = 0; d < 3; ++d )
    {
        const double width = n[d] * cell_size_;
        const double xw = wrap_periodic( x[d], box_length() );
        int k = static_cast<int>( std::floor( xw / width ) );
        k = std::clamp( k, 0, rank_dims_[d] - 1 );
        if ( xw < k * n[d] * cell_size_ && k > 0 )
            --k;
        else if ( xw >= ( k + 1 ) * n[d] * cell_size_ && k + 1 < rank_dims_[d] )
            ++k;
        coords[d] = k;
    }
    return rank_at( coords );
}

LocalCellGrid DomainGrid::local_grid( int rank, int halo_width ) const
{
    const CellRange range = cells( rank );
    LocalCellGrid g;
    g.halo = halo_width;
    g.edge_length = edge_length_;
    for ( int d = 0; d < 3; ++d )
    {
        g.base[d] = range.lo[d] - halo_width;
        g.dims[d] = range.hi[d] - range.lo[d] + 2 * halo_width;
    }
    return g;
}

DomainGrid build_decomposition( int edge_length, double cell_size,
                                const Index3& rank_dims )
{
    return DomainGrid( edge_length, cell_size, rank_dims );
}

int neighbor_rank( int code, const DomainGrid& grid, int self_rank )
{
    if ( code < 0 || code > 26 )
        throw TopologyError(
            fmt::format( "base-3 code {} outside [0, 26]", code ) );
    return grid.neighbors( self_rank )[code];
}

Index3 rank_dims_for( int rank_count )
{
    if ( rank_count < 1 )
        throw ConfigError(
            fmt::format( "rank count must be >= 1, got {}", rank_count ) );
    Index3 dims{ 1, 1, 1 };
    int rest = rank_count;
    std::vector<int> factors;
    for ( int f = 2; f * f <= rest; ++f )
        while ( rest % f == 0 )
        {
            factors.push_back( f );
            rest /= f;
        }
    if ( rest > 1 )
        factors.push_back( rest );
    std::sort( factors.rbegin(), factors.rend() );
    for ( int f : factors )
    {
        // give the factor to the smallest dimension, earliest on ties
        int target = 0;
        for ( int d = 1; d < 3; ++d )
            if ( dims[d] < dims[target] )
                target = d;
        dims[target] *= f;
    }
    std::sort( dims.rbegin(), dims.rend() );
    return dims;
}

std::vector<MigrationTag> tag_by_position( std::span<const Vec3> positions,
                                           const DomainGrid& grid, int rank,
                                           double margin )
{
    const DomainBorders b = grid.borders( rank );
    const double box = grid.box_length();
    Vec3 lower, upper, centre, extent;
    for ( int d = 0; d < 3; ++d )
    {
        lower[d] = b.lower[d] - margin;
        upper[d] = b.upper[d] + margin;
        centre[d] = 0.5 * ( b.lower[d] + b.upper[d] );
        extent[d] = b.upper[d] - b.lower[d];
    }
    const auto& neigs = grid.neighbors( rank );

    std::vector<MigrationTag> tags( positions.size() );
    for ( std::size_t i = 0; i < positions.size(); ++i )
    {
        Vec3 x = positions[i];
        for ( int d = 0; d < 3; ++d )
        {
            // periodic image closest to this domain
            if ( x[d] - centre[d] >= 0.5 * box )
                x[d] -= box;
            else if ( x[d] - centre[d] < -0.5 * box )
                x[d] += box;
            if ( x[d] < lower[d] - extent[d] || x[d] >= upper[d] + extent[d] )
                throw TopologyError( fmt::format(
                    "rank {}: particle {} at {} moved more than one domain "
                    "extent beyond [{}, {}) in dimension {}",
                    rank, i, positions[i][d], lower[d], upper[d], d ) );
        }
        const int code = classify_base3( x, lower, upper );
        tags[i] = { neigs[code], code };
    }
    return tags;
}

std::vector<MigrationTag> tag_by_cell( std::span<const Vec3> positions,
                                       const GridShift& shift,
                                       const DomainGrid& grid, int rank )
{
    const CellRange range = grid.cells( rank );
    const std::int64_t n = grid.edge_length();
    std::array<std::int64_t, 3> lo, hi, centre;
    for ( int d = 0; d < 3; ++d )
    {
        lo[d] = range.lo[d];
        hi[d] = range.hi[d];
        centre[d] = lo[d] + hi[d]; // doubled to stay integral
    }
    const auto& neigs = grid.neighbors( rank );
    const Index3 extent = grid.domain_cells();

    std::vector<MigrationTag> tags( positions.size() );
    for ( std::size_t i = 0; i < positions.size(); ++i )
    {
        CellCoord c = shifted_cell( positions[i], shift, grid.cell_size() );
        for ( int d = 0; d < 3; ++d )
        {
            if ( 2 * c[d] - centre[d] >= n )
                c[d] -= n;
            else if ( 2 * c[d] - centre[d] < -n )
                c[d] += n;
            if ( c[d] < lo[d] - extent[d] || c[d] >= hi[d] + extent[d] )
                throw TopologyError( fmt::format(
                    "rank {}: particle {} in cell {} is more than one domain "
                    "extent from cells [{}, {}) in dimension {}",
                    rank, i, c[d], lo[d], hi[d], d ) );
        }
        const int code = classify_base3( c, lo, hi );
        tags[i] = { neigs[code], code };
    }
    return tags;
}

} // namespace mpcd
