#include <mpcd/linked_cells.hpp>

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace mpcd
{

void LinkedCellList::build( std::span<const Vec3> positions, double cell_size,
                            const Vec3& grid_min, const Vec3& grid_max )
{
    Index3 dims;
    for ( int d = 0; d < 3; ++d )
    {
        const double extent = ( grid_max[d] - grid_min[d] ) / cell_size;
        if ( !( extent >= 0.5 ) )
            throw ShapeError( fmt::format(
                "linked-cell grid has no cells along dimension {}", d ) );
        dims[d] = static_cast<int>( std::lround( extent ) );
    }

    bins_scratch_.resize( positions.size() );
    for ( std::size_t i = 0; i < positions.size(); ++i )
    {
        Index3 ijk;
        for ( int d = 0; d < 3; ++d )
        {
            const double x = positions[i][d];
            const double c = std::floor( ( x - grid_min[d] ) / cell_size );
            if ( !( c >= 0.0 && c < dims[d] ) )
                throw GridBoundsError(
                    i, d,
                    fmt::format( "particle {} lies outside the linked-cell grid "
                                 "in dimension {}: x = {} not in [{}, {})",
                                 i, d, x, grid_min[d], grid_max[d] ) );
            ijk[d] = static_cast<int>( c );
        }
        bins_scratch_[i] =
            ( static_cast<std::size_t>( ijk[0] ) * dims[1] + ijk[1] ) *
                dims[2] +
            ijk[2];
    }

    dims_ = dims;
    grid_min_ = grid_min;
    grid_max_ = grid_max;
    sort( bins_scratch_ );
}

void LinkedCellList::build( std::span<const std::size_t> bins,
                            const Index3& dims )
{
    dims_ = dims;
    grid_min_ = { 0.0, 0.0, 0.0 };
    grid_max_ = { static_cast<double>( dims[0] ), static_cast<double>( dims[1] ),
                  static_cast<double>( dims[2] ) };
    const std::size_t total =
        static_cast<std::size_t>( dims[0] ) * dims[1] * dims[2];
    for ( std::size_t i = 0; i < bins.size(); ++i )
        if ( bins[i] >= total )
            throw GridBoundsError(
                i, -1,
                fmt::format( "particle {} has bin {} outside a grid of {} bins",
                             i, bins[i], total ) );
    sort( bins );
}

void LinkedCellList::sort( std::span<const std::size_t> bins )
{
    const std::size_t total =
        static_cast<std::size_t>( dims_[0] ) * dims_[1] * dims_[2];
    bin_count_.assign( total, 0 );
    for ( std::size_t b : bins )
        ++bin_count_[b];

    bin_offset_.resize( total );
    std::exclusive_scan( bin_count_.begin(), bin_count_.end(),
                         bin_offset_.begin(), std::size_t{ 0 } );

    cursor_.assign( bin_offset_.begin(), bin_offset_.end() );
    permutation_.resize( bins.size() );
    for ( std::size_t i = 0; i < bins.size(); ++i )
        permutation_[cursor_[bins[i]]++] = i;
}

void LinkedCellList::permute( ParticleSet& particles )
{
    particles.reorder( permutation_ );
    std::iota( permutation_.begin(), permutation_.end(), std::size_t{ 0 } );
}

Index3 LinkedCellList::ijk_index( std::size_t bin ) const
{
    const int k = static_cast<int>( bin % dims_[2] );
    bin /= dims_[2];
    return { static_cast<int>( bin / dims_[1] ),
             static_cast<int>( bin % dims_[1] ), k };
}

LinkedCellList build_linked_cells( std::span<const Vec3> positions,
                                   double cell_size, const Vec3& grid_min,
                                   const Vec3& grid_max )
{
    LinkedCellList list;
    list.build( positions, cell_size, grid_min, grid_max );
    return list;
}

} // namespace mpcd
