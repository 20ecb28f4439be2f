#pragma once

#include <mpcd/types.hpp>

#include <cstdint>

namespace mpcd
{

// Random translation of the collision mesh, each component in [-a/2, a/2).
struct GridShift
{
    Vec3 offset{};
};

GridShift sample_grid_shift( std::uint64_t step, std::uint64_t seed,
                             double cell_size = 1.0 );

using CellCoord = std::array<std::int64_t, 3>;

// Coordinates of the shifted collision cell containing x:
// floor((x - offset) / a). For x in [0, L a) the result is in [-1, L].
// Every code path that bins particles goes through this function, so a
// particle is assigned the same cell on every rank.
inline CellCoord shifted_cell( const Vec3& x, const GridShift& shift,
                               double cell_size )
{
    CellCoord c;
    for ( int d = 0; d < 3; ++d )
        c[d] = static_cast<std::int64_t>(
            std::floor( ( x[d] - shift.offset[d] ) / cell_size ) );
    return c;
}

inline std::int64_t wrap_index( std::int64_t i, std::int64_t n )
{
    i %= n;
    return i < 0 ? i + n : i;
}

inline CellCoord wrap_cell( const CellCoord& c, int edge_length )
{
    return { wrap_index( c[0], edge_length ), wrap_index( c[1], edge_length ),
             wrap_index( c[2], edge_length ) };
}

// Row-major id of a wrapped cell, x slowest.
inline std::uint64_t global_cell_id( const CellCoord& wrapped,
                                     int edge_length )
{
    const auto n = static_cast<std::uint64_t>( edge_length );
    return ( static_cast<std::uint64_t>( wrapped[0] ) * n +
             static_cast<std::uint64_t>( wrapped[1] ) ) *
               n +
           static_cast<std::uint64_t>( wrapped[2] );
}

} // namespace mpcd
