#pragma once

#include <mpcd/grid_shift.hpp>
#include <mpcd/types.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mpcd
{

// Code of the "stay" displacement, (111) in base 3.
inline constexpr int kStayCode = 13;

// Per-dimension digit: 0 below `lower`, 2 at or above `upper`, else 1.
// code = digit_x * 9 + digit_y * 3 + digit_z. Comparisons are cast to
// integers instead of branching.
template <class T>
int classify_base3( const std::array<T, 3>& x, const std::array<T, 3>& lower,
                    const std::array<T, 3>& upper )
{
    int weight = 1;
    int index = 0;
    for ( int d = 2; d >= 0; --d )
    {
        index += weight * ( 1 - static_cast<int>( x[d] < lower[d] ) +
                            static_cast<int>( x[d] >= upper[d] ) );
        weight *= 3;
    }
    return index;
}

inline Index3 base3_digits( int code )
{
    return { code / 9, ( code / 3 ) % 3, code % 3 };
}

inline int base3_code( const Index3& digits )
{
    return digits[0] * 9 + digits[1] * 3 + digits[2];
}

struct DomainBorders
{
    Vec3 lower{};
    Vec3 upper{};
};

// Cell index range [lo, hi) per dimension.
struct CellRange
{
    Index3 lo{};
    Index3 hi{};
};

//---------------------------------------------------------------------------//
/*!
  A rank's window onto the global cell lattice: its owned cells plus
  `halo` layers on every side. Local cell j corresponds to global
  (unwrapped) cell base + j.
*/
struct LocalCellGrid
{
    Index3 base{};
    Index3 dims{};
    int halo = 0;
    int edge_length = 0;

    std::size_t total_cells() const
    {
        return static_cast<std::size_t>( dims[0] ) * dims[1] * dims[2];
    }

    std::size_t flat( const Index3& j ) const
    {
        return ( static_cast<std::size_t>( j[0] ) * dims[1] + j[1] ) *
                   dims[2] +
               j[2];
    }

    Index3 unflat( std::size_t idx ) const
    {
        const int k = static_cast<int>( idx % dims[2] );
        idx /= dims[2];
        return { static_cast<int>( idx / dims[1] ),
                 static_cast<int>( idx % dims[1] ), k };
    }

    // Local cell holding global cell `c`, taking the periodic image that
    // falls inside the window. Returns false if none does.
    bool local_index( const CellCoord& c, std::size_t& out ) const
    {
        Index3 j;
        for ( int d = 0; d < 3; ++d )
        {
            std::int64_t v = c[d] - base[d];
            if ( v < 0 )
                v += edge_length;
            else if ( v >= dims[d] )
                v -= edge_length;
            if ( v < 0 || v >= dims[d] )
                return false;
            j[d] = static_cast<int>( v );
        }
        out = flat( j );
        return true;
    }

    CellCoord global_cell( std::size_t idx ) const
    {
        const Index3 j = unflat( idx );
        return wrap_cell( { std::int64_t{ base[0] } + j[0],
                            std::int64_t{ base[1] } + j[1],
                            std::int64_t{ base[2] } + j[2] },
                          edge_length );
    }

    bool is_owned( std::size_t idx ) const
    {
        const Index3 j = unflat( idx );
        for ( int d = 0; d < 3; ++d )
            if ( j[d] < halo || j[d] >= dims[d] - halo )
                return false;
        return true;
    }
};

//---------------------------------------------------------------------------//
/*!
  Uniform Cartesian decomposition of the periodic box [0, L a)^3.

  Rank r has coordinates (cx, cy, cz) with r = (cx * ny + cy) * nz + cz and
  owns cells [c * L / n, (c + 1) * L / n) per dimension. neighbors(r)[code]
  is the rank displaced by base3_digits(code) - 1, wrapped periodically;
  entry 13 is r itself.
*/
class DomainGrid
{
  public:
    DomainGrid( int edge_length, double cell_size, const Index3& rank_dims );

    int rank_count() const { return rank_count_; }
    const Index3& rank_dims() const { return rank_dims_; }
    int edge_length() const { return edge_length_; }
    double cell_size() const { return cell_size_; }
    double box_length() const { return edge_length_ * cell_size_; }

    Index3 rank_coords( int rank ) const;
    int rank_at( const Index3& coords ) const; // wraps periodically

    CellRange cells( int rank ) const;
    DomainBorders borders( int rank ) const;
    Index3 domain_cells() const; // cells per rank per dimension

    const std::array<int, 27>& neighbors( int rank ) const
    {
        return neighbors_[rank];
    }
    bool is_neighbor( int rank, int other ) const;

    // Owner of a wrapped (logical) cell.
    int owner_of_cell( const CellCoord& wrapped ) const;
    // Owner of a position in [0, L a)^3.
    int owner_of_position( const Vec3& x ) const;

    LocalCellGrid local_grid( int rank, int halo_width ) const;

  private:
    int edge_length_;
    double cell_size_;
    Index3 rank_dims_;
    int rank_count_;
    std::vector<std::array<int, 27>> neighbors_;
};

DomainGrid build_decomposition( int edge_length, double cell_size,
                                const Index3& rank_dims );

int neighbor_rank( int code, const DomainGrid& grid, int self_rank );

// Factor a rank count into near-cubic rank_dims, largest factor first.
Index3 rank_dims_for( int rank_count );

struct MigrationTag
{
    int export_rank = 0;
    int code = kStayCode;
};

//---------------------------------------------------------------------------//
/*!
  Tag each particle with the neighbour that should own it after a move.

  Positions are in [0, L a); each is compared, in the periodic image closest
  to the domain, with the domain borders widened by `margin` on every side
  (0 for strict ownership). Throws TopologyError for a particle further than
  one domain extent outside the widened box.
*/
std::vector<MigrationTag> tag_by_position( std::span<const Vec3> positions,
                                           const DomainGrid& grid, int rank,
                                           double margin = 0.0 );

// Tag each particle with the owner of its shifted collision cell.
std::vector<MigrationTag> tag_by_cell( std::span<const Vec3> positions,
                                       const GridShift& shift,
                                       const DomainGrid& grid, int rank );

} // namespace mpcd
