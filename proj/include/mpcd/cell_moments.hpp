#pragma once

#include <mpcd/exact_sum.hpp>
#include <mpcd/linked_cells.hpp>
#include <mpcd/types.hpp>

#include <array>
#include <span>
#include <vector>

namespace mpcd
{

// Components 0-2: sum of m v. Component 3: sum of m.
struct CellMoment
{
    std::array<ExactSum, 4> sums{};

    void add( const Vec3& v, double m )
    {
        for ( int d = 0; d < 3; ++d )
            sums[d].add( v[d] * m );
        sums[3].add( m );
    }

    CellMoment& operator+=( const CellMoment& other )
    {
        for ( int d = 0; d < 4; ++d )
            sums[d] += other.sums[d];
        return *this;
    }

    bool operator==( const CellMoment& other ) const = default;

    Vec3 momentum() const
    {
        return { sums[0].value(), sums[1].value(), sums[2].value() };
    }
    double mass() const { return sums[3].value(); }

    // momentum / mass, or zero for an empty cell.
    Vec3 com_velocity() const
    {
        const double m = mass();
        if ( !( m > 0.0 ) )
            return { 0.0, 0.0, 0.0 };
        const Vec3 p = momentum();
        return { p[0] / m, p[1] / m, p[2] / m };
    }

    static CellMoment from_values( const Vec3& momentum, double mass );
};

struct CellMomentField
{
    Index3 dims{ 0, 0, 0 };
    std::vector<CellMoment> cells;

    void reset( const Index3& new_dims );
    std::size_t size() const { return cells.size(); }
    CellMoment& operator[]( std::size_t i ) { return cells[i]; }
    const CellMoment& operator[]( std::size_t i ) const { return cells[i]; }
    bool operator==( const CellMomentField& other ) const = default;
};

// Per-bin sum over the bin's particles in permutation order. Empty bins
// hold (0,0,0,0).
void accumulate_cell_moments( const LinkedCellList& list,
                              std::span<const Vec3> velocities,
                              std::span<const double> masses,
                              CellMomentField& out );

CellMomentField accumulate_cell_moments( const LinkedCellList& list,
                                         std::span<const Vec3> velocities,
                                         std::span<const double> masses );

std::vector<Vec3> finalize_com( const CellMomentField& moments );

} // namespace mpcd
