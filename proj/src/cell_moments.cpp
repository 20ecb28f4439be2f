#include <mpcd/cell_moments.hpp>

#include <fmt/format.h>

namespace mpcd
{

CellMoment CellMoment::from_values( const Vec3& momentum, double mass )
{
    CellMoment m;
    for ( int d = 0; d < 3; ++d )
        m.sums[d].add( momentum[d] );
    m.sums[3].add( mass );
    return m;
}

void CellMomentField::reset( const Index3& new_dims )
{
    dims = new_dims;
    cells.assign( static_cast<std::size_t>( dims[0] ) * dims[1] * dims[2],
                  CellMoment{} );
}

void accumulate_cell_moments( const LinkedCellList& list,
                              std::span<const Vec3> velocities,
                              std::span<const double> masses,
                              CellMomentField& out )
{
    if ( velocities.size() != list.num_particles() ||
         masses.size() != list.num_particles() )
        throw ShapeError( fmt::format(
            "accumulate_cell_moments: list holds {} particles, got {} "
            "velocities and {} masses",
            list.num_particles(), velocities.size(), masses.size() ) );

    out.reset( list.dims() );
    for ( std::size_t b = 0; b < list.total_bins(); ++b )
    {
        CellMoment& cell = out[b];
        for ( std::size_t i : list.bin_particles( b ) )
            cell.add( velocities[i], masses[i] );
    }
}

CellMomentField accumulate_cell_moments( const LinkedCellList& list,
                                         std::span<const Vec3> velocities,
                                         std::span<const double> masses )
{
    CellMomentField field;
    accumulate_cell_moments( list, velocities, masses, field );
    return field;
}

std::vector<Vec3> finalize_com( const CellMomentField& moments )
{
    std::vector<Vec3> com( moments.size() );
    for ( std::size_t c = 0; c < moments.size(); ++c )
        com[c] = moments[c].com_velocity();
    return com;
}

} // namespace mpcd
