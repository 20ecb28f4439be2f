#include <mpcd/rng.hpp>
#include <mpcd/rotation.hpp>

#include <fmt/format.h>

#include <cmath>

namespace mpcd
{

Vec3 sample_rotation_axis( std::uint64_t step, std::uint64_t global_cell_id,
                           std::uint64_t seed )
{
    KeyedStream stream( { seed, step, RngPurpose::axis, global_cell_id } );
    for ( ;; )
    {
        const double x1 = 2.0 * stream.uniform() - 1.0;
        const double x2 = 2.0 * stream.uniform() - 1.0;
        const double s = x1 * x1 + x2 * x2;
        if ( s >= 1.0 )
            continue;
        const double root = 2.0 * std::sqrt( 1.0 - s );
        Vec3 axis{ x1 * root, x2 * root, 1.0 - 2.0 * s };
        // remove the rounding left by the construction
        const double inv = 1.0 / norm( axis );
        return inv * axis;
    }
}

void rotate_cell_velocities( const LinkedCellList& list,
                             std::span<const Vec3> com,
                             const RotationPlan& plan,
                             std::span<Vec3> velocities )
{
    if ( com.size() != list.total_bins() ||
         plan.axes.size() != list.total_bins() )
        throw ShapeError( fmt::format(
            "rotate_cell_velocities: {} bins but {} com entries and {} axes",
            list.total_bins(), com.size(), plan.axes.size() ) );

    const double cos_a = std::cos( plan.alpha );
    const double sin_a = std::sin( plan.alpha );
    for ( std::size_t b = 0; b < list.total_bins(); ++b )
    {
        if ( list.bin_size( b ) == 0 )
            continue;
        const Vec3& c = com[b];
        const Vec3& axis = plan.axes[b];
        for ( std::size_t i : list.bin_particles( b ) )
        {
            Vec3& v = velocities[i];
            v = v + rotation_increment( v - c, axis, cos_a, sin_a );
        }
    }
}

} // namespace mpcd
