#pragma once

#include <mpcd/linked_cells.hpp>
#include <mpcd/types.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace mpcd
{

// Rotation axis per bin (unit vector for occupied bins, zero otherwise)
// and the angle shared by all bins.
struct RotationPlan
{
    double alpha = 0.0;
    std::vector<Vec3> axes;
};

// Uniform on the unit sphere (Marsaglia), keyed by (seed, step, axis, cell).
Vec3 sample_rotation_axis( std::uint64_t step, std::uint64_t global_cell_id,
                           std::uint64_t seed );

// Change of a velocity whose part relative to the cell's com is u, when u
// is rotated by the angle (cos_a, sin_a) about `axis`:
//   (cos_a - 1) u_perp + sin_a (axis x u)
// Adding it to v gives com + u_par + u_perp cos_a + (axis x u_perp) sin_a
// and leaves v bit-identical for alpha = 0 or u = 0.
inline Vec3 rotation_increment( const Vec3& u, const Vec3& axis, double cos_a,
                                double sin_a )
{
    const double par = dot( u, axis );
    const Vec3 perp = u - par * axis;
    const Vec3 n_cross_u = cross( axis, u );
    return ( cos_a - 1.0 ) * perp + sin_a * n_cross_u;
}

inline Vec3 rotate_relative( const Vec3& u, const Vec3& axis, double alpha )
{
    return u + rotation_increment( u, axis, std::cos( alpha ),
                                   std::sin( alpha ) );
}

// Rotate every particle's velocity relative to its bin's com velocity.
// Bins with no particles are skipped.
void rotate_cell_velocities( const LinkedCellList& list,
                             std::span<const Vec3> com,
                             const RotationPlan& plan,
                             std::span<Vec3> velocities );

} // namespace mpcd
