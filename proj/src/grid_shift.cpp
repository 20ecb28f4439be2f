#include <mpcd/grid_shift.hpp>
#include <mpcd/rng.hpp>

namespace mpcd
{

GridShift sample_grid_shift( std::uint64_t step, std::uint64_t seed,
                             double cell_size )
{
    KeyedStream stream( { seed, step, RngPurpose::shift, 0 } );
    GridShift shift;
    for ( int d = 0; d < 3; ++d )
        shift.offset[d] = ( stream.uniform() - 0.5 ) * cell_size;
    return shift;
}

} // namespace mpcd
