#pragma once

#include <mpcd/particles.hpp>
#include <mpcd/types.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace mpcd
{

//---------------------------------------------------------------------------//
/*!
  Linked-cell list over a regular grid of bins.

  Particles are counted per bin, the counts are prefix-summed into bin
  offsets, and a stable counting sort yields `permutation()`: the particle
  indices ordered bin by bin, ties in original order. Bins are numbered
  row-major, (i * ny + j) * nz + k.

  After `permute()` the particle arrays themselves are in bin order and the
  permutation is reset to the identity, so bin b occupies
  [bin_offset(b), bin_offset(b) + bin_size(b)) of the particle arrays.
*/
class LinkedCellList
{
  public:
    LinkedCellList() = default;

    // Bin particles by floor((x - grid_min) / cell_size). Throws
    // GridBoundsError naming the first particle outside [grid_min, grid_max).
    void build( std::span<const Vec3> positions, double cell_size,
                const Vec3& grid_min, const Vec3& grid_max );

    // Bin particles by precomputed bin index (one per particle).
    void build( std::span<const std::size_t> bins, const Index3& dims );

    // Apply the permutation to the particle arrays.
    void permute( ParticleSet& particles );

    const Index3& dims() const { return dims_; }
    const Vec3& grid_min() const { return grid_min_; }
    const Vec3& grid_max() const { return grid_max_; }
    std::size_t total_bins() const { return bin_count_.size(); }
    std::size_t num_particles() const { return permutation_.size(); }

    std::size_t bin_index( int i, int j, int k ) const
    {
        return ( static_cast<std::size_t>( i ) * dims_[1] + j ) * dims_[2] +
               k;
    }
    Index3 ijk_index( std::size_t bin ) const;

    std::size_t bin_size( std::size_t bin ) const { return bin_count_[bin]; }
    std::size_t bin_offset( std::size_t bin ) const
    {
        return bin_offset_[bin];
    }

    // Indices of the particles in `bin`, in permutation order.
    std::span<const std::size_t> bin_particles( std::size_t bin ) const
    {
        return { permutation_.data() + bin_offset_[bin], bin_count_[bin] };
    }

    std::span<const std::size_t> bin_counts() const { return bin_count_; }
    std::span<const std::size_t> bin_offsets() const { return bin_offset_; }
    std::span<const std::size_t> permutation() const { return permutation_; }

  private:
    void sort( std::span<const std::size_t> bins );

    Index3 dims_{ 0, 0, 0 };
    Vec3 grid_min_{};
    Vec3 grid_max_{};
    std::vector<std::size_t> bin_count_;
    std::vector<std::size_t> bin_offset_;
    std::vector<std::size_t> permutation_;
    std::vector<std::size_t> bins_scratch_;
    std::vector<std::size_t> cursor_;
};

LinkedCellList build_linked_cells( std::span<const Vec3> positions,
                                   double cell_size, const Vec3& grid_min,
                                   const Vec3& grid_max );

} // namespace mpcd
