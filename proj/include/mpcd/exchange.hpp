#pragma once

#include <mpcd/cell_moments.hpp>
#include <mpcd/decomposition.hpp>
#include <mpcd/particles.hpp>
#include <mpcd/transport.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace mpcd
{

// Wire layout of one particle: 3 position, 3 velocity, 1 mass as
// contiguous 64-bit floats, then the 64-bit global id.
inline constexpr std::size_t kParticleRecordBytes = 7 * 8 + 8;

// One cell moment: four 128-bit fixed-point sums.
inline constexpr std::size_t kMomentRecordBytes = 4 * 16;

void pack_particle( Payload& out, const ParticleSet& p, std::size_t i );
Particle unpack_particle( ByteReader& in );

void pack_moment( Payload& out, const CellMoment& m );
CellMoment unpack_moment( ByteReader& in );

//---------------------------------------------------------------------------//
/*!
  Send every particle whose tag is not the stay code to its export rank and
  append what the neighbours send. Tags pointing at the calling rank keep
  the particle local. The communication pattern follows the data and is
  rebuilt on every call.

  Collective: every rank of the transport must call it. Throws
  TopologyError for an export rank outside the 26-neighbourhood.
*/
struct MigrationResult
{
    ParticleSet particles;
    std::size_t sent = 0;
    std::size_t received = 0;
};

MigrationResult migrate_particles( ParticleSet particles,
                                   std::span<const MigrationTag> tags,
                                   const DomainGrid& grid, Comm& comm,
                                   Channel channel = Channel::migration );

//---------------------------------------------------------------------------//
/*!
  Read-only copies of owned particles lying within halo_width * a of a
  face, edge or corner, delivered to the neighbour across that border.

  Positions stay in canonical [0, L a) form; `images[i]` holds the periodic
  image (-1, 0 or +1 box lengths per dimension) under which copy i sits next
  to the receiver's domain. With one rank along a dimension the neighbour is
  the rank itself and the copies are its own periodic images.
*/
struct HaloCopies
{
    ParticleSet particles;
    std::vector<Index3> images;
};

HaloCopies halo_exchange_particles( const ParticleSet& owned,
                                    const DomainGrid& grid, int halo_width,
                                    Comm& comm );

//---------------------------------------------------------------------------//
/*!
  Static communication pattern for reducing partial cell moments.

  For each peer rank (the calling rank included, for periodic self-images):
  `send_cells` are the local halo cells whose logical cell the peer owns,
  in ascending local order; `recv_cells` are the local owned cells matching
  the peer's send_cells, in the peer's order. The plan is a function of the
  decomposition and halo width only.
*/
struct HaloLink
{
    int peer = 0;
    std::vector<std::uint32_t> send_cells;
    std::vector<std::uint32_t> recv_cells;

    bool operator==( const HaloLink& ) const = default;
};

class HaloPlan
{
  public:
    HaloPlan() = default;
    HaloPlan( const DomainGrid& grid, int rank, int halo_width );

    int rank() const { return rank_; }
    const LocalCellGrid& local_grid() const { return local_; }
    const std::vector<HaloLink>& links() const { return links_; }

    // Cells shipped to other ranks per pass (self links excluded).
    std::size_t remote_cells() const;

    // Stable byte encoding of the plan, for comparing rebuilt plans.
    std::vector<std::byte> serialize() const;

    bool operator==( const HaloPlan& ) const = default;

  private:
    int rank_ = 0;
    LocalCellGrid local_;
    std::vector<HaloLink> links_;
};

//---------------------------------------------------------------------------//
/*!
  Two-pass halo reduction of a rank's partial cell moments.

  Pass 1 sends each halo cell's partial moment to the owner of the cell,
  which adds it into its owned cell. Pass 2 sends the reduced owned values
  back to every rank holding that cell in its halo. Afterwards all ranks
  hold identical moments for every cell they touch.

  Collective over the plan's peers. Throws ShapeError if `field` does not
  have the plan's local dimensions.
*/
void halo_reduce_scatter_moments( CellMomentField& field, const HaloPlan& plan,
                                  Comm& comm,
                                  Channel channel = Channel::halo );

} // namespace mpcd
