#include <mpcd/exchange.hpp>

#include <fmt/format.h>

#include <map>

namespace mpcd
{

void pack_particle( Payload& out, const ParticleSet& p, std::size_t i )
{
    ByteWriter w( out );
    for ( int d = 0; d < 3; ++d )
        w.put( p.positions[i][d] );
    for ( int d = 0; d < 3; ++d )
        w.put( p.velocities[i][d] );
    w.put( p.masses[i] );
    w.put( p.ids[i] );
}

Particle unpack_particle( ByteReader& in )
{
    Particle p;
    for ( int d = 0; d < 3; ++d )
        p.position[d] = in.get<double>();
    for ( int d = 0; d < 3; ++d )
        p.velocity[d] = in.get<double>();
    p.mass = in.get<double>();
    p.id = in.get<std::uint64_t>();
    return p;
}

void pack_moment( Payload& out, const CellMoment& m )
{
    ByteWriter w( out );
    for ( const ExactSum& s : m.sums )
        w.put( s.raw() );
}

CellMoment unpack_moment( ByteReader& in )
{
    CellMoment m;
    for ( ExactSum& s : m.sums )
        s = ExactSum::from_raw( in.get<int128_t>() );
    return m;
}

MigrationResult migrate_particles( ParticleSet particles,
                                   std::span<const MigrationTag> tags,
                                   const DomainGrid& grid, Comm& comm,
                                   Channel channel )
{
    particles.check_consistent();
    if ( tags.size() != particles.size() )
        throw ShapeError( fmt::format( "migrate_particles: {} tags for {} particles",
                                       tags.size(), particles.size() ) );

    const int self = comm.rank();
    std::vector<Payload> outgoing( comm.size() );
    std::vector<char> keep( particles.size(), 1 );
    MigrationResult result;
    for ( std::size_t i = 0; i < particles.size(); ++i )
    {
        const MigrationTag& tag = tags[i];
        if ( tag.code == kStayCode || tag.export_rank == self )
            continue;
        if ( tag.export_rank < 0 || tag.export_rank >= comm.size() ||
             !grid.is_neighbor( self, tag.export_rank ) )
            throw TopologyError( fmt::format(
                "rank {}: particle {} tagged for rank {}, which is not a "
                "neighbour",
                self, i, tag.export_rank ) );
        pack_particle( outgoing[tag.export_rank], particles, i );
        keep[i] = 0;
        ++result.sent;
    }
    particles.compact( keep );

    for ( int dst = 0; dst < comm.size(); ++dst )
        if ( !outgoing[dst].empty() )
            comm.send( dst, channel, std::move( outgoing[dst] ) );
    comm.sync();
    for ( const Envelope& env : comm.drain( channel ) )
    {
        ByteReader in( env.payload );
        if ( in.remaining() % kParticleRecordBytes != 0 )
            throw Error( fmt::format(
                "rank {}: migration payload from {} has {} bytes", self,
                env.source, env.payload.size() ) );
        while ( !in.done() )
        {
            particles.push_back( unpack_particle( in ) );
            ++result.received;
        }
    }
    // all drains complete before anyone sends again
    comm.sync();
    result.particles = std::move( particles );
    return result;
}

HaloCopies halo_exchange_particles( const ParticleSet& owned,
                                    const DomainGrid& grid, int halo_width,
                                    Comm& comm )
{
    const int self = comm.rank();
    const DomainBorders b = grid.borders( self );
    const CellRange cells = grid.cells( self );
    const double width = halo_width * grid.cell_size();
    const auto& neigs = grid.neighbors( self );

    HaloCopies local;
    std::vector<Payload> outgoing( comm.size() );

    for ( std::size_t i = 0; i < owned.size(); ++i )
    {
        const Vec3& x = owned.positions[i];
        // candidate digits per dimension; 1 always
        std::array<std::array<int, 3>, 3> digits;
        std::array<int, 3> count;
        for ( int d = 0; d < 3; ++d )
        {
            count[d] = 0;
            digits[d][count[d]++] = 1;
            if ( x[d] < b.lower[d] + width )
                digits[d][count[d]++] = 0;
            if ( x[d] >= b.upper[d] - width )
                digits[d][count[d]++] = 2;
        }
        for ( int a = 0; a < count[0]; ++a )
            for ( int c = 0; c < count[1]; ++c )
                for ( int e = 0; e < count[2]; ++e )
                {
                    const Index3 dig{ digits[0][a], digits[1][c], digits[2][e] };
                    const int code = base3_code( dig );
                    if ( code == kStayCode )
                        continue;
                    Index3 image{ 0, 0, 0 };
                    for ( int d = 0; d < 3; ++d )
                    {
                        if ( dig[d] == 0 && cells.lo[d] == 0 )
                            image[d] = 1;
                        else if ( dig[d] == 2 &&
                                  cells.hi[d] == grid.edge_length() )
                            image[d] = -1;
                    }
                    const int dst = neigs[code];
                    if ( dst == self )
                    {
                        local.particles.push_back( owned.at( i ) );
                        local.images.push_back( image );
                        continue;
                    }
                    pack_particle( outgoing[dst], owned, i );
                    ByteWriter w( outgoing[dst] );
                    for ( int d = 0; d < 3; ++d )
                        w.put( static_cast<std::int8_t>( image[d] ) );
                }
    }

    for ( int dst = 0; dst < comm.size(); ++dst )
        if ( !outgoing[dst].empty() )
            comm.send( dst, Channel::halo_copy, std::move( outgoing[dst] ) );
    comm.sync();
    for ( const Envelope& env : comm.drain( Channel::halo_copy ) )
    {
        ByteReader in( env.payload );
        while ( !in.done() )
        {
            local.particles.push_back( unpack_particle( in ) );
            Index3 image;
            for ( int d = 0; d < 3; ++d )
                image[d] = in.get<std::int8_t>();
            local.images.push_back( image );
        }
    }
    comm.sync();
    return local;
}

HaloPlan::HaloPlan( const DomainGrid& grid, int rank, int halo_width )
    : rank_( rank )
    , local_( grid.local_grid( rank, halo_width ) )
{
    std::map<int, HaloLink> links;

    for ( std::size_t j = 0; j < local_.total_cells(); ++j )
    {
        if ( local_.is_owned( j ) )
            continue;
        const int owner = grid.owner_of_cell( local_.global_cell( j ) );
        HaloLink& link = links[owner];
        link.peer = owner;
        link.send_cells.push_back( static_cast<std::uint32_t>( j ) );
    }

    // Mirror every peer's send list onto our owned cells.
    for ( int peer = 0; peer < grid.rank_count(); ++peer )
    {
        const LocalCellGrid other = grid.local_grid( peer, halo_width );
        for ( std::size_t j = 0; j < other.total_cells(); ++j )
        {
            if ( other.is_owned( j ) )
                continue;
            const CellCoord g = other.global_cell( j );
            if ( grid.owner_of_cell( g ) != rank )
                continue;
            std::size_t mine = 0;
            if ( !local_.local_index( g, mine ) || !local_.is_owned( mine ) )
                throw Error( fmt::format(
                    "halo plan: rank {} owns cell ({},{},{}) but cannot place it",
                    rank, g[0], g[1], g[2] ) );
            HaloLink& link = links[peer];
            link.peer = peer;
            link.recv_cells.push_back( static_cast<std::uint32_t>( mine ) );
        }
    }

    for ( auto& [peer, link] : links )
        links_.push_back( std::move( link ) );
}

std::size_t HaloPlan::remote_cells() const
{
    std::size_t n = 0;
    for ( const HaloLink& link : links_ )
        if ( link.peer != rank_ )
            n += link.send_cells.size();
    return n;
}

std::vector<std::byte> HaloPlan::serialize() const
{
    Payload out;
    ByteWriter w( out );
    w.put( static_cast<std::int32_t>( rank_ ) );
    for ( int d = 0; d < 3; ++d )
    {
        w.put( static_cast<std::int32_t>( local_.base[d] ) );
        w.put( static_cast<std::int32_t>( local_.dims[d] ) );
    }
    w.put( static_cast<std::int32_t>( local_.halo ) );
    w.put( static_cast<std::uint64_t>( links_.size() ) );
    for ( const HaloLink& link : links_ )
    {
        w.put( static_cast<std::int32_t>( link.peer ) );
        w.put( static_cast<std::uint64_t>( link.send_cells.size() ) );
        for ( auto c : link.send_cells )
            w.put( c );
        w.put( static_cast<std::uint64_t>( link.recv_cells.size() ) );
        for ( auto c : link.recv_cells )
            w.put( c );
    }
    return out;
}

namespace
{
void expect_cells( const Payload& payload, std::size_t cells, int self,
                   int peer )
{
    if ( payload.size() != cells * kMomentRecordBytes )
        throw ShapeError( fmt::format(
            "rank {}: halo message from {} has {} bytes, expected {}", self,
            peer, payload.size(), cells * kMomentRecordBytes ) );
}
} // namespace

void halo_reduce_scatter_moments( CellMomentField& field, const HaloPlan& plan,
                                  Comm& comm, Channel channel )
{
    const LocalCellGrid& local = plan.local_grid();
    if ( field.dims != local.dims || field.size() != local.total_cells() )
        throw ShapeError( fmt::format(
            "halo reduce: field is {}x{}x{}, plan expects {}x{}x{}",
            field.dims[0], field.dims[1], field.dims[2], local.dims[0],
            local.dims[1], local.dims[2] ) );
    const int self = comm.rank();

    // pass 1: partial moments of halo cells to their owners
    for ( const HaloLink& link : plan.links() )
    {
        if ( link.peer == self )
        {
            for ( std::size_t k = 0; k < link.send_cells.size(); ++k )
                field[link.recv_cells[k]] += field[link.send_cells[k]];
            continue;
        }
        if ( link.send_cells.empty() )
            continue;
        Payload out;
        out.reserve( link.send_cells.size() * kMomentRecordBytes );
        for ( auto c : link.send_cells )
            pack_moment( out, field[c] );
        comm.send( link.peer, channel, std::move( out ) );
    }
    for ( const HaloLink& link : plan.links() )
    {
        if ( link.peer == self || link.recv_cells.empty() )
            continue;
        const Payload in = comm.receive( link.peer, channel );
        expect_cells( in, link.recv_cells.size(), self, link.peer );
        ByteReader r( in );
        for ( auto c : link.recv_cells )
            field[c] += unpack_moment( r );
    }

    // pass 2: reduced moments back to every rank holding the cell as halo
    for ( const HaloLink& link : plan.links() )
    {
        if ( link.peer == self )
        {
            for ( std::size_t k = 0; k < link.send_cells.size(); ++k )
                field[link.send_cells[k]] = field[link.recv_cells[k]];
            continue;
        }
        if ( link.recv_cells.empty() )
            continue;
        Payload out;
        out.reserve( link.recv_cells.size() * kMomentRecordBytes );
        for ( auto c : link.recv_cells )
            pack_moment( out, field[c] );
        comm.send( link.peer, channel, std::move( out ) );
    }
    for ( const HaloLink& link : plan.links() )
    {
        if ( link.peer == self || link.send_cells.empty() )
            continue;
        const Payload in = comm.receive( link.peer, channel );
        expect_cells( in, link.send_cells.size(), self, link.peer );
        ByteReader r( in );
        for ( auto c : link.send_cells )
            field[c] = unpack_moment( r );
    }
}

} // namespace mpcd
