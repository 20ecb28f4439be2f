#pragma once

#include <mpcd/types.hpp>

#include <array>
#include <cstring>
#include <type_traits>
#include <atomic>
#include <barrier>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string_view>
#include <vector>

namespace mpcd
{

// Traffic class of a message. Counters are kept per channel so that the
// halo-reduction traffic of a step can be read separately from particle
// migration or diagnostics.
enum class Channel : std::uint8_t
{
    migration = 0,
    halo = 1,
    halo_copy = 2,
    diagnostic = 3,
    gather = 4 // migration scheme: particles sent to their collision cell
};
inline constexpr std::size_t kChannelCount = 5;

std::string_view to_string( Channel channel );

struct TrafficStats
{
    std::uint64_t messages = 0;
    std::uint64_t bytes = 0;
    std::uint64_t pairs = 0; // distinct (src, dst)

    bool operator==( const TrafficStats& ) const = default;
};

struct StepTraffic
{
    std::array<TrafficStats, kChannelCount> channels{};

    const TrafficStats& operator[]( Channel c ) const
    {
        return channels[static_cast<std::size_t>( c )];
    }
    bool operator==( const StepTraffic& ) const = default;
};

using Payload = std::vector<std::byte>;

struct Envelope
{
    int source = 0;
    Payload payload;
};

//---------------------------------------------------------------------------//
/*!
  In-process message passing between ranks running on separate threads.

  Messages from one source to one destination on one channel are delivered
  in send order. receive() blocks until a message from the named source
  arrives; drain() returns everything queued for a destination, ordered by
  source rank then send order, and is only meaningful after a sync() that
  follows all sends of the phase.

  Sends to self are rejected: local data never goes through the transport.
*/
class Transport
{
  public:
    explicit Transport( int ranks );
    Transport( const Transport& ) = delete;
    Transport& operator=( const Transport& ) = delete;

    int size() const { return ranks_; }

    void send( int src, int dst, Channel channel, Payload payload );
    Payload receive( int dst, int src, Channel channel );
    std::vector<Envelope> drain( int dst, Channel channel );

    // Barrier over all ranks. Throws TransportError once aborted.
    void sync();

    // Wake all blocked ranks with TransportError; used when a rank fails.
    void abort() noexcept;
    bool aborted() const { return aborted_.load(); }

    // Drop out of future barriers (a failed rank).
    void leave() noexcept;

    // Traffic since the last end_step().
    StepTraffic current() const;
    // Return the traffic of the step and reset the counters.
    StepTraffic end_step();

    // Messages sent but never received; non-zero means a protocol error.
    std::size_t pending() const;

  private:
    struct Mailbox
    {
        std::mutex mutex;
        std::condition_variable ready;
        // [channel][source]
        std::array<std::vector<std::deque<Payload>>, kChannelCount> queues;
    };

    int ranks_;
    std::vector<std::unique_ptr<Mailbox>> boxes_;
    std::barrier<> barrier_;
    std::atomic<bool> aborted_{ false };

    mutable std::mutex stats_mutex_;
    StepTraffic traffic_;
    std::array<std::vector<char>, kChannelCount> pair_seen_;
};

// Per-rank handle onto a Transport.
class Comm
{
  public:
    Comm( Transport& transport, int rank )
        : transport_( &transport )
        , rank_( rank )
    {
    }

    int rank() const { return rank_; }
    int size() const { return transport_->size(); }

    void send( int dst, Channel channel, Payload payload )
    {
        transport_->send( rank_, dst, channel, std::move( payload ) );
    }
    Payload receive( int src, Channel channel )
    {
        return transport_->receive( rank_, src, channel );
    }
    std::vector<Envelope> drain( Channel channel )
    {
        return transport_->drain( rank_, channel );
    }
    void sync() { transport_->sync(); }

    Transport& transport() { return *transport_; }

  private:
    Transport* transport_;
    int rank_;
};

// Run `body` once per rank, each on its own thread, and rethrow the first
// failure after all threads finished.
void run_ranks( Transport& transport, const std::function<void( Comm& )>& body );

// Traffic record of the current step.
StepTraffic comm_stats( const Transport& transport );

//---------------------------------------------------------------------------//
// Byte packing for payloads.
//---------------------------------------------------------------------------//
class ByteWriter
{
  public:
    explicit ByteWriter( Payload& out )
        : out_( &out )
    {
    }

    template <class T>
    void put( const T& value )
    {
        static_assert( std::is_trivially_copyable_v<T> );
        const auto* p = reinterpret_cast<const std::byte*>( &value );
        out_->insert( out_->end(), p, p + sizeof( T ) );
    }

  private:
    Payload* out_;
};

class ByteReader
{
  public:
    explicit ByteReader( const Payload& in )
        : in_( &in )
    {
    }

    template <class T>
    T get()
    {
        static_assert( std::is_trivially_copyable_v<T> );
        if ( pos_ + sizeof( T ) > in_->size() )
            throw Error( "ByteReader: payload truncated" );
        T value;
        std::memcpy( &value, in_->data() + pos_, sizeof( T ) );
        pos_ += sizeof( T );
        return value;
    }

    bool done() const { return pos_ == in_->size(); }
    std::size_t remaining() const { return in_->size() - pos_; }

  private:
    const Payload* in_;
    std::size_t pos_ = 0;
};

} // namespace mpcd
