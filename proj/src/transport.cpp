#include <mpcd/transport.hpp>

#include <fmt/format.h>

#include <exception>
#include <thread>

namespace mpcd
{

std::string_view to_string( Channel channel )
{
    switch ( channel )
    {
    case Channel::migration:
        return "migration";
    case Channel::halo:
        return "halo";
    case Channel::halo_copy:
        return "halo_copy";
    case Channel::gather:
        return "gather";
    case Channel::diagnostic:
        return "diagnostic";
    }
    return "unknown";
}

Transport::Transport( int ranks )
    : ranks_( ranks )
    , barrier_( ranks )
{
    if ( ranks < 1 )
        throw ConfigError(
            fmt::format( "transport needs at least one rank, got {}", ranks ) );
    boxes_.reserve( ranks );
    for ( int r = 0; r < ranks; ++r )
    {
        auto box = std::make_unique<Mailbox>();
        for ( auto& q : box->queues )
            q.resize( ranks );
        boxes_.push_back( std::move( box ) );
    }
    for ( auto& seen : pair_seen_ )
        seen.assign( static_cast<std::size_t>( ranks ) * ranks, 0 );
}

void Transport::send( int src, int dst, Channel channel, Payload payload )
{
    if ( src < 0 || src >= ranks_ || dst < 0 || dst >= ranks_ )
        throw TransportError(
            fmt::format( "send {} -> {}: rank out of range", src, dst ) );
    if ( src == dst )
        throw TransportError( fmt::format( "send to self on rank {}", src ) );

    const auto ch = static_cast<std::size_t>( channel );
    {
        std::lock_guard lock( stats_mutex_ );
        TrafficStats& s = traffic_.channels[ch];
        ++s.messages;
        s.bytes += payload.size();
        char& seen = pair_seen_[ch][static_cast<std::size_t>( src ) * ranks_ + dst];
        if ( !seen )
        {
            seen = 1;
            ++s.pairs;
        }
    }

    Mailbox& box = *boxes_[dst];
    {
        std::lock_guard lock( box.mutex );
        box.queues[ch][src].push_back( std::move( payload ) );
    }
    box.ready.notify_all();
}

Payload Transport::receive( int dst, int src, Channel channel )
{
    const auto ch = static_cast<std::size_t>( channel );
    Mailbox& box = *boxes_[dst];
    std::unique_lock lock( box.mutex );
    auto& queue = box.queues[ch][src];
    box.ready.wait( lock, [&] { return !queue.empty() || aborted_.load(); } );
    if ( queue.empty() )
        throw TransportError( fmt::format(
            "rank {}: receive from {} aborted", dst, src ) );
    Payload out = std::move( queue.front() );
    queue.pop_front();
    return out;
}

std::vector<Envelope> Transport::drain( int dst, Channel channel )
{
    const auto ch = static_cast<std::size_t>( channel );
    Mailbox& box = *boxes_[dst];
    std::lock_guard lock( box.mutex );
    std::vector<Envelope> out;
    for ( int src = 0; src < ranks_; ++src )
    {
        auto& queue = box.queues[ch][src];
        while ( !queue.empty() )
        {
            out.push_back( { src, std::move( queue.front() ) } );
            queue.pop_front();
        }
    }
    return out;
}

void Transport::sync()
{
    if ( aborted_.load() )
        throw TransportError( "transport aborted" );
    barrier_.arrive_and_wait();
    if ( aborted_.load() )
        throw TransportError( "transport aborted" );
}

void Transport::abort() noexcept
{
    aborted_.store( true );
    for ( auto& box : boxes_ )
    {
        std::lock_guard lock( box->mutex );
        box->ready.notify_all();
    }
}

void Transport::leave() noexcept { barrier_.arrive_and_drop(); }

StepTraffic Transport::current() const
{
    std::lock_guard lock( stats_mutex_ );
    return traffic_;
}

StepTraffic Transport::end_step()
{
    std::lock_guard lock( stats_mutex_ );
    StepTraffic out = traffic_;
    traffic_ = {};
    for ( auto& seen : pair_seen_ )
        std::fill( seen.begin(), seen.end(), 0 );
    return out;
}

std::size_t Transport::pending() const
{
    std::size_t n = 0;
    for ( const auto& box : boxes_ )
    {
        std::lock_guard lock( box->mutex );
        for ( const auto& channel : box->queues )
            for ( const auto& queue : channel )
                n += queue.size();
    }
    return n;
}

void run_ranks( Transport& transport, const std::function<void( Comm& )>& body )
{
    const int n = transport.size();
    std::vector<std::exception_ptr> errors( n );
    auto worker = [&]( int rank ) {
        Comm comm( transport, rank );
        try
        {
            body( comm );
        }
        catch ( ... )
        {
            errors[rank] = std::current_exception();
            transport.abort();
            transport.leave();
        }
    };

    if ( n == 1 )
    {
        worker( 0 );
    }
    else
    {
        std::vector<std::jthread> threads;
        threads.reserve( n );
        for ( int r = 0; r < n; ++r )
            threads.emplace_back( worker, r );
    }

    // Prefer the original failure over the TransportErrors it caused.
    std::exception_ptr first;
    for ( auto& e : errors )
    {
        if ( !e )
            continue;
        try
        {
            std::rethrow_exception( e );
        }
        catch ( const TransportError& )
        {
            if ( !first )
                first = e;
        }
        catch ( ... )
        {
            std::rethrow_exception( e );
        }
    }
    if ( first )
        std::rethrow_exception( first );
}

StepTraffic comm_stats( const Transport& transport )
{
    return transport.current();
}

} // namespace mpcd
