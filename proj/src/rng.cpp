#include <mpcd/rng.hpp>

#include <cmath>
#include <numbers>

namespace mpcd
{
namespace
{
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64( std::uint64_t z )
{
    z = ( z ^ ( z >> 30 ) ) * 0xbf58476d1ce4e5b9ULL;
    z = ( z ^ ( z >> 27 ) ) * 0x94d049bb133111ebULL;
    return z ^ ( z >> 31 );
}
} // namespace

// Each field enters through an xor followed by a bijective mix, so two keys
// that differ in exactly one field always hash differently.
std::uint64_t hash_key( const RngKey& key )
{
    std::uint64_t h = mix64( key.seed + 0x243f6a8885a308d3ULL );
    h = mix64( h ^ ( key.step + 0x13198a2e03707344ULL ) );
    h = mix64( h ^ ( static_cast<std::uint64_t>( key.purpose ) +
                     0xa4093822299f31d0ULL ) );
    h = mix64( h ^ ( key.cell_id + 0x082efa98ec4e6c89ULL ) );
    return h;
}

KeyedStream::KeyedStream( const RngKey& key )
    : base_( hash_key( key ) )
{
}

std::uint64_t KeyedStream::next_u64()
{
    ++counter_;
    return mix64( base_ + counter_ * kGamma );
}

double KeyedStream::uniform()
{
    return static_cast<double>( next_u64() >> 11 ) * 0x1p-53;
}

double KeyedStream::normal()
{
    if ( has_spare_ )
    {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt( -2.0 * std::log( u1 ) );
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin( theta );
    has_spare_ = true;
    return r * std::cos( theta );
}

std::vector<double> sample_uniform( const RngKey& key, std::size_t count )
{
    KeyedStream stream( key );
    std::vector<double> out( count );
    for ( auto& u : out )
        u = stream.uniform();
    return out;
}

} // namespace mpcd
