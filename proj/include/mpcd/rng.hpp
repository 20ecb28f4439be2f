#pragma once

#include <cstdint>
#include <vector>

namespace mpcd
{

enum class RngPurpose : std::uint8_t
{
    init = 0,
    shift = 1,
    axis = 2
};

// Address of a random stream. Draws depend on nothing but the key, so
// every rank that evaluates the same key sees the same numbers.
struct RngKey
{
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    RngPurpose purpose = RngPurpose::init;
    std::uint64_t cell_id = 0;
};

// Counter-based stream: the i-th draw is mix(hash(key) + i * gamma), the
// splitmix64 construction with a keyed starting point.
class KeyedStream
{
  public:
    explicit KeyedStream( const RngKey& key );

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal (Box-Muller, pairs cached).
    double normal();

  private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t hash_key( const RngKey& key );

std::vector<double> sample_uniform( const RngKey& key, std::size_t count );

} // namespace mpcd
