#pragma once

#include <mpcd/params.hpp>
#include <mpcd/types.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace mpcd
{

struct Particle
{
    Vec3 position{};
    Vec3 velocity{};
    double mass = 1.0;
    std::uint64_t id = 0;
};

// Particles owned by one rank, stored as parallel sequences. `ids` are
// global and survive migration; they carry no physics.
struct ParticleSet
{
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    std::vector<double> masses;
    std::vector<std::uint64_t> ids;

    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }

    void reserve( std::size_t n );
    void clear();
    void push_back( const Particle& p );
    Particle at( std::size_t i ) const;
    void append( const ParticleSet& other );

    // Keep the particles whose flag is set, preserving order.
    void compact( std::span<const char> keep );

    // Reorder so that new[k] = old[order[k]].
    void reorder( std::span<const std::size_t> order );

    // Throws Error when the sequences disagree in length.
    void check_consistent() const;
};

// N = round(L^3 <N_c>) particles, uniform positions, Gaussian velocities
// with the mass-weighted mean removed. Each particle draws from its own
// keyed stream (seed, step 0, init, index).
ParticleSet init_system( const SimParams& params );

// Map x into [0, box).
inline double wrap_periodic( double x, double box )
{
    if ( x >= box )
        x -= box;
    else if ( x < 0.0 )
        x += box;
    if ( x >= 0.0 && x < box )
        return x;
    x -= box * std::floor( x / box );
    // -tiny + box rounds to box
    return x < box ? x : 0.0;
}

inline Vec3 wrap_periodic( const Vec3& x, double box )
{
    return { wrap_periodic( x[0], box ), wrap_periodic( x[1], box ),
             wrap_periodic( x[2], box ) };
}

// x' = wrap(x + v dt); velocities and masses untouched.
void stream_and_wrap( ParticleSet& particles, double dt, double box );

} // namespace mpcd
