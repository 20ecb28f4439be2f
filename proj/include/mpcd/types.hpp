#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mpcd
{

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

inline Vec3 operator+( const Vec3& a, const Vec3& b )
{
    return { a[0] + b[0], a[1] + b[1], a[2] + b[2] };
}

inline Vec3 operator-( const Vec3& a, const Vec3& b )
{
    return { a[0] - b[0], a[1] - b[1], a[2] - b[2] };
}

inline Vec3 operator*( double s, const Vec3& a )
{
    return { s * a[0], s * a[1], s * a[2] };
}

inline double dot( const Vec3& a, const Vec3& b )
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross( const Vec3& a, const Vec3& b )
{
    return { a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
             a[0] * b[1] - a[1] * b[0] };
}

inline double norm( const Vec3& a ) { return std::sqrt( dot( a, a ) ); }

inline double max_abs( const Vec3& a )
{
    return std::fmax( std::fabs( a[0] ),
                      std::fmax( std::fabs( a[1] ), std::fabs( a[2] ) ) );
}

//---------------------------------------------------------------------------//
// Error hierarchy. Every failure the library reports is an mpcd::Error.
//---------------------------------------------------------------------------//
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration input.
class ConfigError : public Error
{
  public:
    using Error::Error;
};

// A particle lies outside the bounds of a linked-cell grid.
class GridBoundsError : public Error
{
  public:
    GridBoundsError( std::size_t particle, int dimension,
                     const std::string& what )
        : Error( what )
        , particle_( particle )
        , dimension_( dimension )
    {
    }

    std::size_t particle() const { return particle_; }
    int dimension() const { return dimension_; }

  private:
    std::size_t particle_;
    int dimension_;
};

// Communication target outside the 26-neighbourhood, or a particle that
// moved further than one domain extent in a single step.
class TopologyError : public Error
{
  public:
    using Error::Error;
};

// Field or plan dimensions that do not agree.
class ShapeError : public Error
{
  public:
    using Error::Error;
};

// Raised on ranks blocked in the transport after another rank failed.
class TransportError : public Error
{
  public:
    using Error::Error;
};

} // namespace mpcd
