#pragma once

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace mpcd
{

__extension__ typedef __int128 int128_t;

// Fixed-point accumulator with 2^-64 resolution held in a 128-bit integer.
// Addition of quantised terms is exact, hence associative: partial sums
// combined in any grouping or order give bit-identical totals. Terms must
// satisfy |x| < 2^62.
class ExactSum
{
  public:
    ExactSum() = default;

    void add( double x ) { raw_ += quantize( x ); }

    double value() const { return static_cast<double>( raw_ ) * 0x1p-64; }

    ExactSum& operator+=( const ExactSum& other )
    {
        raw_ += other.raw_;
        return *this;
    }

    friend ExactSum operator+( ExactSum a, const ExactSum& b )
    {
        a += b;
        return a;
    }

    bool operator==( const ExactSum& other ) const = default;

    int128_t raw() const { return raw_; }
    static ExactSum from_raw( int128_t raw )
    {
        ExactSum s;
        s.raw_ = raw;
        return s;
    }

  private:
    static int128_t quantize( double x )
    {
        const double scaled = x * 0x1p64;
        if ( !( std::fabs( scaled ) < 0x1p126 ) )
            throw std::overflow_error(
                "ExactSum: term is not finite or exceeds 2^62" );
        return static_cast<int128_t>( std::nearbyint( scaled ) );
    }

    int128_t raw_ = 0;
};

} // namespace mpcd
