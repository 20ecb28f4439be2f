#include <mpcd/bench.hpp>
#include <mpcd/decomposition.hpp>
#include <mpcd/engine.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

namespace mpcd
{

namespace
{

constexpr std::string_view kHeader =
    "L,ranks,scheme,steps,seconds,particles,bytes_per_step,msgs_per_step,"
    "max_drift";

// Traffic of the collision exchange itself: moment reduction for the halo
// scheme, gathering particles on cell owners for the migration scheme.
Channel collision_channel( Scheme scheme )
{
    return scheme == Scheme::halo ? Channel::halo : Channel::gather;
}

template <class T>
T field_value( std::string_view text, std::size_t line, std::string_view name )
{
    T value{};
    const auto [ptr, ec] =
        std::from_chars( text.data(), text.data() + text.size(), value );
    if ( ec != std::errc{} || ptr != text.data() + text.size() )
        throw Error( fmt::format( "csv line {}: bad {} value '{}'", line, name,
                                  text ) );
    return value;
}

std::vector<std::string_view> split( std::string_view line )
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while ( true )
    {
        const std::size_t comma = line.find( ',', start );
        out.push_back( line.substr( start, comma - start ) );
        if ( comma == std::string_view::npos )
            break;
        start = comma + 1;
    }
    return out;
}

// Error text is quoted, with embedded quotes doubled; line breaks become
// spaces so every record stays on one line.
std::string quote( const std::string& text )
{
    std::string out = "\"";
    for ( char c : text )
    {
        if ( c == '"' )
            out += "\"\"";
        else if ( c == '\n' || c == '\r' )
            out += ' ';
        else
            out += c;
    }
    return out + '"';
}

std::string unquote( std::string_view field, std::size_t line )
{
    if ( field.size() < 2 || field.front() != '"' || field.back() != '"' )
        throw Error( fmt::format( "csv line {}: error field is not quoted", line ) );
    std::string out;
    for ( std::size_t i = 1; i + 1 < field.size(); ++i )
    {
        out += field[i];
        if ( field[i] == '"' )
            ++i; // skip the doubled quote
    }
    return out;
}

} // namespace

BenchRecord run_benchmark( const SimParams& params, std::int64_t steps,
                           int warmup_steps )
{
    validate( params );
    if ( steps <= 0 )
        throw ConfigError( "benchmark needs steps > 0" );

    BenchRecord record;
    record.edge_length = params.edge_length;
    record.ranks = params.rank_count();
    record.scheme = params.scheme;
    record.steps = steps;

    SimState state = initial_state( params );
    record.particles = conservation_report( state ).particles;
    const Vec3 p0 = conservation_report( state ).momentum;
    const Method method = method_for( params.scheme );

    EngineOptions options;
    options.track_cell_drift = false;
    advance( state, method, warmup_steps, options );

    const Channel channel = collision_channel( params.scheme );
    std::vector<TrafficStats> traffic;
    double drift = 0.0;
    const auto observer = [&]( const StepDiagnostics& d ) {
        traffic.push_back( d.traffic[channel] );
        drift = std::max( drift, max_abs( d.report.momentum - p0 ) );
    };

    const auto start = std::chrono::steady_clock::now();
    advance( state, method, steps, options, observer );
    const auto stop = std::chrono::steady_clock::now();
    record.seconds = std::chrono::duration<double>( stop - start ).count();

    double bytes = 0.0, msgs = 0.0;
    for ( const TrafficStats& t : traffic )
    {
        bytes += static_cast<double>( t.bytes );
        msgs += static_cast<double>( t.messages );
    }
    record.bytes_per_step = bytes / static_cast<double>( traffic.size() );
    record.msgs_per_step = msgs / static_cast<double>( traffic.size() );
    record.max_drift = drift;

    if ( params.scheme == Scheme::halo )
        for ( const TrafficStats& t : traffic )
            if ( !( t == traffic.front() ) )
                throw Error( fmt::format(
                    "halo traffic changed between steps: {} vs {} bytes",
                    traffic.front().bytes, t.bytes ) );
    return record;
}

std::vector<BenchRecord> run_benchmark_matrix( const SimParams& base,
                                               const BenchMatrix& matrix )
{
    std::vector<BenchRecord> records;
    for ( int size : matrix.sizes )
        for ( int ranks : matrix.ranks )
            for ( Scheme scheme : matrix.schemes )
            {
                SimParams params = base;
                params.edge_length = size;
                params.scheme = scheme;
                BenchRecord record;
                record.edge_length = size;
                record.ranks = ranks;
                record.scheme = scheme;
                record.steps = matrix.steps;
                try
                {
                    params.rank_dims = rank_dims_for( ranks );
                    record = run_benchmark( params, matrix.steps,
                                            matrix.warmup_steps );
                }
                catch ( const std::exception& e )
                {
                    record.error = e.what();
                    if ( record.error.empty() )
                        record.error = "unknown error";
                }
                records.push_back( std::move( record ) );
            }
    return records;
}

std::string format_csv( const std::vector<BenchRecord>& records,
                        bool include_timing )
{
    const bool with_error =
        std::any_of( records.begin(), records.end(),
                     []( const BenchRecord& r ) { return !r.error.empty(); } );
    std::string out( kHeader );
    if ( with_error )
        out += ",error";
    out += '\n';
    for ( const BenchRecord& r : records )
    {
        const std::string seconds =
            include_timing ? fmt::format( "{}", r.seconds ) : std::string( "-" );
        out += fmt::format( "{},{},{},{},{},{},{},{},{}", r.edge_length, r.ranks,
                            to_string( r.scheme ), r.steps, seconds, r.particles,
                            r.bytes_per_step, r.msgs_per_step, r.max_drift );
        if ( with_error )
            out += ',' + quote( r.error );
        out += '\n';
    }
    return out;
}

std::vector<BenchRecord> parse_csv( std::string_view text )
{
    std::vector<BenchRecord> records;
    std::size_t line_no = 0;
    bool with_error = false;
    std::size_t pos = 0;
    while ( pos < text.size() )
    {
        std::size_t end = text.find( '\n', pos );
        if ( end == std::string_view::npos )
            end = text.size();
        std::string_view line = text.substr( pos, end - pos );
        pos = end + 1;
        ++line_no;
        if ( !line.empty() && line.back() == '\r' )
            line.remove_suffix( 1 );
        if ( line.empty() )
            continue;
        if ( line_no == 1 )
        {
            if ( line == kHeader )
                continue;
            if ( line == std::string( kHeader ) + ",error" )
            {
                with_error = true;
                continue;
            }
            throw Error( fmt::format( "csv: unexpected header '{}'", line ) );
        }
        // the quoted error column is last and may itself contain commas
        std::string_view error_field;
        if ( with_error )
        {
            const std::size_t quote_pos = line.find( ",\"" );
            if ( quote_pos != std::string_view::npos )
            {
                error_field = line.substr( quote_pos + 1 );
                line = line.substr( 0, quote_pos + 1 );
            }
        }
        const auto f = split( line );
        const std::size_t expected = with_error ? 10 : 9;
        if ( f.size() != expected )
            throw Error( fmt::format( "csv line {}: expected {} fields, got {}",
                                      line_no, expected, f.size() ) );
        BenchRecord r;
        r.edge_length = field_value<int>( f[0], line_no, "L" );
        r.ranks = field_value<int>( f[1], line_no, "ranks" );
        r.scheme = scheme_from_string( f[2] );
        r.steps = field_value<std::int64_t>( f[3], line_no, "steps" );
        r.seconds = f[4] == "-" ? 0.0 : field_value<double>( f[4], line_no, "seconds" );
        r.particles = field_value<std::int64_t>( f[5], line_no, "particles" );
        r.bytes_per_step = field_value<double>( f[6], line_no, "bytes_per_step" );
        r.msgs_per_step = field_value<double>( f[7], line_no, "msgs_per_step" );
        r.max_drift = field_value<double>( f[8], line_no, "max_drift" );
        if ( with_error )
            r.error = unquote( error_field, line_no );
        records.push_back( std::move( r ) );
    }
    if ( line_no == 0 )
        throw Error( "csv: missing header" );
    return records;
}

std::string format_summary( const std::vector<BenchRecord>& records )
{
    std::string out = fmt::format( "{:>4} {:>9} {:>6} {:>12} {:>8}\n", "L",
                                   "scheme", "ranks", "seconds", "speedup" );
    std::map<std::pair<int, Scheme>, double> serial;
    for ( const BenchRecord& r : records )
        if ( r.ranks == 1 && r.error.empty() )
            serial[{ r.edge_length, r.scheme }] = r.seconds;

    for ( const BenchRecord& r : records )
    {
        if ( !r.error.empty() )
        {
            out += fmt::format( "{:>4} {:>9} {:>6} failed: {}\n", r.edge_length,
                                to_string( r.scheme ), r.ranks, r.error );
            continue;
        }
        const auto it = serial.find( { r.edge_length, r.scheme } );
        const std::string speedup =
            ( it != serial.end() && r.seconds > 0.0 )
                ? fmt::format( "{:.3f}", it->second / r.seconds )
                : std::string( "-" );
        out += fmt::format( "{:>4} {:>9} {:>6} {:>12.6f} {:>8}\n", r.edge_length,
                            to_string( r.scheme ), r.ranks, r.seconds, speedup );
    }
    return out;
}

void emit_report( const std::vector<BenchRecord>& records,
                  const std::filesystem::path& path )
{
    if ( records.empty() )
        throw Error( "emit_report: no records" );
    const auto write = [&]( const std::filesystem::path& p,
                            const std::string& text ) {
        std::ofstream out( p, std::ios::binary | std::ios::trunc );
        if ( !out || !( out << text ) || !out.flush() )
            throw Error( fmt::format( "cannot write '{}'", p.string() ) );
    };
    write( path, format_csv( records ) );
    write( path.string() + ".summary.txt", format_summary( records ) );
}

} // namespace mpcd
