#include <mpcd/config.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace mpcd
{

namespace
{

using Values = std::vector<std::string>;

// Split any comma-joined entries so `a,b,c` and `[a, b, c]` read the same.
Values flatten( const Values& inputs )
{
    Values out;
    for ( const std::string& in : inputs )
    {
        std::stringstream ss( in );
        std::string item;
        while ( std::getline( ss, item, ',' ) )
        {
            const auto b = item.find_first_not_of( " \t[]\"'" );
            const auto e = item.find_last_not_of( " \t[]\"'" );
            if ( b != std::string::npos )
                out.push_back( item.substr( b, e - b + 1 ) );
        }
    }
    return out;
}

template <class T>
T parse_number( const std::string& key, const std::string& text,
                std::string_view type )
{
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars( first, last, value );
    if ( ec != std::errc{} || ptr != last )
        throw ConfigError( fmt::format( "config key '{}': expected {}, got '{}'",
                                        key, type, text ) );
    return value;
}

const std::string& single( const std::string& key, const Values& values,
                           std::string_view type )
{
    if ( values.size() != 1 )
        throw ConfigError( fmt::format(
            "config key '{}': expected a single {}, got {} values", key, type,
            values.size() ) );
    return values.front();
}

int as_int( const std::string& key, const Values& v )
{
    return parse_number<int>( key, single( key, v, "integer" ), "integer" );
}

double as_double( const std::string& key, const Values& v )
{
    const double x =
        parse_number<double>( key, single( key, v, "number" ), "number" );
    if ( !std::isfinite( x ) )
        throw ConfigError(
            fmt::format( "config key '{}': expected a finite number", key ) );
    return x;
}

bool as_bool( const std::string& key, const Values& v )
{
    const std::string& s = single( key, v, "boolean" );
    if ( s == "true" || s == "1" )
        return true;
    if ( s == "false" || s == "0" )
        return false;
    throw ConfigError( fmt::format(
        "config key '{}': expected boolean (true/false), got '{}'", key, s ) );
}

std::vector<int> as_int_list( const std::string& key, const Values& v )
{
    if ( v.empty() )
        throw ConfigError( fmt::format(
            "config key '{}': expected a list of integers", key ) );
    std::vector<int> out;
    for ( const std::string& s : v )
        out.push_back( parse_number<int>( key, s, "list of integers" ) );
    return out;
}

Scheme as_scheme( const std::string& key, const std::string& s )
{
    try
    {
        return scheme_from_string( s );
    }
    catch ( const ConfigError& )
    {
        throw ConfigError( fmt::format(
            "config key '{}': expected 'halo' or 'migration', got '{}'", key,
            s ) );
    }
}

} // namespace

Config parse_config_text( std::string_view text )
{
    std::istringstream input{ std::string( text ) };
    std::vector<CLI::ConfigItem> items;
    try
    {
        items = CLI::ConfigTOML().from_config( input );
    }
    catch ( const CLI::Error& e )
    {
        throw ConfigError( fmt::format( "config: {}", e.what() ) );
    }

    std::map<std::string, Values> entries;
    for ( const CLI::ConfigItem& item : items )
    {
        const std::string key = item.fullname();
        // section markers carry no value
        if ( item.name == "++" || item.name == "--" )
            continue;
        if ( !entries.emplace( key, flatten( item.inputs ) ).second )
            throw ConfigError( fmt::format( "config key '{}' given twice", key ) );
    }

    Config config;
    SimParams& p = config.params;
    RunOptions& o = config.options;
    bool have_edge = false;
    bool have_steps = false;

    for ( const auto& [key, v] : entries )
    {
        if ( key == "edge_length" )
        {
            p.edge_length = as_int( key, v );
            have_edge = true;
        }
        else if ( key == "steps" )
        {
            p.n_steps = parse_number<std::int64_t>(
                key, single( key, v, "integer" ), "integer" );
            have_steps = true;
        }
        else if ( key == "cell_size" )
            p.cell_size = as_double( key, v );
        else if ( key == "density" )
            p.density = as_double( key, v );
        else if ( key == "dt" )
            p.dt = as_double( key, v );
        else if ( key == "alpha_degrees" )
            p.alpha = as_double( key, v ) * std::numbers::pi / 180.0;
        else if ( key == "halo_width" )
            p.halo_width = as_int( key, v );
        else if ( key == "seed" )
            p.seed = parse_number<std::uint64_t>(
                key, single( key, v, "unsigned integer" ), "unsigned integer" );
        else if ( key == "scheme" )
            p.scheme = as_scheme( key, single( key, v, "string" ) );
        else if ( key == "rank_dims" )
        {
            const auto dims = as_int_list( key, v );
            if ( dims.size() != 3 )
                throw ConfigError( fmt::format(
                    "config key '{}': expected 3 integers, got {}", key,
                    dims.size() ) );
            p.rank_dims = { dims[0], dims[1], dims[2] };
        }
        else if ( key == "velocity_variance" )
            p.velocity_variance = as_double( key, v );
        else if ( key == "lazy_migration" )
            p.lazy_migration = as_bool( key, v );
        else if ( key == "output" )
            o.output = single( key, v, "string" );
        else if ( key == "bench_sizes" )
            o.bench_sizes = as_int_list( key, v );
        else if ( key == "bench_ranks" )
            o.bench_ranks = as_int_list( key, v );
        else if ( key == "bench_schemes" )
        {
            if ( v.empty() )
                throw ConfigError( fmt::format(
                    "config key '{}': expected a list of scheme names", key ) );
            o.bench_schemes.clear();
            for ( const std::string& s : v )
                o.bench_schemes.push_back( as_scheme( key, s ) );
        }
        else if ( key == "warmup_steps" )
        {
            o.warmup_steps = as_int( key, v );
            if ( o.warmup_steps < 0 )
                throw ConfigError( "config key 'warmup_steps' must be >= 0" );
        }
        else
            throw ConfigError( fmt::format( "unknown config key '{}'", key ) );
    }

    if ( !have_edge )
        throw ConfigError( "missing config key 'edge_length' (integer)" );
    if ( !have_steps )
        throw ConfigError( "missing config key 'steps' (integer)" );

    validate( p );
    return config;
}

Config parse_config( const std::filesystem::path& path )
{
    std::ifstream in( path );
    if ( !in )
        throw ConfigError(
            fmt::format( "cannot open config file '{}'", path.string() ) );
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text( buffer.str() );
}

std::string describe( const Config& config )
{
    const SimParams& p = config.params;
    const RunOptions& o = config.options;
    std::string out;
    auto line = [&]( std::string_view key, const auto& value ) {
        out += fmt::format( "  {:<18} = {}\n", key, value );
    };
    line( "edge_length", p.edge_length );
    line( "cell_size", p.cell_size );
    line( "density", p.density );
    line( "particles", p.particle_count() );
    line( "dt", p.dt );
    line( "alpha_degrees", p.alpha * 180.0 / std::numbers::pi );
    line( "halo_width", p.halo_width );
    line( "seed", p.seed );
    line( "steps", p.n_steps );
    line( "scheme", to_string( p.scheme ) );
    line( "rank_dims", fmt::format( "{},{},{}", p.rank_dims[0], p.rank_dims[1],
                                    p.rank_dims[2] ) );
    line( "velocity_variance", p.velocity_variance );
    line( "lazy_migration", p.lazy_migration );
    line( "output", o.output.empty() ? "-" : o.output );
    line( "warmup_steps", o.warmup_steps );
    return out;
}

} // namespace mpcd
