// Command-line front end: run, bench, verify and stats.

#include <mpcd/bench.hpp>
#include <mpcd/config.hpp>
#include <mpcd/engine.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

namespace
{

using namespace mpcd;

void print_header( const Config& config, std::string_view command )
{
    fmt::print( "mpcd {}\n", command );
    fmt::print( "{}", describe( config ) );
    fmt::print( "  {:<18} = {}\n", "ranks", config.params.rank_count() );
    std::fflush( stdout );
}

int command_run( const Config& config, const std::string& out_path )
{
    const SimParams& p = config.params;
    SimState state = initial_state( p );
    const ConservationReport start = conservation_report( state );
    fmt::print( "initial: particles={} momentum=({:.3e},{:.3e},{:.3e}) "
                "kinetic_energy={:.12g}\n",
                start.particles, start.momentum[0], start.momentum[1],
                start.momentum[2], start.kinetic_energy );

    std::ofstream csv;
    if ( !out_path.empty() )
    {
        csv.open( out_path );
        if ( !csv )
            throw Error( fmt::format( "cannot write '{}'", out_path ) );
        csv << "step,px,py,pz,kinetic_energy,max_cell_drift,crossings\n";
    }

    const std::int64_t every = std::max<std::int64_t>( 1, p.n_steps / 10 );
    advance( state, method_for( p.scheme ), p.n_steps, {},
             [&]( const StepDiagnostics& d ) {
                 const ConservationReport& r = d.report;
                 if ( csv.is_open() )
                     csv << fmt::format( "{},{},{},{},{},{},{}\n", d.step,
                                         r.momentum[0], r.momentum[1],
                                         r.momentum[2], r.kinetic_energy,
                                         r.max_cell_drift, d.crossings );
                 if ( d.step % every == 0 || d.step == p.n_steps )
                     fmt::print( "step {:>6}: |dP|={:.3e} dE/E={:.3e} "
                                 "cell_drift={:.3e}\n",
                                 d.step, max_abs( r.momentum - start.momentum ),
                                 std::fabs( r.kinetic_energy -
                                            start.kinetic_energy ) /
                                     start.kinetic_energy,
                                 r.max_cell_drift );
             } );
    if ( csv.is_open() && !csv.flush() )
        throw Error( fmt::format( "cannot write '{}'", out_path ) );
    return 0;
}

int command_bench( const Config& config, const std::string& out_path )
{
    BenchMatrix matrix;
    matrix.sizes = config.options.bench_sizes;
    matrix.ranks = config.options.bench_ranks;
    matrix.schemes = config.options.bench_schemes;
    matrix.steps = config.params.n_steps;
    matrix.warmup_steps = config.options.warmup_steps;

    const std::vector<BenchRecord> records =
        run_benchmark_matrix( config.params, matrix );
    const std::string path = out_path.empty() ? "bench.csv" : out_path;
    emit_report( records, path );
    fmt::print( "{}", format_summary( records ) );
    fmt::print( "wrote {} and {}.summary.txt\n", path, path );
    return 0;
}

bool check( std::string_view name, bool ok, const std::string& detail )
{
    fmt::print( "{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail );
    return ok;
}

int command_verify( const Config& config )
{
    const SimParams& p = config.params;
    bool ok = true;

    // Conservation on the configured topology and scheme.
    {
        SimState state = initial_state( p );
        const ConservationReport start = conservation_report( state );
        double dp = 0.0, de = 0.0, cell = 0.0;
        advance( state, method_for( p.scheme ), p.n_steps, {},
                 [&]( const StepDiagnostics& d ) {
                     dp = std::max( dp, max_abs( d.report.momentum -
                                                 start.momentum ) );
                     if ( start.kinetic_energy > 0.0 )
                         de = std::max( de, std::fabs( d.report.kinetic_energy -
                                                       start.kinetic_energy ) /
                                                start.kinetic_energy );
                     cell = std::max( cell, d.report.max_cell_drift );
                 } );
        ok &= check( "momentum", dp < 1e-10, fmt::format( "max drift {:.3e}", dp ) );
        ok &= check( "energy", de < 1e-9, fmt::format( "max relative drift {:.3e}", de ) );
        ok &= check( "cell momentum", cell < 1e-10,
                     fmt::format( "max per-cell drift {:.3e}", cell ) );
    }

    // Parallel schemes against the serial path and against each other.
    const RunSetting serial{ { 1, 1, 1 }, Method::serial };
    for ( Method method : { Method::halo, Method::migration } )
    {
        const RunSetting parallel{ p.rank_dims, method };
        const EquivalenceReport r =
            equivalence_check( p, serial, parallel, p.n_steps );
        ok &= check( fmt::format( "{} vs serial", to_string( method ) ),
                     r.max_position < 1e-8 && r.max_velocity < 1e-8,
                     fmt::format( "position {:.3e} velocity {:.3e}",
                                  r.max_position, r.max_velocity ) );
    }

    if ( !p.lazy_migration && p.rank_count() > 1 )
    {
        SimParams q = p;
        q.scheme = Scheme::halo;
        SimState state = initial_state( q );
        EngineOptions options;
        options.halo_cross_check = true;
        std::string detail = "reduced moments match direct sums";
        bool good = true;
        try
        {
            advance( state, Method::halo, p.n_steps, options );
        }
        catch ( const Error& e )
        {
            good = false;
            detail = e.what();
        }
        ok &= check( "halo cross-check", good, detail );
    }
    return ok ? 0 : 1;
}

int command_stats( const Config& config, const std::string& out_path )
{
    const SimParams& p = config.params;
    SimState state = initial_state( p );
    std::ofstream csv;
    if ( !out_path.empty() )
    {
        csv.open( out_path );
        if ( !csv )
            throw Error( fmt::format( "cannot write '{}'", out_path ) );
        csv << "step,channel,messages,bytes,pairs\n";
    }
    EngineOptions options;
    options.track_cell_drift = false;
    advance( state, method_for( p.scheme ), p.n_steps, options,
             [&]( const StepDiagnostics& d ) {
                 std::string line = fmt::format( "step {:>6}:", d.step );
                 for ( std::size_t c = 0; c < kChannelCount; ++c )
                 {
                     const auto channel = static_cast<Channel>( c );
                     const TrafficStats& t = d.traffic[channel];
                     line += fmt::format( " {}={}B/{}msg", to_string( channel ),
                                          t.bytes, t.messages );
                     if ( csv.is_open() )
                         csv << fmt::format( "{},{},{},{},{}\n", d.step,
                                             to_string( channel ), t.messages,
                                             t.bytes, t.pairs );
                 }
                 fmt::print( "{}\n", line );
             } );
    return 0;
}

} // namespace

int main( int argc, char** argv )
{
    CLI::App app{ "MPCD fluid solver with domain decomposition" };
    std::string config_path;
    std::string command = "run";
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::vector<int> ranks;

    app.add_option( "--config", config_path, "configuration file" )
        ->required()
        ->check( CLI::ExistingFile );
    app.add_option( "--command", command, "what to do" )
        ->check( CLI::IsMember( { "run", "bench", "verify", "stats" } ) );
    app.add_option( "--out", out_path, "output file" );
    app.add_option( "--seed", seed, "override the configured seed" );
    app.add_option( "--ranks", ranks, "rank grid x,y,z" )
        ->delimiter( ',' )
        ->expected( 3 );
    CLI11_PARSE( app, argc, argv );

    try
    {
        Config config = parse_config( config_path );
        if ( seed )
            config.params.seed = *seed;
        if ( !ranks.empty() )
        {
            config.params.rank_dims = { ranks[0], ranks[1], ranks[2] };
            validate( config.params );
        }
        if ( out_path.empty() )
            out_path = config.options.output;

        print_header( config, command );
        if ( command == "bench" )
            return command_bench( config, out_path );
        if ( command == "verify" )
            return command_verify( config );
        if ( command == "stats" )
            return command_stats( config, out_path );
        return command_run( config, out_path );
    }
    catch ( const std::exception& e )
    {
        fmt::print( stderr, "error: {}\n", e.what() );
        return 2;
    }
}
