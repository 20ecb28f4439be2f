#pragma once

#include <mpcd/params.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mpcd
{

struct BenchRecord
{
    int edge_length = 0;
    int ranks = 1;
    Scheme scheme = Scheme::halo;
    std::int64_t steps = 0;
    double seconds = 0.0;
    std::int64_t particles = 0;
    double bytes_per_step = 0.0;
    double msgs_per_step = 0.0;
    double max_drift = 0.0;
    std::string error; // empty on success

    bool operator==( const BenchRecord& ) const = default;
};

struct BenchMatrix
{
    std::vector<int> sizes;
    std::vector<int> ranks;
    std::vector<Scheme> schemes;
    std::int64_t steps = 10;
    int warmup_steps = 5;
};

// One record per (size, ranks, scheme). `base` supplies every other
// parameter. A failing configuration becomes a record with `error` set.
std::vector<BenchRecord> run_benchmark_matrix( const SimParams& base,
                                               const BenchMatrix& matrix );

BenchRecord run_benchmark( const SimParams& params, std::int64_t steps,
                           int warmup_steps );

// Header: L,ranks,scheme,steps,seconds,particles,bytes_per_step,
// msgs_per_step,max_drift. An `error` column is appended only when some
// record failed.
std::string format_csv( const std::vector<BenchRecord>& records,
                        bool include_timing = true );
std::vector<BenchRecord> parse_csv( std::string_view text );

// Plain-text table with speedup t(1 rank) / t(n ranks) per size and scheme.
std::string format_summary( const std::vector<BenchRecord>& records );

// Write the CSV to `path` and the summary to `path` + ".summary.txt".
void emit_report( const std::vector<BenchRecord>& records,
                  const std::filesystem::path& path );

} // namespace mpcd
