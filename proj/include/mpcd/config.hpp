#pragma once

#include <mpcd/params.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mpcd
{

struct RunOptions
{
    std::string output;
    std::vector<int> bench_sizes{ 16, 32, 64 };
    std::vector<int> bench_ranks{ 1, 2, 4, 8 };
    std::vector<Scheme> bench_schemes{ Scheme::halo, Scheme::migration };
    int warmup_steps = 5;
};

struct Config
{
    SimParams params;
    RunOptions options;
};

// TOML-style `key = value` file. Recognised keys:
//   edge_length (required), steps (required), cell_size, density, dt,
//   alpha_degrees, halo_width, seed, scheme, rank_dims, velocity_variance,
//   lazy_migration, output, bench_sizes, bench_ranks, bench_schemes,
//   warmup_steps.
// Unknown, missing or mistyped keys raise ConfigError naming the key.
Config parse_config( const std::filesystem::path& path );
Config parse_config_text( std::string_view text );

// Multi-line echo of every resolved parameter.
std::string describe( const Config& config );

} // namespace mpcd
