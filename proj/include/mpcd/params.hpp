#pragma once

#include <mpcd/types.hpp>

#include <array>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace mpcd
{

// Communication scheme of the parallel collision step.
//   migration: whole particles move to the rank owning their collision cell.
//   halo:      partial cell moments are reduced over a static halo pattern.
enum class Scheme
{
    migration,
    halo
};

std::string_view to_string( Scheme scheme );
Scheme scheme_from_string( std::string_view name );

inline constexpr double kDefaultAlpha = 130.0 * std::numbers::pi / 180.0;

struct SimParams
{
    int edge_length = 0; // cells per side, cubic box
    double cell_size = 1.0;
    double density = 10.0; // mean particles per cell
    double dt = 0.1;
    double alpha = kDefaultAlpha; // radians
    int halo_width = 1;
    std::uint64_t seed = 0;
    std::int64_t n_steps = 0;
    Scheme scheme = Scheme::halo;
    Index3 rank_dims{ 1, 1, 1 };

    double velocity_variance = 1.0;
    double particle_mass = 1.0;

    // Halo scheme only: keep particles until they leave the halo region
    // instead of migrating as soon as they leave the owned domain.
    bool lazy_migration = false;

    double box_length() const { return edge_length * cell_size; }
    int rank_count() const
    {
        return rank_dims[0] * rank_dims[1] * rank_dims[2];
    }
    std::int64_t particle_count() const;
};

// Throws ConfigError naming the first violated constraint.
void validate( const SimParams& params );

} // namespace mpcd
