#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "noma/config.hpp"
#include "noma/types.hpp"

namespace noma {

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

double distance(const Point& a, const Point& b);

struct Topology {
    std::vector<Point> bs_positions;
    std::vector<Point> user_positions;
};

/// One network realization. h(m,k,s) is the length-N channel from BS m to user k on subcarrier s.
struct ChannelState {
    VectorArray h;
    std::vector<Point> bs_positions;
    std::vector<Point> user_positions;

    const Dims& dims() const { return h.dims(); }
};

using Rng = std::mt19937_64;

/// Stream seed for sample `index` of a run seeded with `base_seed` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// BS sites on a square grid with spacing 2 * cell_radius, row-major, centred at the origin.
std::vector<Point> bs_grid(const NetworkConfig& cfg);

/// Users uniform over the union of the cell discs, at least min_distance from every BS.
/// Throws ConfigError when a user cannot be placed within the retry cap.
Topology generate_topology(const NetworkConfig& cfg, Rng& rng);

/// Rayleigh fading with power-law path loss: h = d^(-alpha/2) z, z ~ CN(0, I_N).
ChannelState generate_channels(const NetworkConfig& cfg, const Topology& topo, Rng& rng);

/// Topology + channels for a single seeded draw.
ChannelState generate_network(const NetworkConfig& cfg, std::uint64_t seed);

} // namespace noma
