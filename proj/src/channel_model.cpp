#include "noma/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace noma {

namespace {

constexpr int kPlacementRetries = 10000;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) with 53 random bits; std::uniform_real_distribution is not
// guaranteed identical across standard libraries.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// CN(0,1) sample via Box-Muller: real and imaginary parts each N(0, 1/2).
cplx complex_gaussian(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double radius = std::sqrt(-std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

} // namespace

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

std::vector<Point> bs_grid(const NetworkConfig& cfg) {
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cfg.num_bs))));
    const std::size_t rows = (cfg.num_bs + cols - 1) / cols;
    const double spacing = 2.0 * cfg.cell_radius;
    const double x0 = -0.5 * spacing * static_cast<double>(cols - 1);
    const double y0 = -0.5 * spacing * static_cast<double>(rows - 1);

    std::vector<Point> sites;
    sites.reserve(cfg.num_bs);
    for (std::size_t i = 0; i < cfg.num_bs; ++i) {
        const auto r = i / cols;
        const auto c = i % cols;
        sites.push_back({x0 + spacing * static_cast<double>(c), y0 + spacing * static_cast<double>(r)});
    }
    return sites;
}

Topology generate_topology(const NetworkConfig& cfg, Rng& rng) {
    Topology topo;
    topo.bs_positions = bs_grid(cfg);
    topo.user_positions.reserve(cfg.num_users);

    // Cells only touch at isolated points, so picking a disc uniformly and then
    // a point uniformly inside it is uniform over the union.
    for (std::size_t k = 0; k < cfg.num_users; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
            const auto cell = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(cfg.num_bs));
            const Point& centre = topo.bs_positions[std::min(cell, cfg.num_bs - 1)];
            const double radius = cfg.cell_radius * std::sqrt(uniform01(rng));
            const double angle = 2.0 * std::numbers::pi * uniform01(rng);
            const Point candidate{centre.x + radius * std::cos(angle), centre.y + radius * std::sin(angle)};

            const bool too_close = std::any_of(
                topo.bs_positions.begin(), topo.bs_positions.end(),
                [&](const Point& bs) { return distance(bs, candidate) < cfg.min_distance; });
            if (!too_close) {
                topo.user_positions.push_back(candidate);
                placed = true;
            }
        }
        if (!placed) throw ConfigError("could not place a user outside min_distance of every BS");
    }
    return topo;
}

ChannelState generate_channels(const NetworkConfig& cfg, const Topology& topo, Rng& rng) {
    if (topo.bs_positions.size() != cfg.num_bs || topo.user_positions.size() != cfg.num_users)
        throw ShapeError("topology does not match the configuration");

    ChannelState ch{VectorArray(cfg.dims()), topo.bs_positions, topo.user_positions};
    for (std::size_t m = 0; m < cfg.num_bs; ++m) {
        for (std::size_t k = 0; k < cfg.num_users; ++k) {
            const double d = distance(topo.bs_positions[m], topo.user_positions[k]);
            const double amplitude = std::sqrt(std::pow(d, -cfg.pathloss_exponent));
            for (std::size_t s = 0; s < cfg.num_subcarriers; ++s) {
                auto h = ch.h(m, k, s);
                for (;;) {
                    for (auto& x : h) x = amplitude * complex_gaussian(rng);
                    const double n2 = norm_sq(h);
                    if (n2 > 0.0 && std::isfinite(n2)) break;
                }
            }
        }
    }
    return ch;
}

ChannelState generate_network(const NetworkConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const Topology topo = generate_topology(cfg, rng);
    return generate_channels(cfg, topo, rng);
}

} // namespace noma
